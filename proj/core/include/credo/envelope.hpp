#pragma once

#include <Eigen/Core>

#include "credo/posterior.hpp"

namespace credo {

// Trimmed credal interval [C_L(x), C_U(x)]. `trim_swapped` marks the
// pathological case where the raw trim produced C_L > C_U and the endpoints
// were swapped to restore the ordering invariant.
struct Envelope {
    double lower = 0.0;
    double upper = 0.0;
    double gamma_used = 0.0;
    bool trim_swapped = false;
};

struct GammaParams {
    double gamma_min = 0.1;
    double gamma_max = 0.75;
    double m_gamma = 0.0;    // scarcity threshold
    double tau_gamma = 1.0;  // scarcity scale, > 0
    double epsilon = 1e-6;
};
void validate_gamma_params(const GammaParams& p);

// kNN reference state for the scarcity score: the k-th-neighbor radius
// quantiles of the (standardized) training features, plus those features for
// query-time radius computation.
struct ScarcityRefs {
    int k = 1;
    double q_lo = 0.0;  // training median of r_k
    double q_hi = 0.0;  // training 0.95-quantile of r_k
    Eigen::MatrixXd train_features;
};

// k = ceil(6.672 * n^(4/(4+d))), clamped to [1, n-1].
int knn_heuristic_k(int n, int d);

// r_k(X_i) excludes the point itself; reference quantiles use the
// interpolated-order-statistic convention.
ScarcityRefs fit_scarcity_refs(const Eigen::MatrixXd& train_features, int k);

// Euclidean distance from x to its k-th nearest training row (no
// self-exclusion for queries).
double knn_radius(const Eigen::MatrixXd& points, const Eigen::VectorXd& x, int k);

// sc(x) = (r_k(x) - q_lo) / (q_hi - q_lo + epsilon).
double scarcity_score(const Eigen::VectorXd& x, const ScarcityRefs& refs,
                      double epsilon = 1e-6);

// gamma(x) = gamma_max - (gamma_max - gamma_min) * sigmoid((sc - m)/tau).
// Strictly decreasing in sc, open range (gamma_min, gamma_max).
double adaptive_gamma(double scarcity, const GammaParams& p);

// C_L = Quantile_{gamma/2} of the lower draws, C_U = Quantile_{1-gamma/2} of
// the upper draws, both under the interpolated-order-statistic convention.
Envelope trimmed_envelope(const EndpointDraws& draws, double gamma);

}  // namespace credo
