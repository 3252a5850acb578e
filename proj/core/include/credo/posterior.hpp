#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "credo/dataset.hpp"

namespace credo {

// Conformal miscoverage alpha and credal nominal level alpha0.
struct Levels {
    double alpha = 0.1;
    double alpha0 = 0.1;
};
void validate_levels(const Levels& levels);

// Prior for the Normal-Inverse-Gamma conjugate linear model
// Y = intercept + x'beta + eps, eps ~ N(0, sigma^2).
struct BlrPrior {
    Eigen::VectorXd mean;    // length d+1, intercept first; empty means zeros
    double precision = 1.0;  // scalar ridge precision on the coefficients
    double ig_shape = 2.0;
    double ig_scale = 1.0;
};

// Closed-form posterior plus its Monte Carlo draws. Draws are a pure
// function of (posterior, seed, B) and are re-derived on deserialization.
struct ConjugateBlr {
    Eigen::VectorXd post_mean;       // m_n, intercept first
    Eigen::MatrixXd post_precision;  // Lambda_n
    double post_shape = 0.0;         // a_n
    double post_scale = 0.0;         // b_n
    Eigen::MatrixXd beta_draws;      // B x (d+1)
    Eigen::VectorXd sigma_draws;     // B, strictly positive
};

struct QuantileMember {
    Eigen::VectorXd lower_weights;  // intercept first
    Eigen::VectorXd upper_weights;
};

struct BootstrapEnsemble {
    std::vector<QuantileMember> members;
    double alpha0 = 0.1;  // level the members were fitted at
};

struct EnsembleFitConfig {
    double learning_rate = 0.05;
    int epochs = 200;
    std::uint64_t seed = 0;
};

struct PosteriorModel {
    std::variant<ConjugateBlr, BootstrapEnsemble> params;
    int draw_count = 0;  // B >= 2
    int dim = 0;         // feature dimension d
    std::uint64_t seed = 0;

    bool is_conjugate() const { return std::holds_alternative<ConjugateBlr>(params); }
    const ConjugateBlr& conjugate() const { return std::get<ConjugateBlr>(params); }
    const BootstrapEnsemble& ensemble() const { return std::get<BootstrapEnsemble>(params); }
    std::string backend_tag() const {
        return is_conjugate() ? "conjugate-blr" : "bootstrap-ensemble";
    }
};

// The B paired predictive-endpoint draws at a query covariate.
struct EndpointDraws {
    Eigen::VectorXd q_lower;  // length B
    Eigen::VectorXd q_upper;  // q_lower[b] <= q_upper[b] for all b
    Eigen::VectorXd x;
};

// Exact Normal-Inverse-Gamma update, then B posterior draws of (beta, sigma).
PosteriorModel fit_conjugate_blr(const Dataset& train, const BlrPrior& prior,
                                 int draw_count, std::uint64_t seed);

// (Re)derives the Monte Carlo draws from the stored posterior; used at fit
// time and after deserialization so both paths agree bit for bit.
void redraw_conjugate(ConjugateBlr& blr, int draw_count, std::uint64_t seed);

// B bootstrap resamples; on each, two linear quantile regressors at levels
// alpha0/2 and 1 - alpha0/2 fitted by full-batch subgradient descent on the
// pinball loss.
PosteriorModel fit_bootstrap_quantile_ensemble(const Dataset& train, int draw_count,
                                               const Levels& levels,
                                               const EnsembleFitConfig& config);

// Conjugate backend: q_L^(b) = x'beta_b + sigma_b * z(alpha0/2), q_U^(b)
// symmetric. Ensemble backend: member b's two predictions, crossings
// repaired by swap; levels.alpha0 must match the fitted level.
EndpointDraws endpoint_draws(const PosteriorModel& model, const Eigen::VectorXd& x,
                             const Levels& levels);

// Single linear pinball-loss regressor; exposed for tests. Weights are
// intercept-first; the intercept is initialized at the empirical
// level-quantile of the targets. Full-batch, hence invariant to row order.
Eigen::VectorXd fit_linear_pinball(const Eigen::MatrixXd& features,
                                   const Eigen::VectorXd& targets, double level,
                                   const EnsembleFitConfig& config);

struct MassEstimate {
    double value = 0.0;
    double se = 0.0;
};

// Monte Carlo posterior-predictive mass of [lo, hi] at x under the conjugate
// posterior, from fresh theta draws with the per-theta probability computed
// exactly through the normal CDF.
MassEstimate predictive_interval_mass(const PosteriorModel& model,
                                      const Eigen::VectorXd& x, double lo, double hi,
                                      int n_draws, std::uint64_t seed);

}  // namespace credo
