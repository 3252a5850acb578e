#include "credo/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "credo/errors.hpp"
#include "credo/stats.hpp"

namespace credo {

void validate_gamma_params(const GammaParams& p) {
    if (!(p.gamma_min > 0.0 && p.gamma_min < p.gamma_max && p.gamma_max < 1.0)) {
        throw Error("gamma params: need 0 < gamma_min < gamma_max < 1");
    }
    if (!(p.tau_gamma > 0.0)) throw Error("gamma params: tau_gamma must be positive");
    if (!(p.epsilon > 0.0)) throw Error("gamma params: epsilon must be positive");
}

int knn_heuristic_k(int n, int d) {
    if (n < 2) throw Error("knn_heuristic_k: n must be at least 2");
    if (d < 1) throw Error("knn_heuristic_k: d must be at least 1");
    constexpr double c_base = 6.672;
    const double raw = std::ceil(c_base * std::pow(static_cast<double>(n),
                                                   4.0 / (4.0 + static_cast<double>(d))));
    const auto k = static_cast<long long>(raw);
    return static_cast<int>(std::clamp<long long>(k, 1, n - 1));
}

double knn_radius(const Eigen::MatrixXd& points, const Eigen::VectorXd& x, int k) {
    const auto n = points.rows();
    if (k < 1 || k > n) throw Error("knn_radius: k outside [1, n]");
    if (x.size() != points.cols()) throw Error("knn_radius: dimension mismatch");
    std::vector<double> dist(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        dist[static_cast<std::size_t>(i)] = (points.row(i).transpose() - x).norm();
    }
    std::nth_element(dist.begin(), dist.begin() + (k - 1), dist.end());
    return dist[static_cast<std::size_t>(k - 1)];
}

ScarcityRefs fit_scarcity_refs(const Eigen::MatrixXd& train_features, int k) {
    const auto n = train_features.rows();
    if (n < 2) throw Error("fit_scarcity_refs: need at least two training rows");
    if (k < 1 || k >= n) throw Error("fit_scarcity_refs: k must lie in [1, n_train - 1]");
    if (!train_features.allFinite()) throw Error("fit_scarcity_refs: non-finite feature");

    std::vector<double> radii(static_cast<std::size_t>(n));
    std::vector<double> dist;
    dist.reserve(static_cast<std::size_t>(n - 1));
    for (Eigen::Index i = 0; i < n; ++i) {
        dist.clear();
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i) continue;  // self-exclusion on training rows
            dist.push_back((train_features.row(j) - train_features.row(i)).norm());
        }
        std::nth_element(dist.begin(), dist.begin() + (k - 1), dist.end());
        radii[static_cast<std::size_t>(i)] = dist[static_cast<std::size_t>(k - 1)];
    }

    ScarcityRefs refs;
    refs.k = k;
    refs.q_lo = linear_quantile(radii, 0.50);
    refs.q_hi = linear_quantile(radii, 0.95);
    refs.train_features = train_features;
    return refs;
}

double scarcity_score(const Eigen::VectorXd& x, const ScarcityRefs& refs, double epsilon) {
    if (refs.train_features.rows() == 0) throw Error("scarcity_score: refs not fitted");
    const double r = knn_radius(refs.train_features, x, refs.k);
    return (r - refs.q_lo) / (refs.q_hi - refs.q_lo + epsilon);
}

double adaptive_gamma(double scarcity, const GammaParams& p) {
    validate_gamma_params(p);
    const double t = (scarcity - p.m_gamma) / p.tau_gamma;
    const double sig = 1.0 / (1.0 + std::exp(-t));
    double g = p.gamma_max - (p.gamma_max - p.gamma_min) * sig;
    // A saturated sigmoid can land exactly on a bound in floating point; the
    // contract keeps the range open (limits are asymptotic only).
    if (g >= p.gamma_max) g = std::nextafter(p.gamma_max, 0.0);
    if (g <= p.gamma_min) g = std::nextafter(p.gamma_min, 1.0);
    return g;
}

Envelope trimmed_envelope(const EndpointDraws& draws, double gamma) {
    const auto b_count = draws.q_lower.size();
    if (b_count < 2) throw Error("trimmed_envelope: need at least two draws");
    if (!(gamma > 0.0 && gamma < 1.0)) {
        throw Error("trimmed_envelope: gamma must lie strictly inside (0,1)");
    }

    const std::span<const double> lower(draws.q_lower.data(),
                                        static_cast<std::size_t>(b_count));
    const std::span<const double> upper(draws.q_upper.data(),
                                        static_cast<std::size_t>(b_count));
    Envelope env;
    env.gamma_used = gamma;
    env.lower = linear_quantile(lower, gamma / 2.0);
    env.upper = linear_quantile(upper, 1.0 - gamma / 2.0);
    if (env.lower > env.upper) {
        std::swap(env.lower, env.upper);
        env.trim_swapped = true;
    }
    return env;
}

}  // namespace credo
