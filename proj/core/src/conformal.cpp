#include "credo/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "credo/errors.hpp"

namespace credo {

double envelope_score(double y, const Envelope& env) {
    if (!std::isfinite(y)) throw Error("envelope_score: non-finite target");
    return std::max(env.lower - y, y - env.upper);
}

CalibrationResult calibrate(std::span<const double> scores, double alpha) {
    if (scores.empty()) throw Error("calibrate: empty score vector");
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error("calibrate: alpha outside (0,1)");
    for (double s : scores) {
        if (!std::isfinite(s)) throw Error("calibrate: non-finite score");
    }

    const auto m = static_cast<int>(scores.size());
    // ceil with a relative guard so exact integers are not bumped by the
    // binary representation of alpha.
    const double raw = (static_cast<double>(m) + 1.0) * (1.0 - alpha);
    const int k = static_cast<int>(std::ceil(raw - 1e-9));

    CalibrationResult result;
    result.scores.assign(scores.begin(), scores.end());
    result.alpha = alpha;
    result.k_index = k;
    if (k > m) {
        result.tau_hat = std::numeric_limits<double>::infinity();
        return result;
    }
    std::vector<double> sorted = result.scores;
    std::sort(sorted.begin(), sorted.end());
    result.tau_hat = sorted[static_cast<std::size_t>(k - 1)];
    return result;
}

GammaSource GammaSource::fixed(double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0)) {
        throw Error("gamma source: fixed gamma must lie strictly inside (0,1)");
    }
    GammaSource src;
    src.adaptive_ = false;
    src.fixed_gamma_ = gamma;
    return src;
}

GammaSource GammaSource::adaptive(const GammaParams& params, ScarcityRefs refs) {
    validate_gamma_params(params);
    if (refs.train_features.rows() < 2) {
        throw Error("gamma source: adaptive mode needs fitted scarcity refs");
    }
    GammaSource src;
    src.adaptive_ = true;
    src.params_ = params;
    src.refs_ = std::move(refs);
    return src;
}

double GammaSource::gamma_at(const Eigen::VectorXd& x) const {
    if (!adaptive_) return fixed_gamma_;
    return adaptive_gamma(scarcity_score(x, refs_, params_.epsilon), params_);
}

double GammaSource::scarcity_at(const Eigen::VectorXd& x) const {
    if (!adaptive_) return std::numeric_limits<double>::quiet_NaN();
    return scarcity_score(x, refs_, params_.epsilon);
}

namespace {

Envelope mean_endpoint_pair(const EndpointDraws& draws) {
    Envelope env;
    env.lower = draws.q_lower.mean();
    env.upper = draws.q_upper.mean();
    env.gamma_used = std::numeric_limits<double>::quiet_NaN();
    return env;
}

}  // namespace

PredictionInterval CredoPredictor::predict(const Eigen::VectorXd& x,
                                           bool with_decomposition) const {
    const EndpointDraws draws = endpoint_draws(model, x, levels);
    PredictionInterval interval;
    interval.envelope = cqr_mode ? mean_endpoint_pair(draws)
                                 : trimmed_envelope(draws, gamma_source.gamma_at(x));
    interval.lower = interval.envelope.lower - tau_hat;
    interval.upper = interval.envelope.upper + tau_hat;
    if (with_decomposition && std::isfinite(tau_hat)) {
        interval.decomposition = decompose(interval.envelope, draws, tau_hat);
    }
    return interval;
}

namespace {

PipelineResult run_pipeline(const PosteriorModel& model, const Dataset& cal,
                            const Levels& levels, const GammaSource& gamma_source,
                            bool cqr_mode) {
    validate_dataset(cal);
    validate_levels(levels);

    const auto m = cal.rows();
    std::vector<double> scores(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) {
        const Eigen::VectorXd x = cal.features.row(i).transpose();
        const EndpointDraws draws = endpoint_draws(model, x, levels);
        const Envelope env = cqr_mode ? mean_endpoint_pair(draws)
                                      : trimmed_envelope(draws, gamma_source.gamma_at(x));
        scores[static_cast<std::size_t>(i)] = envelope_score(cal.targets(i), env);
    }

    PipelineResult result;
    result.calibration = calibrate(scores, levels.alpha);
    result.predictor = CredoPredictor{model, levels, gamma_source,
                                      result.calibration.tau_hat, cqr_mode};
    return result;
}

}  // namespace

PipelineResult credo_pipeline(const PosteriorModel& model, const Dataset& cal,
                              const Levels& levels, const GammaSource& gamma_source) {
    return run_pipeline(model, cal, levels, gamma_source, /*cqr_mode=*/false);
}

PipelineResult cqr_baseline(const PosteriorModel& model, const Dataset& cal,
                            const Levels& levels) {
    return run_pipeline(model, cal, levels, GammaSource::fixed(0.425), /*cqr_mode=*/true);
}

}  // namespace credo
