#pragma once

#include <optional>
#include <span>
#include <vector>

#include "credo/decomposition.hpp"
#include "credo/envelope.hpp"
#include "credo/posterior.hpp"

namespace credo {

// Split-conformal calibration state. tau_hat is the k_index-th smallest
// score with k_index = ceil((m+1)(1-alpha)); +infinity when k_index > m.
struct CalibrationResult {
    double tau_hat = 0.0;
    std::vector<double> scores;  // in calibration-set order
    double alpha = 0.1;
    int k_index = 0;
};

// Final interval per Eq-style assembly: [envelope.lower - tau_hat,
// envelope.upper + tau_hat]. For the CQR baseline the envelope slot holds
// the posterior-mean quantile pair (gamma_used is NaN there).
struct PredictionInterval {
    double lower = 0.0;
    double upper = 0.0;
    Envelope envelope;
    std::optional<Decomposition> decomposition;
};

// Distance-to-envelope score: max{lower - y, y - upper}. Non-positive iff y
// lies inside the envelope.
double envelope_score(double y, const Envelope& env);

CalibrationResult calibrate(std::span<const double> scores, double alpha);

// Trimming policy shared by calibration and prediction: a fixed gamma, or
// the covariate-dependent rule driven by the kNN scarcity score.
class GammaSource {
public:
    static GammaSource fixed(double gamma);
    static GammaSource adaptive(const GammaParams& params, ScarcityRefs refs);

    bool is_adaptive() const { return adaptive_; }
    const GammaParams& params() const { return params_; }
    const ScarcityRefs& refs() const { return refs_; }
    double fixed_gamma() const { return fixed_gamma_; }

    double gamma_at(const Eigen::VectorXd& x) const;
    // NaN in fixed mode.
    double scarcity_at(const Eigen::VectorXd& x) const;

private:
    bool adaptive_ = false;
    double fixed_gamma_ = 0.425;
    GammaParams params_;
    ScarcityRefs refs_;
};

// Immutable predictor returned by the pipelines; callable concurrently.
struct CredoPredictor {
    PosteriorModel model;
    Levels levels;
    GammaSource gamma_source;
    double tau_hat = 0.0;
    bool cqr_mode = false;

    PredictionInterval predict(const Eigen::VectorXd& x,
                               bool with_decomposition = false) const;
};

struct PipelineResult {
    CalibrationResult calibration;
    CredoPredictor predictor;
};

// Scores every calibration point against its trimmed envelope, calibrates
// tau_hat, and returns a predictor assembling final intervals with the same
// gamma source.
PipelineResult credo_pipeline(const PosteriorModel& model, const Dataset& cal,
                              const Levels& levels, const GammaSource& gamma_source);

// Plain CQR sharing the calibration machinery: the posterior-mean endpoint
// pair plays the role of the quantile estimates.
PipelineResult cqr_baseline(const PosteriorModel& model, const Dataset& cal,
                            const Levels& levels);

}  // namespace credo
