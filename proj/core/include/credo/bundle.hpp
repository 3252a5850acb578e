#pragma once

#include <optional>
#include <string>

#include "credo/conformal.hpp"
#include "credo/dataset.hpp"
#include "credo/envelope.hpp"
#include "credo/posterior.hpp"

namespace credo {

// Everything the CLI needs to predict after a separate fit invocation: the
// fitted backend, the feature standardizer, the levels used at fit time, and
// (when fitted) the scarcity references for adaptive trimming.
struct ModelBundle {
    PosteriorModel model;
    Standardizer standardizer;
    Levels levels;
    std::optional<ScarcityRefs> scarcity;
};

// Self-describing JSON round trip. Conjugate draws are not stored: they are
// re-derived from (posterior, seed, B), which is bit-stable.
void save_bundle(const ModelBundle& bundle, const std::string& path);
ModelBundle load_bundle(const std::string& path);

void save_calibration(const CalibrationResult& result, const std::string& path);
CalibrationResult load_calibration(const std::string& path);

}  // namespace credo
