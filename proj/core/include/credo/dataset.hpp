#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace credo {

// Covariate matrix plus response vector. Feature names are optional (empty
// or exactly one per column).
struct Dataset {
    Eigen::MatrixXd features;  // n x d
    Eigen::VectorXd targets;   // n
    std::vector<std::string> feature_names;

    Eigen::Index rows() const { return features.rows(); }
    Eigen::Index dim() const { return features.cols(); }
};

// Checks n >= 1, d >= 1, matching lengths, and that every entry is finite.
void validate_dataset(const Dataset& ds);

struct DataSplit {
    Dataset train;
    Dataset calibration;
    Dataset test;
    std::uint64_t seed = 0;
};

struct SplitRatios {
    double train = 0.56;
    double calibration = 0.24;
    double test = 0.20;
};

// Per-column affine transform fitted on training features. Columns with zero
// variance get scale 1. Scale convention: sample (n-1) standard deviation.
struct Standardizer {
    Eigen::VectorXd means;
    Eigen::VectorXd scales;

    Eigen::MatrixXd apply(const Eigen::MatrixXd& features) const;
    Eigen::MatrixXd invert(const Eigen::MatrixXd& features) const;
};

// CSV ingestion: comma-separated numeric table, header row required, '.'
// decimal separator. `target_column` is a header name, or a 0-based column
// index when no header matches and the string parses as an integer.
Dataset load_csv(const std::string& path, const std::string& target_column);

// Writes features + target in the load_csv format. The target column is
// appended last under `target_name`.
void save_csv(const Dataset& ds, const std::string& path,
              const std::string& target_name = "y");

// Seeded shuffle-then-cut partition. Calibration and test sizes are
// round(ratio * n); train absorbs the remainder.
DataSplit split(const Dataset& ds, const SplitRatios& ratios, std::uint64_t seed);

// Synthetic 1-d scenarios:
//   1 - piecewise nonlinear mean with an epistemic gap at x in [-0.2, 0.2]
//       holding 1% of samples, constant noise sigma = 0.1;
//   2 - scarce region [0, 0.4] holding 2% of samples, four-regime
//       heteroscedastic sigma(x);
//   3 - Gaussian cluster mixture with a sparse middle band, tail points,
//       and shock-mixture noise.
Dataset generate_scenario(int id, int n, std::uint64_t seed);

// Shock-component probability for scenario 3; exposed for tests and plots.
double scenario3_shock_probability(double x);

Standardizer fit_standardizer(const Dataset& ds);

}  // namespace credo
