#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "credo/conformal.hpp"

namespace credo {

// Density-based test-set partition: the top-LOF contamination fraction are
// outliers; the lowest-LOF inlier_fraction of the remainder are the central
// inliers. Counts: |outliers| = ceil(contamination * n),
// |central| = floor(inlier_fraction * (n - |outliers|)).
struct OutlierPartition {
    std::vector<int> outlier_indices;
    std::vector<int> central_inlier_indices;
    std::vector<double> lof_scores;
    double contamination = 0.05;
    double inlier_fraction = 0.20;
};

struct MetricsRow {
    double amc = 0.0;
    double aco = 0.0;
    double smis = 0.0;
    double ilr = 0.0;
};

// Per-repetition metric rows plus mean and 2x-standard-deviation summaries.
struct MetricsReport {
    std::vector<MetricsRow> per_repetition;
    MetricsRow mean;
    MetricsRow two_sd;
};

MetricsReport summarize(std::vector<MetricsRow> rows);

double marginal_coverage(std::span<const PredictionInterval> intervals,
                         std::span<const double> targets);

double outlier_coverage(std::span<const PredictionInterval> intervals,
                        std::span<const double> targets,
                        const OutlierPartition& partition);

// Mean of width + (2/alpha) * one-sided exceedances.
double smis(std::span<const PredictionInterval> intervals,
            std::span<const double> targets, double alpha);

// Classic Local Outlier Factor on the given (standardized) features; ties in
// the k-distance include all equidistant neighbors. Zero-reachability
// clusters (duplicated points) get LOF = 1.
std::vector<double> lof_scores(const Eigen::MatrixXd& features, int k = 15);

OutlierPartition partition_outliers(std::span<const double> lof,
                                    double contamination = 0.05,
                                    double inlier_fraction = 0.20);

// Mean interval width on outliers / mean width on central inliers.
double ilr(std::span<const PredictionInterval> intervals,
           const OutlierPartition& partition);

}  // namespace credo
