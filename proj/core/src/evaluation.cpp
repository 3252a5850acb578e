#include "credo/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "credo/errors.hpp"
#include "credo/stats.hpp"

namespace credo {

MetricsReport summarize(std::vector<MetricsRow> rows) {
    if (rows.empty()) throw Error("summarize: no metric rows");
    MetricsReport report;
    report.per_repetition = std::move(rows);

    auto column = [&](double MetricsRow::* field) {
        std::vector<double> v;
        v.reserve(report.per_repetition.size());
        for (const auto& row : report.per_repetition) v.push_back(row.*field);
        return v;
    };
    auto fill = [&](double MetricsRow::* field) {
        const auto v = column(field);
        report.mean.*field = mean(v);
        report.two_sd.*field = v.size() > 1 ? 2.0 * sample_sd(v) : 0.0;
    };
    fill(&MetricsRow::amc);
    fill(&MetricsRow::aco);
    fill(&MetricsRow::smis);
    fill(&MetricsRow::ilr);
    return report;
}

namespace {

bool covers(const PredictionInterval& interval, double y) {
    return y >= interval.lower && y <= interval.upper;
}

}  // namespace

double marginal_coverage(std::span<const PredictionInterval> intervals,
                         std::span<const double> targets) {
    if (intervals.empty() || intervals.size() != targets.size()) {
        throw Error("marginal_coverage: empty or misaligned inputs");
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        hits += covers(intervals[i], targets[i]) ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(intervals.size());
}

double outlier_coverage(std::span<const PredictionInterval> intervals,
                        std::span<const double> targets,
                        const OutlierPartition& partition) {
    if (intervals.size() != targets.size()) {
        throw Error("outlier_coverage: misaligned inputs");
    }
    if (partition.outlier_indices.empty()) {
        throw Error("outlier_coverage: empty outlier set");
    }
    std::size_t hits = 0;
    for (int idx : partition.outlier_indices) {
        const auto i = static_cast<std::size_t>(idx);
        if (i >= intervals.size()) throw Error("outlier_coverage: index out of range");
        hits += covers(intervals[i], targets[i]) ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(partition.outlier_indices.size());
}

double smis(std::span<const PredictionInterval> intervals,
            std::span<const double> targets, double alpha) {
    if (intervals.empty() || intervals.size() != targets.size()) {
        throw Error("smis: empty or misaligned inputs");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error("smis: alpha outside (0,1)");
    const double penalty = 2.0 / alpha;
    double acc = 0.0;
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        const double lo = intervals[i].lower;
        const double hi = intervals[i].upper;
        const double y = targets[i];
        double term = hi - lo;
        if (y < lo) term += penalty * (lo - y);
        if (y > hi) term += penalty * (y - hi);
        acc += term;
    }
    return acc / static_cast<double>(intervals.size());
}

std::vector<double> lof_scores(const Eigen::MatrixXd& features, int k) {
    const auto n = features.rows();
    if (k < 1) throw Error("lof_scores: k must be positive");
    if (n <= k) throw Error("lof_scores: need more points than neighbors (n_test > k)");

    // Pairwise distances; desk scale keeps the O(n^2) matrix cheap.
    Eigen::MatrixXd dist(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        dist(i, i) = 0.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double d = (features.row(i) - features.row(j)).norm();
            dist(i, j) = d;
            dist(j, i) = d;
        }
    }

    // k-distance and neighborhoods (all points within the k-distance).
    std::vector<double> k_distance(static_cast<std::size_t>(n));
    std::vector<std::vector<int>> neighbors(static_cast<std::size_t>(n));
    std::vector<double> row(static_cast<std::size_t>(n - 1));
    for (Eigen::Index i = 0; i < n; ++i) {
        std::size_t w = 0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j != i) row[w++] = dist(i, j);
        }
        std::vector<double> sorted = row;
        std::nth_element(sorted.begin(), sorted.begin() + (k - 1), sorted.end());
        const double kd = sorted[static_cast<std::size_t>(k - 1)];
        k_distance[static_cast<std::size_t>(i)] = kd;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j != i && dist(i, j) <= kd) {
                neighbors[static_cast<std::size_t>(i)].push_back(static_cast<int>(j));
            }
        }
    }

    // Local reachability density; zero mean reachability => infinite lrd.
    std::vector<double> lrd(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& nbrs = neighbors[static_cast<std::size_t>(i)];
        double reach_sum = 0.0;
        for (int j : nbrs) {
            reach_sum += std::max(k_distance[static_cast<std::size_t>(j)],
                                  dist(i, static_cast<Eigen::Index>(j)));
        }
        const double mean_reach = reach_sum / static_cast<double>(nbrs.size());
        lrd[static_cast<std::size_t>(i)] =
            mean_reach > 0.0 ? 1.0 / mean_reach : std::numeric_limits<double>::infinity();
    }

    std::vector<double> lof(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& nbrs = neighbors[static_cast<std::size_t>(i)];
        const double own = lrd[static_cast<std::size_t>(i)];
        if (std::isinf(own)) {
            // Zero-reachability cluster: every neighbor is a duplicate with
            // infinite lrd as well.
            lof[static_cast<std::size_t>(i)] = 1.0;
            continue;
        }
        double nbr_sum = 0.0;
        bool nbr_inf = false;
        for (int j : nbrs) {
            const double l = lrd[static_cast<std::size_t>(j)];
            if (std::isinf(l)) {
                nbr_inf = true;
                break;
            }
            nbr_sum += l;
        }
        lof[static_cast<std::size_t>(i)] =
            nbr_inf ? std::numeric_limits<double>::infinity()
                    : (nbr_sum / static_cast<double>(nbrs.size())) / own;
    }
    return lof;
}

OutlierPartition partition_outliers(std::span<const double> lof, double contamination,
                                    double inlier_fraction) {
    const auto n = lof.size();
    if (n == 0) throw Error("partition_outliers: empty scores");
    if (!(contamination > 0.0 && contamination < 1.0)) {
        throw Error("partition_outliers: contamination outside (0,1)");
    }
    if (!(inlier_fraction > 0.0 && inlier_fraction < 1.0)) {
        throw Error("partition_outliers: inlier_fraction outside (0,1)");
    }

    const auto n_out =
        static_cast<std::size_t>(std::ceil(contamination * static_cast<double>(n) - 1e-12));
    const auto n_central = static_cast<std::size_t>(
        std::floor(inlier_fraction * static_cast<double>(n - n_out) + 1e-12));
    if (n_out == 0 || n_central == 0 || n_out >= n) {
        throw Error("partition_outliers: not enough points for both sets");
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    // Descending LOF, ties broken by index for determinism.
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return lof[static_cast<std::size_t>(a)] > lof[static_cast<std::size_t>(b)];
    });

    OutlierPartition part;
    part.lof_scores.assign(lof.begin(), lof.end());
    part.contamination = contamination;
    part.inlier_fraction = inlier_fraction;
    part.outlier_indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_out));

    std::vector<int> rest(order.begin() + static_cast<std::ptrdiff_t>(n_out), order.end());
    std::stable_sort(rest.begin(), rest.end(), [&](int a, int b) {
        return lof[static_cast<std::size_t>(a)] < lof[static_cast<std::size_t>(b)];
    });
    part.central_inlier_indices.assign(rest.begin(),
                                       rest.begin() + static_cast<std::ptrdiff_t>(n_central));
    return part;
}

double ilr(std::span<const PredictionInterval> intervals, const OutlierPartition& partition) {
    if (partition.outlier_indices.empty() || partition.central_inlier_indices.empty()) {
        throw Error("ilr: both partition sets must be non-empty");
    }
    auto mean_width = [&](const std::vector<int>& idx) {
        double acc = 0.0;
        for (int i : idx) {
            const auto& interval = intervals[static_cast<std::size_t>(i)];
            acc += interval.upper - interval.lower;
        }
        return acc / static_cast<double>(idx.size());
    };
    const double inlier_width = mean_width(partition.central_inlier_indices);
    if (!(inlier_width > 0.0)) throw Error("ilr: non-positive inlier mean width");
    return mean_width(partition.outlier_indices) / inlier_width;
}

}  // namespace credo
