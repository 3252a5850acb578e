#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "credo/conformal.hpp"
#include "credo/dataset.hpp"
#include "credo/evaluation.hpp"
#include "credo/posterior.hpp"

namespace credo {

// Where the experiment data comes from: a CSV on disk, or one of the
// synthetic scenarios (generated once with the base seed, then re-split per
// repetition).
struct DataSourceConfig {
    std::string csv_path;  // empty when a scenario is used
    std::string target_column = "y";
    int scenario_id = 0;  // 1..3, or 0 for CSV
    int scenario_n = 0;
};

struct BackendConfig {
    std::string type = "conjugate-blr";  // or "bootstrap-ensemble"
    // conjugate-blr
    double prior_precision = 1.0;
    double ig_shape = 2.0;
    double ig_scale = 1.0;
    // bootstrap-ensemble
    double learning_rate = 0.05;
    int epochs = 200;
};

struct GammaConfig {
    double fixed_value = 0.425;       // used by the "credo" method
    GammaParams params;               // used by "credo-adaptive"
    std::optional<int> knn_k;         // default: knn_heuristic_k(n_train, d)
};

struct ExperimentConfig {
    DataSourceConfig data;
    Levels levels;
    BackendConfig backend;
    GammaConfig gamma;
    int b = 1000;
    int repetitions = 30;
    std::uint64_t base_seed = 1;
    std::vector<std::string> methods = {"credo", "credo-adaptive", "cqr"};
    std::string output_dir = ".";
    SplitRatios split_ratios;
    int lof_k = 15;
    double lof_contamination = 0.05;
    double ilr_inlier_fraction = 0.20;
};
void validate_config(const ExperimentConfig& config);

ExperimentConfig config_from_json_file(const std::string& path);
std::string config_to_json(const ExperimentConfig& config);

struct RepetitionRow {
    int repetition = 0;
    std::string method;
    MetricsRow metrics;
};

// Per-point export of the last completed repetition. For the CQR baseline
// the envelope slot holds the mean-endpoint pair and gamma/scarcity are NaN.
struct PerPointRow {
    std::string method;
    double x = 0.0;  // first raw feature
    double env_lower = 0.0, env_upper = 0.0;
    double lower = 0.0, upper = 0.0;
    double aleatoric = 0.0, epistemic = 0.0, slack = 0.0;
    double gamma = 0.0, scarcity = 0.0;
    bool lof_outlier = false;
};

struct RunReport {
    std::vector<RepetitionRow> rows;
    std::map<std::string, MetricsReport> by_method;  // aggregated over reps
    std::vector<PerPointRow> per_point;
    int failures = 0;
    std::vector<std::string> failure_messages;
    ExperimentConfig config;
};

// Full protocol: per repetition r, seed = base_seed + r, re-split, refit,
// calibrate each method, evaluate on the test split. A repetition that
// throws is recorded and skipped; the run carries on.
RunReport run_experiment(const ExperimentConfig& config);

// Writes metrics.csv, aggregate.json, per_point.csv into the directory.
void write_report(const RunReport& report, const std::string& dir);

// Long-format plot CSV (x, series, value) with the schema in a leading
// comment line. Kind: "intervals" | "decomposition" | "gamma-profile".
void emit_plot_data(const std::vector<PerPointRow>& per_point, const std::string& kind,
                    const std::string& path);

std::vector<PerPointRow> load_per_point_csv(const std::string& path);

}  // namespace credo
