#include "credo/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <set>
#include <sstream>

#include "credo/envelope.hpp"
#include "credo/errors.hpp"

namespace credo {

namespace {

using nlohmann::json;

const std::set<std::string> kKnownMethods = {"credo", "credo-adaptive", "cqr"};

std::string format_double(double v) {
    if (std::isnan(v)) return "";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace

void validate_config(const ExperimentConfig& config) {
    if (config.repetitions < 1) throw Error("config: repetitions must be >= 1");
    if (config.b < 2) throw Error("config: b must be >= 2");
    validate_levels(config.levels);
    validate_gamma_params(config.gamma.params);
    if (!(config.gamma.fixed_value > 0.0 && config.gamma.fixed_value < 1.0)) {
        throw Error("config: fixed gamma outside (0,1)");
    }
    if (config.backend.type != "conjugate-blr" && config.backend.type != "bootstrap-ensemble") {
        throw Error("config: unknown backend '" + config.backend.type + "'");
    }
    if (config.methods.empty()) throw Error("config: no methods selected");
    for (const auto& m : config.methods) {
        if (!kKnownMethods.count(m)) throw Error("config: unknown method '" + m + "'");
    }
    const bool has_csv = !config.data.csv_path.empty();
    const bool has_scenario = config.data.scenario_id != 0;
    if (has_csv == has_scenario) {
        throw Error("config: data source must be exactly one of csv or scenario");
    }
    if (has_scenario && (config.data.scenario_id < 1 || config.data.scenario_id > 3)) {
        throw Error("config: scenario id must be 1, 2 or 3");
    }
    if (has_scenario && config.data.scenario_n < 50) {
        throw Error("config: scenario n must be >= 50");
    }
}

ExperimentConfig config_from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("config: cannot open file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error(std::string("config: invalid JSON: ") + e.what());
    }

    ExperimentConfig config;
    if (j.contains("data")) {
        const auto& data = j["data"];
        config.data.csv_path = data.value("csv", "");
        config.data.target_column = data.value("target", "y");
        config.data.scenario_id = data.value("scenario", 0);
        config.data.scenario_n = data.value("n", 0);
    }
    if (j.contains("levels")) {
        config.levels.alpha = j["levels"].value("alpha", 0.1);
        config.levels.alpha0 = j["levels"].value("alpha0", 0.1);
    }
    if (j.contains("backend")) {
        const auto& backend = j["backend"];
        config.backend.type = backend.value("type", "conjugate-blr");
        config.backend.prior_precision = backend.value("prior_precision", 1.0);
        config.backend.ig_shape = backend.value("ig_shape", 2.0);
        config.backend.ig_scale = backend.value("ig_scale", 1.0);
        config.backend.learning_rate = backend.value("learning_rate", 0.05);
        config.backend.epochs = backend.value("epochs", 200);
    }
    if (j.contains("gamma")) {
        const auto& gamma = j["gamma"];
        config.gamma.fixed_value = gamma.value("fixed_value", 0.425);
        config.gamma.params.gamma_min = gamma.value("gamma_min", 0.1);
        config.gamma.params.gamma_max = gamma.value("gamma_max", 0.75);
        config.gamma.params.m_gamma = gamma.value("m_gamma", 0.0);
        config.gamma.params.tau_gamma = gamma.value("tau_gamma", 1.0);
        config.gamma.params.epsilon = gamma.value("epsilon", 1e-6);
        if (gamma.contains("knn_k") && !gamma["knn_k"].is_null()) {
            config.gamma.knn_k = gamma["knn_k"].get<int>();
        }
    }
    config.b = j.value("b", 1000);
    config.repetitions = j.value("repetitions", 30);
    config.base_seed = j.value("base_seed", std::uint64_t{1});
    if (j.contains("methods")) {
        config.methods.clear();
        for (const auto& m : j["methods"]) config.methods.push_back(m.get<std::string>());
    }
    config.output_dir = j.value("output_dir", config.output_dir);
    if (j.contains("split")) {
        const auto& s = j["split"];
        if (s.size() != 3) throw Error("config: split must have three ratios");
        config.split_ratios = {s[0].get<double>(), s[1].get<double>(), s[2].get<double>()};
    }
    config.lof_k = j.value("lof_k", 15);
    config.lof_contamination = j.value("lof_contamination", 0.05);
    config.ilr_inlier_fraction = j.value("ilr_inlier_fraction", 0.20);
    validate_config(config);
    return config;
}

std::string config_to_json(const ExperimentConfig& config) {
    json j;
    if (!config.data.csv_path.empty()) {
        j["data"] = {{"csv", config.data.csv_path}, {"target", config.data.target_column}};
    } else {
        j["data"] = {{"scenario", config.data.scenario_id}, {"n", config.data.scenario_n}};
    }
    j["levels"] = {{"alpha", config.levels.alpha}, {"alpha0", config.levels.alpha0}};
    j["backend"] = {{"type", config.backend.type},
                    {"prior_precision", config.backend.prior_precision},
                    {"ig_shape", config.backend.ig_shape},
                    {"ig_scale", config.backend.ig_scale},
                    {"learning_rate", config.backend.learning_rate},
                    {"epochs", config.backend.epochs}};
    j["gamma"] = {{"fixed_value", config.gamma.fixed_value},
                  {"gamma_min", config.gamma.params.gamma_min},
                  {"gamma_max", config.gamma.params.gamma_max},
                  {"m_gamma", config.gamma.params.m_gamma},
                  {"tau_gamma", config.gamma.params.tau_gamma},
                  {"epsilon", config.gamma.params.epsilon}};
    if (config.gamma.knn_k) j["gamma"]["knn_k"] = *config.gamma.knn_k;
    j["b"] = config.b;
    j["repetitions"] = config.repetitions;
    j["base_seed"] = config.base_seed;
    j["methods"] = config.methods;
    j["output_dir"] = config.output_dir;
    j["split"] = {config.split_ratios.train, config.split_ratios.calibration,
                  config.split_ratios.test};
    j["lof_k"] = config.lof_k;
    j["lof_contamination"] = config.lof_contamination;
    j["ilr_inlier_fraction"] = config.ilr_inlier_fraction;
    return j.dump(2);
}

namespace {

PosteriorModel fit_backend(const ExperimentConfig& config, const Dataset& train,
                           std::uint64_t seed) {
    if (config.backend.type == "conjugate-blr") {
        BlrPrior prior;
        prior.precision = config.backend.prior_precision;
        prior.ig_shape = config.backend.ig_shape;
        prior.ig_scale = config.backend.ig_scale;
        return fit_conjugate_blr(train, prior, config.b, seed);
    }
    EnsembleFitConfig fit;
    fit.learning_rate = config.backend.learning_rate;
    fit.epochs = config.backend.epochs;
    fit.seed = seed;
    return fit_bootstrap_quantile_ensemble(train, config.b, config.levels, fit);
}

struct MethodOutput {
    std::vector<PredictionInterval> intervals;
    std::vector<double> gammas;
    std::vector<double> scarcities;
};

MethodOutput evaluate_method(const CredoPredictor& predictor, const Eigen::MatrixXd& test_x) {
    MethodOutput out;
    const auto n = test_x.rows();
    out.intervals.reserve(static_cast<std::size_t>(n));
    out.gammas.reserve(static_cast<std::size_t>(n));
    out.scarcities.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::VectorXd x = test_x.row(i).transpose();
        out.intervals.push_back(predictor.predict(x, /*with_decomposition=*/true));
        if (predictor.cqr_mode) {
            out.gammas.push_back(std::numeric_limits<double>::quiet_NaN());
            out.scarcities.push_back(std::numeric_limits<double>::quiet_NaN());
        } else {
            out.gammas.push_back(predictor.gamma_source.gamma_at(x));
            out.scarcities.push_back(predictor.gamma_source.scarcity_at(x));
        }
    }
    return out;
}

}  // namespace

RunReport run_experiment(const ExperimentConfig& config) {
    validate_config(config);

    Dataset source;
    if (!config.data.csv_path.empty()) {
        source = load_csv(config.data.csv_path, config.data.target_column);
    } else {
        source = generate_scenario(config.data.scenario_id, config.data.scenario_n,
                                   config.base_seed);
    }

    RunReport report;
    report.config = config;
    std::map<std::string, std::vector<MetricsRow>> rows_by_method;

    for (int rep = 0; rep < config.repetitions; ++rep) {
        const std::uint64_t seed = config.base_seed + static_cast<std::uint64_t>(rep);
        try {
            const DataSplit parts = split(source, config.split_ratios, seed);
            const Standardizer st = fit_standardizer(parts.train);

            Dataset train = parts.train;
            Dataset cal = parts.calibration;
            Dataset test = parts.test;
            train.features = st.apply(parts.train.features);
            cal.features = st.apply(parts.calibration.features);
            test.features = st.apply(parts.test.features);

            const PosteriorModel model = fit_backend(config, train, seed);

            GammaSource adaptive_source = GammaSource::fixed(config.gamma.fixed_value);
            const bool needs_adaptive =
                std::count(config.methods.begin(), config.methods.end(), "credo-adaptive") > 0;
            if (needs_adaptive) {
                const int k = config.gamma.knn_k
                                  ? *config.gamma.knn_k
                                  : knn_heuristic_k(static_cast<int>(train.rows()),
                                                    static_cast<int>(train.dim()));
                adaptive_source = GammaSource::adaptive(
                    config.gamma.params, fit_scarcity_refs(train.features, k));
            }

            const auto lof = lof_scores(test.features, config.lof_k);
            const OutlierPartition partition = partition_outliers(
                lof, config.lof_contamination, config.ilr_inlier_fraction);
            std::vector<bool> is_outlier(static_cast<std::size_t>(test.rows()), false);
            for (int idx : partition.outlier_indices) {
                is_outlier[static_cast<std::size_t>(idx)] = true;
            }

            const std::span<const double> targets(test.targets.data(),
                                                  static_cast<std::size_t>(test.rows()));
            std::vector<PerPointRow> per_point;
            for (const auto& method : config.methods) {
                PipelineResult pipeline = [&] {
                    if (method == "cqr") return cqr_baseline(model, cal, config.levels);
                    if (method == "credo-adaptive") {
                        if (!needs_adaptive) throw Error("internal: adaptive source missing");
                        return credo_pipeline(model, cal, config.levels, adaptive_source);
                    }
                    return credo_pipeline(model, cal, config.levels,
                                          GammaSource::fixed(config.gamma.fixed_value));
                }();

                const MethodOutput out = evaluate_method(pipeline.predictor, test.features);
                MetricsRow metrics;
                metrics.amc = marginal_coverage(out.intervals, targets);
                metrics.aco = outlier_coverage(out.intervals, targets, partition);
                metrics.smis = smis(out.intervals, targets, config.levels.alpha);
                metrics.ilr = ilr(out.intervals, partition);
                rows_by_method[method].push_back(metrics);
                report.rows.push_back({rep, method, metrics});

                for (Eigen::Index i = 0; i < test.rows(); ++i) {
                    const auto& interval = out.intervals[static_cast<std::size_t>(i)];
                    PerPointRow row;
                    row.method = method;
                    row.x = parts.test.features(i, 0);  // raw scale for plotting
                    row.env_lower = interval.envelope.lower;
                    row.env_upper = interval.envelope.upper;
                    row.lower = interval.lower;
                    row.upper = interval.upper;
                    if (interval.decomposition) {
                        row.aleatoric = interval.decomposition->aleatoric;
                        row.epistemic = interval.decomposition->epistemic;
                        row.slack = interval.decomposition->slack;
                    } else {
                        row.aleatoric = row.epistemic = row.slack =
                            std::numeric_limits<double>::quiet_NaN();
                    }
                    row.gamma = out.gammas[static_cast<std::size_t>(i)];
                    row.scarcity = out.scarcities[static_cast<std::size_t>(i)];
                    row.lof_outlier = is_outlier[static_cast<std::size_t>(i)];
                    per_point.push_back(std::move(row));
                }
            }
            report.per_point = std::move(per_point);  // keep the last completed rep
        } catch (const std::exception& e) {
            ++report.failures;
            report.failure_messages.push_back("repetition " + std::to_string(rep) + ": " +
                                              e.what());
        }
    }

    if (report.rows.empty()) {
        throw Error("run_experiment: every repetition failed" +
                    (report.failure_messages.empty()
                         ? std::string()
                         : "; first: " + report.failure_messages.front()));
    }
    for (auto& [method, rows] : rows_by_method) {
        report.by_method[method] = summarize(rows);
    }
    return report;
}

void write_report(const RunReport& report, const std::string& dir) {
    std::filesystem::create_directories(dir);
    const std::filesystem::path base(dir);

    {
        std::ofstream out(base / "metrics.csv");
        if (!out) throw Error("write_report: cannot write metrics.csv");
        out << "repetition,method,amc,aco,smis,ilr\n";
        for (const auto& row : report.rows) {
            out << row.repetition << ',' << row.method << ',' << format_double(row.metrics.amc)
                << ',' << format_double(row.metrics.aco) << ','
                << format_double(row.metrics.smis) << ',' << format_double(row.metrics.ilr)
                << '\n';
        }
    }

    {
        json agg;
        agg["config"] = json::parse(config_to_json(report.config));
        agg["failures"] = report.failures;
        agg["failure_messages"] = report.failure_messages;
        json methods;
        for (const auto& [name, metrics] : report.by_method) {
            methods[name] = {
                {"repetitions", metrics.per_repetition.size()},
                {"mean",
                 {{"amc", metrics.mean.amc},
                  {"aco", metrics.mean.aco},
                  {"smis", metrics.mean.smis},
                  {"ilr", metrics.mean.ilr}}},
                {"two_sd",
                 {{"amc", metrics.two_sd.amc},
                  {"aco", metrics.two_sd.aco},
                  {"smis", metrics.two_sd.smis},
                  {"ilr", metrics.two_sd.ilr}}}};
        }
        agg["methods"] = std::move(methods);
        std::ofstream out(base / "aggregate.json");
        if (!out) throw Error("write_report: cannot write aggregate.json");
        out << agg.dump(2) << '\n';
    }

    {
        std::ofstream out(base / "per_point.csv");
        if (!out) throw Error("write_report: cannot write per_point.csv");
        out << "method,x,env_lower,env_upper,lower,upper,aleatoric,epistemic,slack,"
               "gamma,scarcity,lof_outlier\n";
        for (const auto& row : report.per_point) {
            out << row.method << ',' << format_double(row.x) << ','
                << format_double(row.env_lower) << ',' << format_double(row.env_upper) << ','
                << format_double(row.lower) << ',' << format_double(row.upper) << ','
                << format_double(row.aleatoric) << ',' << format_double(row.epistemic) << ','
                << format_double(row.slack) << ',' << format_double(row.gamma) << ','
                << format_double(row.scarcity) << ',' << (row.lof_outlier ? 1 : 0) << '\n';
        }
    }
}

namespace {

double parse_double_or_nan(const std::string& s) {
    if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    return std::stod(s);
}

}  // namespace

std::vector<PerPointRow> load_per_point_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("load_per_point_csv: cannot open file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw Error("load_per_point_csv: empty file");

    std::vector<PerPointRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (line.back() == ',') cells.emplace_back();
        if (cells.size() != 12) {
            throw Error("load_per_point_csv: expected 12 cells per row");
        }
        PerPointRow row;
        row.method = cells[0];
        row.x = parse_double_or_nan(cells[1]);
        row.env_lower = parse_double_or_nan(cells[2]);
        row.env_upper = parse_double_or_nan(cells[3]);
        row.lower = parse_double_or_nan(cells[4]);
        row.upper = parse_double_or_nan(cells[5]);
        row.aleatoric = parse_double_or_nan(cells[6]);
        row.epistemic = parse_double_or_nan(cells[7]);
        row.slack = parse_double_or_nan(cells[8]);
        row.gamma = parse_double_or_nan(cells[9]);
        row.scarcity = parse_double_or_nan(cells[10]);
        row.lof_outlier = cells[11] == "1";
        rows.push_back(std::move(row));
    }
    return rows;
}

void emit_plot_data(const std::vector<PerPointRow>& per_point, const std::string& kind,
                    const std::string& path) {
    if (per_point.empty()) throw Error("emit_plot_data: no per-point rows");

    std::vector<const PerPointRow*> rows;
    rows.reserve(per_point.size());
    for (const auto& row : per_point) rows.push_back(&row);
    std::stable_sort(rows.begin(), rows.end(),
                     [](const PerPointRow* a, const PerPointRow* b) { return a->x < b->x; });

    std::ofstream out(path);
    if (!out) throw Error("emit_plot_data: cannot open file for writing: " + path);

    auto emit = [&](double x, const std::string& series, double value) {
        out << format_double(x) << ',' << series << ',' << format_double(value) << '\n';
    };

    if (kind == "gamma-profile") {
        out << "# schema: x,series,value; series in {gamma, scarcity}; "
               "rows from the credo-adaptive method, sorted by x\n";
        out << "x,series,value\n";
        for (const auto* row : rows) {
            if (row->method != "credo-adaptive") continue;
            emit(row->x, "gamma", row->gamma);
            emit(row->x, "scarcity", row->scarcity);
        }
    } else if (kind == "decomposition") {
        out << "# schema: x,series,value; series in {aleatoric, epistemic, slack, total}; "
               "total = aleatoric + epistemic + slack\n";
        out << "x,series,value\n";
        // Prefer the adaptive rows; fall back to fixed-gamma credo.
        const bool has_adaptive = std::any_of(
            rows.begin(), rows.end(),
            [](const PerPointRow* r) { return r->method == "credo-adaptive"; });
        const std::string source = has_adaptive ? "credo-adaptive" : "credo";
        for (const auto* row : rows) {
            if (row->method != source) continue;
            emit(row->x, "aleatoric", row->aleatoric);
            emit(row->x, "epistemic", row->epistemic);
            emit(row->x, "slack", row->slack);
            emit(row->x, "total", row->aleatoric + row->epistemic + row->slack);
        }
    } else if (kind == "intervals") {
        out << "# schema: x,series,value; series = <method>.lower|<method>.upper, "
               "sorted by x\n";
        out << "x,series,value\n";
        for (const auto* row : rows) {
            emit(row->x, row->method + ".lower", row->lower);
            emit(row->x, row->method + ".upper", row->upper);
        }
    } else {
        throw Error("emit_plot_data: unknown kind '" + kind + "'");
    }
}

}  // namespace credo
