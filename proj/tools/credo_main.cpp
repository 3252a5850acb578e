// credo: conformalized credal regression intervals.
//
// Subcommands: generate, fit, calibrate, predict, experiment, plot-data.
// CREDO_OUTPUT_DIR sets the default output directory.

#include <CLI11.hpp>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "credo/bundle.hpp"
#include "credo/errors.hpp"
#include "credo/harness.hpp"

namespace {

namespace fs = std::filesystem;

std::string default_output_dir() {
    const char* env = std::getenv("CREDO_OUTPUT_DIR");
    return env && *env ? env : ".";
}

std::string format_double(double v) {
    if (std::isnan(v)) return "";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

struct FitOptions {
    std::string train_csv;
    std::string target = "y";
    std::string backend = "conjugate-blr";
    double alpha = 0.1;
    double alpha0 = 0.1;
    int b = 1000;
    std::uint64_t seed = 1;
    double prior_precision = 1.0;
    double ig_shape = 2.0;
    double ig_scale = 1.0;
    double learning_rate = 0.05;
    int epochs = 200;
    std::optional<int> knn_k;
    bool no_scarcity = false;
    std::string out;
};

int run_fit(const FitOptions& opt) {
    const credo::Dataset raw = credo::load_csv(opt.train_csv, opt.target);
    const credo::Standardizer st = credo::fit_standardizer(raw);
    credo::Dataset train = raw;
    train.features = st.apply(raw.features);

    credo::ModelBundle bundle;
    bundle.standardizer = st;
    bundle.levels = credo::Levels{opt.alpha, opt.alpha0};
    if (opt.backend == "conjugate-blr") {
        credo::BlrPrior prior;
        prior.precision = opt.prior_precision;
        prior.ig_shape = opt.ig_shape;
        prior.ig_scale = opt.ig_scale;
        bundle.model = credo::fit_conjugate_blr(train, prior, opt.b, opt.seed);
    } else if (opt.backend == "bootstrap-ensemble") {
        credo::EnsembleFitConfig config;
        config.learning_rate = opt.learning_rate;
        config.epochs = opt.epochs;
        config.seed = opt.seed;
        bundle.model =
            credo::fit_bootstrap_quantile_ensemble(train, opt.b, bundle.levels, config);
    } else {
        throw credo::Error("fit: unknown backend '" + opt.backend + "'");
    }

    if (!opt.no_scarcity) {
        const int k = opt.knn_k ? *opt.knn_k
                                : credo::knn_heuristic_k(static_cast<int>(train.rows()),
                                                         static_cast<int>(train.dim()));
        bundle.scarcity = credo::fit_scarcity_refs(train.features, k);
    }

    credo::save_bundle(bundle, opt.out);
    std::cout << "wrote model bundle (" << bundle.model.backend_tag() << ", B=" << opt.b
              << ") to " << opt.out << "\n";
    return 0;
}

struct CalibrateOptions {
    std::string bundle_path;
    std::string cal_csv;
    std::string target = "y";
    std::optional<double> alpha;
    std::string gamma_mode = "fixed";  // fixed | adaptive
    double gamma = 0.425;
    credo::GammaParams gamma_params;
    std::string out;
};

credo::GammaSource gamma_source_for(const credo::ModelBundle& bundle,
                                    const std::string& mode, double fixed,
                                    const credo::GammaParams& params) {
    if (mode == "fixed") return credo::GammaSource::fixed(fixed);
    if (mode == "adaptive") {
        if (!bundle.scarcity) {
            throw credo::Error(
                "adaptive gamma needs scarcity refs in the bundle (refit without "
                "--no-scarcity)");
        }
        return credo::GammaSource::adaptive(params, *bundle.scarcity);
    }
    throw credo::Error("unknown gamma mode '" + mode + "'");
}

int run_calibrate(const CalibrateOptions& opt) {
    credo::ModelBundle bundle = credo::load_bundle(opt.bundle_path);
    if (opt.alpha) bundle.levels.alpha = *opt.alpha;

    const credo::Dataset raw = credo::load_csv(opt.cal_csv, opt.target);
    credo::Dataset cal = raw;
    cal.features = bundle.standardizer.apply(raw.features);

    const credo::GammaSource source =
        gamma_source_for(bundle, opt.gamma_mode, opt.gamma, opt.gamma_params);
    const credo::PipelineResult result =
        credo::credo_pipeline(bundle.model, cal, bundle.levels, source);
    credo::save_calibration(result.calibration, opt.out);
    std::cout << "tau_hat = " << format_double(result.calibration.tau_hat) << " (k="
              << result.calibration.k_index << ", m=" << result.calibration.scores.size()
              << ") -> " << opt.out << "\n";
    return 0;
}

struct PredictOptions {
    std::string bundle_path;
    std::string calibration_path;
    std::string test_csv;
    std::string target;
    std::string gamma_mode = "fixed";
    double gamma = 0.425;
    credo::GammaParams gamma_params;
    bool cqr = false;
    std::string out;
};

int run_predict(const PredictOptions& opt) {
    const credo::ModelBundle bundle = credo::load_bundle(opt.bundle_path);
    const credo::CalibrationResult calibration =
        credo::load_calibration(opt.calibration_path);

    const credo::Dataset test = credo::load_csv(opt.test_csv, opt.target);
    const Eigen::MatrixXd features = bundle.standardizer.apply(test.features);

    credo::CredoPredictor predictor;
    predictor.model = bundle.model;
    predictor.levels = credo::Levels{calibration.alpha, bundle.levels.alpha0};
    predictor.gamma_source =
        gamma_source_for(bundle, opt.gamma_mode, opt.gamma, opt.gamma_params);
    predictor.tau_hat = calibration.tau_hat;
    predictor.cqr_mode = opt.cqr;

    std::ofstream out(opt.out);
    if (!out) throw credo::Error("predict: cannot open output file " + opt.out);
    out << "x,env_lower,env_upper,lower,upper,aleatoric,epistemic,slack,gamma,scarcity\n";
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
        const Eigen::VectorXd x = features.row(i).transpose();
        const credo::PredictionInterval interval = predictor.predict(x, true);
        const auto& d = interval.decomposition;
        out << format_double(test.features(i, 0)) << ','
            << format_double(interval.envelope.lower) << ','
            << format_double(interval.envelope.upper) << ','
            << format_double(interval.lower) << ',' << format_double(interval.upper) << ','
            << format_double(d ? d->aleatoric : std::nan("")) << ','
            << format_double(d ? d->epistemic : std::nan("")) << ','
            << format_double(d ? d->slack : std::nan("")) << ','
            << format_double(opt.cqr ? std::nan("") : predictor.gamma_source.gamma_at(x))
            << ',' << format_double(predictor.gamma_source.scarcity_at(x)) << '\n';
    }
    std::cout << "wrote " << features.rows() << " intervals to " << opt.out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"CREDO: conformalized credal regression intervals"};
    app.require_subcommand(1);

    // generate
    auto* generate = app.add_subcommand("generate", "Generate a synthetic scenario as CSV");
    int scenario_id = 1;
    int scenario_n = 2000;
    std::uint64_t gen_seed = 1;
    std::string gen_out;
    generate->add_option("--scenario", scenario_id, "Scenario id (1, 2 or 3)")->required();
    generate->add_option("--n", scenario_n, "Number of rows")->required();
    generate->add_option("--seed", gen_seed, "RNG seed");
    generate->add_option("--out", gen_out, "Output CSV path")->required();

    // fit
    FitOptions fit;
    auto* fit_cmd = app.add_subcommand("fit", "Fit a posterior backend and serialize it");
    fit_cmd->add_option("--train", fit.train_csv, "Training CSV")->required();
    fit_cmd->add_option("--target", fit.target, "Target column (name or 0-based index)");
    fit_cmd->add_option("--backend", fit.backend,
                        "conjugate-blr | bootstrap-ensemble");
    fit_cmd->add_option("--alpha", fit.alpha, "Conformal miscoverage");
    fit_cmd->add_option("--alpha0", fit.alpha0, "Credal nominal level");
    fit_cmd->add_option("--b", fit.b, "Posterior draw count B");
    fit_cmd->add_option("--seed", fit.seed, "Model seed");
    fit_cmd->add_option("--prior-precision", fit.prior_precision, "BLR ridge precision");
    fit_cmd->add_option("--ig-shape", fit.ig_shape, "BLR inverse-gamma shape");
    fit_cmd->add_option("--ig-scale", fit.ig_scale, "BLR inverse-gamma scale");
    fit_cmd->add_option("--learning-rate", fit.learning_rate, "Ensemble learning rate");
    fit_cmd->add_option("--epochs", fit.epochs, "Ensemble epochs");
    int fit_knn_k = -1;
    fit_cmd->add_option("--knn-k", fit_knn_k,
                        "Scarcity neighbor count (default: heuristic)");
    fit_cmd->add_flag("--no-scarcity", fit.no_scarcity,
                      "Skip fitting scarcity refs (disables adaptive gamma)");
    fit_cmd->add_option("--out", fit.out, "Output bundle path")->required();

    // calibrate
    CalibrateOptions cal;
    auto* cal_cmd = app.add_subcommand("calibrate", "Split-conformal calibration");
    cal_cmd->add_option("--bundle", cal.bundle_path, "Model bundle JSON")->required();
    cal_cmd->add_option("--cal", cal.cal_csv, "Calibration CSV")->required();
    cal_cmd->add_option("--target", cal.target, "Target column");
    double cal_alpha = -1.0;
    cal_cmd->add_option("--alpha", cal_alpha, "Override the bundle's alpha");
    cal_cmd->add_option("--gamma-mode", cal.gamma_mode, "fixed | adaptive");
    cal_cmd->add_option("--gamma", cal.gamma, "Fixed trimming level");
    cal_cmd->add_option("--gamma-min", cal.gamma_params.gamma_min, "Adaptive gamma_min");
    cal_cmd->add_option("--gamma-max", cal.gamma_params.gamma_max, "Adaptive gamma_max");
    cal_cmd->add_option("--m-gamma", cal.gamma_params.m_gamma, "Scarcity threshold");
    cal_cmd->add_option("--tau-gamma", cal.gamma_params.tau_gamma, "Scarcity scale");
    cal_cmd->add_option("--out", cal.out, "Output calibration JSON")->required();

    // predict
    PredictOptions pred;
    auto* pred_cmd = app.add_subcommand("predict", "Emit intervals for a test CSV");
    pred_cmd->add_option("--bundle", pred.bundle_path, "Model bundle JSON")->required();
    pred_cmd->add_option("--calibration", pred.calibration_path, "Calibration JSON")
        ->required();
    pred_cmd->add_option("--test", pred.test_csv, "Test CSV")->required();
    pred_cmd->add_option("--target", pred.target, "Response column of the test CSV")
        ->required();
    pred_cmd->add_option("--gamma-mode", pred.gamma_mode, "fixed | adaptive");
    pred_cmd->add_option("--gamma", pred.gamma, "Fixed trimming level");
    pred_cmd->add_option("--gamma-min", pred.gamma_params.gamma_min, "Adaptive gamma_min");
    pred_cmd->add_option("--gamma-max", pred.gamma_params.gamma_max, "Adaptive gamma_max");
    pred_cmd->add_option("--m-gamma", pred.gamma_params.m_gamma, "Scarcity threshold");
    pred_cmd->add_option("--tau-gamma", pred.gamma_params.tau_gamma, "Scarcity scale");
    pred_cmd->add_flag("--cqr", pred.cqr, "Use the CQR mean-endpoint baseline");
    pred_cmd->add_option("--out", pred.out, "Output intervals CSV")->required();

    // experiment
    std::string config_path;
    std::string exp_out_dir = default_output_dir();
    int exp_reps = -1;
    std::int64_t exp_seed = -1;
    int exp_b = -1;
    std::string exp_methods;
    auto* exp_cmd = app.add_subcommand("experiment", "Run the full repeated-split protocol");
    exp_cmd->add_option("--config", config_path, "Experiment config JSON")->required();
    exp_cmd->add_option("--output-dir", exp_out_dir,
                        "Output directory (overrides config and CREDO_OUTPUT_DIR)");
    exp_cmd->add_option("--repetitions", exp_reps, "Override repetitions");
    exp_cmd->add_option("--base-seed", exp_seed, "Override base seed");
    exp_cmd->add_option("--b", exp_b, "Override posterior draw count");
    exp_cmd->add_option("--methods", exp_methods,
                        "Override methods (comma-separated)");

    // plot-data
    std::string plot_report_dir;
    std::string plot_kind = "intervals";
    std::string plot_out;
    auto* plot_cmd = app.add_subcommand("plot-data", "Reshape per-point export for plotting");
    plot_cmd->add_option("--report", plot_report_dir,
                         "Experiment output directory (with per_point.csv)")
        ->required();
    plot_cmd->add_option("--kind", plot_kind, "intervals | decomposition | gamma-profile");
    plot_cmd->add_option("--out", plot_out, "Output CSV (default <report>/plot_<kind>.csv)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (generate->parsed()) {
            const credo::Dataset ds =
                credo::generate_scenario(scenario_id, scenario_n, gen_seed);
            credo::save_csv(ds, gen_out, "y");
            std::cout << "wrote scenario " << scenario_id << " (n=" << scenario_n << ") to "
                      << gen_out << "\n";
            return 0;
        }
        if (fit_cmd->parsed()) {
            if (fit_knn_k > 0) fit.knn_k = fit_knn_k;
            return run_fit(fit);
        }
        if (cal_cmd->parsed()) {
            if (cal_alpha > 0.0) cal.alpha = cal_alpha;
            return run_calibrate(cal);
        }
        if (pred_cmd->parsed()) return run_predict(pred);
        if (exp_cmd->parsed()) {
            credo::ExperimentConfig config = credo::config_from_json_file(config_path);
            if (exp_reps > 0) config.repetitions = exp_reps;
            if (exp_seed >= 0) config.base_seed = static_cast<std::uint64_t>(exp_seed);
            if (exp_b > 1) config.b = exp_b;
            if (!exp_methods.empty()) {
                config.methods.clear();
                std::stringstream ss(exp_methods);
                std::string method;
                while (std::getline(ss, method, ',')) config.methods.push_back(method);
            }
            if (exp_cmd->count("--output-dir") || config.output_dir == ".") {
                config.output_dir = exp_out_dir;
            }
            credo::validate_config(config);
            const credo::RunReport report = credo::run_experiment(config);
            credo::write_report(report, config.output_dir);
            std::cout << "ran " << config.repetitions << " repetitions ("
                      << report.failures << " failed); reports in " << config.output_dir
                      << "\n";
            for (const auto& [method, metrics] : report.by_method) {
                std::cout << "  " << method << ": amc=" << format_double(metrics.mean.amc)
                          << " smis=" << format_double(metrics.mean.smis)
                          << " ilr=" << format_double(metrics.mean.ilr) << "\n";
            }
            return 0;
        }
        if (plot_cmd->parsed()) {
            const auto rows = credo::load_per_point_csv(
                (fs::path(plot_report_dir) / "per_point.csv").string());
            const std::string out_path =
                plot_out.empty()
                    ? (fs::path(plot_report_dir) / ("plot_" + plot_kind + ".csv")).string()
                    : plot_out;
            credo::emit_plot_data(rows, plot_kind, out_path);
            std::cout << "wrote " << out_path << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
