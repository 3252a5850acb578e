#include "credo/bundle.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <json.hpp>

#include "credo/errors.hpp"

namespace credo {

namespace {

using nlohmann::json;

json vector_to_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

Eigen::VectorXd vector_from_json(const json& j) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    return v;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json out = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
        out.push_back(std::move(row));
    }
    return out;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
    const auto rows = static_cast<Eigen::Index>(j.size());
    if (rows == 0) return {};
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto& row = j[static_cast<std::size_t>(i)];
        if (static_cast<Eigen::Index>(row.size()) != cols) {
            throw Error("bundle: ragged matrix in JSON");
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
        }
    }
    return m;
}

json to_json(const ScarcityRefs& refs) {
    return {{"k", refs.k},
            {"q_lo", refs.q_lo},
            {"q_hi", refs.q_hi},
            {"train_features", matrix_to_json(refs.train_features)}};
}

ScarcityRefs refs_from_json(const json& j) {
    ScarcityRefs refs;
    refs.k = j.at("k").get<int>();
    refs.q_lo = j.at("q_lo").get<double>();
    refs.q_hi = j.at("q_hi").get<double>();
    refs.train_features = matrix_from_json(j.at("train_features"));
    return refs;
}

}  // namespace

void save_bundle(const ModelBundle& bundle, const std::string& path) {
    json j;
    j["format"] = "credo-model-bundle";
    j["version"] = 1;
    j["backend"] = bundle.model.backend_tag();
    j["b"] = bundle.model.draw_count;
    j["dim"] = bundle.model.dim;
    j["seed"] = bundle.model.seed;
    j["levels"] = {{"alpha", bundle.levels.alpha}, {"alpha0", bundle.levels.alpha0}};
    j["standardizer"] = {{"means", vector_to_json(bundle.standardizer.means)},
                         {"scales", vector_to_json(bundle.standardizer.scales)}};
    if (bundle.model.is_conjugate()) {
        const auto& blr = bundle.model.conjugate();
        j["params"] = {{"post_mean", vector_to_json(blr.post_mean)},
                       {"post_precision", matrix_to_json(blr.post_precision)},
                       {"post_shape", blr.post_shape},
                       {"post_scale", blr.post_scale}};
    } else {
        const auto& ens = bundle.model.ensemble();
        json members = json::array();
        for (const auto& member : ens.members) {
            members.push_back({{"lower", vector_to_json(member.lower_weights)},
                               {"upper", vector_to_json(member.upper_weights)}});
        }
        j["params"] = {{"alpha0", ens.alpha0}, {"members", std::move(members)}};
    }
    if (bundle.scarcity) j["scarcity"] = to_json(*bundle.scarcity);

    std::ofstream out(path);
    if (!out) throw Error("save_bundle: cannot open file for writing: " + path);
    out << j.dump(2) << '\n';
}

ModelBundle load_bundle(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("load_bundle: cannot open file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error(std::string("load_bundle: invalid JSON: ") + e.what());
    }
    if (j.value("format", "") != "credo-model-bundle") {
        throw Error("load_bundle: not a credo model bundle");
    }

    ModelBundle bundle;
    bundle.model.draw_count = j.at("b").get<int>();
    bundle.model.dim = j.at("dim").get<int>();
    bundle.model.seed = j.at("seed").get<std::uint64_t>();
    bundle.levels.alpha = j.at("levels").at("alpha").get<double>();
    bundle.levels.alpha0 = j.at("levels").at("alpha0").get<double>();
    bundle.standardizer.means = vector_from_json(j.at("standardizer").at("means"));
    bundle.standardizer.scales = vector_from_json(j.at("standardizer").at("scales"));

    const std::string backend = j.at("backend").get<std::string>();
    const auto& params = j.at("params");
    if (backend == "conjugate-blr") {
        ConjugateBlr blr;
        blr.post_mean = vector_from_json(params.at("post_mean"));
        blr.post_precision = matrix_from_json(params.at("post_precision"));
        blr.post_shape = params.at("post_shape").get<double>();
        blr.post_scale = params.at("post_scale").get<double>();
        redraw_conjugate(blr, bundle.model.draw_count, bundle.model.seed);
        bundle.model.params = std::move(blr);
    } else if (backend == "bootstrap-ensemble") {
        BootstrapEnsemble ens;
        ens.alpha0 = params.at("alpha0").get<double>();
        for (const auto& member : params.at("members")) {
            ens.members.push_back({vector_from_json(member.at("lower")),
                                   vector_from_json(member.at("upper"))});
        }
        bundle.model.params = std::move(ens);
    } else {
        throw Error("load_bundle: unknown backend tag '" + backend + "'");
    }
    if (j.contains("scarcity")) bundle.scarcity = refs_from_json(j.at("scarcity"));
    return bundle;
}

void save_calibration(const CalibrationResult& result, const std::string& path) {
    json j;
    j["format"] = "credo-calibration";
    j["alpha"] = result.alpha;
    j["k_index"] = result.k_index;
    j["tau_hat_infinite"] = !std::isfinite(result.tau_hat);
    j["tau_hat"] = std::isfinite(result.tau_hat) ? result.tau_hat : 0.0;
    json scores = json::array();
    for (double s : result.scores) scores.push_back(s);
    j["scores"] = std::move(scores);

    std::ofstream out(path);
    if (!out) throw Error("save_calibration: cannot open file for writing: " + path);
    out << j.dump(2) << '\n';
}

CalibrationResult load_calibration(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("load_calibration: cannot open file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error(std::string("load_calibration: invalid JSON: ") + e.what());
    }
    if (j.value("format", "") != "credo-calibration") {
        throw Error("load_calibration: not a credo calibration file");
    }
    CalibrationResult result;
    result.alpha = j.at("alpha").get<double>();
    result.k_index = j.at("k_index").get<int>();
    result.tau_hat = j.value("tau_hat_infinite", false)
                         ? std::numeric_limits<double>::infinity()
                         : j.at("tau_hat").get<double>();
    for (const auto& s : j.at("scores")) result.scores.push_back(s.get<double>());
    return result;
}

}  // namespace credo
