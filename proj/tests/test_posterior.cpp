#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "credo/bundle.hpp"
#include "credo/errors.hpp"
#include "credo/posterior.hpp"
#include "credo/stats.hpp"
#include "oracles.hpp"

using namespace credo;

namespace {

Dataset linear_dataset(int n, double slope, double noise_sd, std::uint64_t seed) {
    Rng rng(seed);
    Dataset ds;
    ds.features.resize(n, 1);
    ds.targets.resize(n);
    for (int i = 0; i < n; ++i) {
        const double x = -1.0 + 2.0 * rng.uniform();
        ds.features(i, 0) = x;
        ds.targets(i) = slope * x + noise_sd * rng.normal();
    }
    return ds;
}

// Posterior with beta ~= 0 and sigma ~= 1, spreads ~1e-6.
PosteriorModel degenerate_model(int b_count = 200) {
    ConjugateBlr blr;
    blr.post_mean = Eigen::VectorXd::Zero(2);
    blr.post_precision = 1e12 * Eigen::MatrixXd::Identity(2, 2);
    blr.post_shape = 1e12;
    blr.post_scale = 1e12;
    redraw_conjugate(blr, b_count, 99);
    PosteriorModel model;
    model.params = std::move(blr);
    model.draw_count = b_count;
    model.dim = 1;
    model.seed = 99;
    return model;
}

}  // namespace

TEST_CASE("conjugate blr: dominant prior pins the posterior mean") {
    const Dataset ds = linear_dataset(50, 2.0, 0.1, 1);
    BlrPrior prior;
    prior.mean = Eigen::VectorXd::Zero(2);
    prior.mean << 3.0, -1.0;
    prior.precision = 1e10;
    const PosteriorModel model = fit_conjugate_blr(ds, prior, 10, 1);
    CHECK(model.conjugate().post_mean(0) == doctest::Approx(3.0).epsilon(1e-4));
    CHECK(model.conjugate().post_mean(1) == doctest::Approx(-1.0).epsilon(1e-4));
}

TEST_CASE("conjugate blr: posterior mean slope tracks the least-squares oracle") {
    const int n = 200;
    const Dataset ds = linear_dataset(n, 2.0, 1e-3, 2);
    const PosteriorModel model = fit_conjugate_blr(ds, BlrPrior{}, 10, 2);

    std::vector<std::vector<double>> x(n, std::vector<double>(1));
    std::vector<double> y(n);
    for (int i = 0; i < n; ++i) {
        x[static_cast<std::size_t>(i)][0] = ds.features(i, 0);
        y[static_cast<std::size_t>(i)] = ds.targets(i);
    }
    const auto beta = oracle::least_squares(x, y);
    CHECK(beta[1] == doctest::Approx(2.0).epsilon(0.01));  // oracle sanity
    CHECK(model.conjugate().post_mean(1) == doctest::Approx(beta[1]).epsilon(0.025));
    CHECK(std::abs(model.conjugate().post_mean(1) - 2.0) < 0.05);
}

TEST_CASE("conjugate blr: preconditions") {
    Dataset tiny;
    tiny.features.resize(1, 1);
    tiny.features << 1.0;
    tiny.targets.resize(1);
    tiny.targets << 1.0;
    CHECK_THROWS_WITH_AS(fit_conjugate_blr(tiny, BlrPrior{}, 10, 1),
                         "conjugate-blr: insufficient rows (need n_train > d)", Error);

    const Dataset ds = linear_dataset(20, 1.0, 0.1, 3);
    BlrPrior bad;
    bad.precision = 0.0;
    CHECK_THROWS_AS(fit_conjugate_blr(ds, bad, 10, 1), Error);
    bad = BlrPrior{};
    bad.ig_shape = -1.0;
    CHECK_THROWS_AS(fit_conjugate_blr(ds, bad, 10, 1), Error);
}

TEST_CASE("endpoint draws at a degenerate posterior hit the normal quantiles") {
    const PosteriorModel model = degenerate_model();
    Eigen::VectorXd x(1);
    x << 0.0;
    const EndpointDraws draws = endpoint_draws(model, x, Levels{0.1, 0.1});
    for (int b = 0; b < model.draw_count; ++b) {
        CHECK(draws.q_lower(b) == doctest::Approx(-1.6449).epsilon(1e-3));
        CHECK(draws.q_upper(b) == doctest::Approx(1.6449).epsilon(1e-3));
    }
}

TEST_CASE("endpoint draws: central interval narrows as alpha0 -> 1") {
    const Dataset ds = linear_dataset(100, 1.0, 0.5, 4);
    const PosteriorModel model = fit_conjugate_blr(ds, BlrPrior{}, 100, 4);
    Eigen::VectorXd x(1);
    x << 0.3;
    const EndpointDraws wide = endpoint_draws(model, x, Levels{0.1, 0.1});
    const EndpointDraws narrow = endpoint_draws(model, x, Levels{0.1, 0.99});
    CHECK((narrow.q_upper - narrow.q_lower).mean() <
          0.1 * (wide.q_upper - wide.q_lower).mean());
}

TEST_CASE("endpoint draws keep per-draw ordering and reject bad input") {
    const Dataset ds = linear_dataset(80, -1.0, 1.0, 5);
    const PosteriorModel model = fit_conjugate_blr(ds, BlrPrior{}, 500, 5);
    Eigen::VectorXd x(1);
    x << 2.0;
    const EndpointDraws draws = endpoint_draws(model, x, Levels{});
    for (int b = 0; b < 500; ++b) CHECK(draws.q_lower(b) <= draws.q_upper(b));

    Eigen::VectorXd bad(2);
    bad << 1.0, 2.0;
    CHECK_THROWS_WITH_AS(endpoint_draws(model, bad, Levels{}),
                         "endpoint_draws: covariate dimension mismatch", Error);
}

TEST_CASE("endpoint draws are a pure function of (model, x, levels)") {
    const Dataset ds = linear_dataset(60, 0.5, 0.3, 6);
    const PosteriorModel model = fit_conjugate_blr(ds, BlrPrior{}, 50, 6);
    Eigen::VectorXd x(1);
    x << -0.7;
    const EndpointDraws a = endpoint_draws(model, x, Levels{});
    const EndpointDraws b = endpoint_draws(model, x, Levels{});
    CHECK((a.q_lower - b.q_lower).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.q_upper - b.q_upper).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("posterior concentration: draw spread non-increasing in n_train") {
    Eigen::VectorXd x(1);
    x << 0.2;
    std::vector<double> spreads;
    for (int n : {100, 1000, 10000}) {
        const Dataset ds = linear_dataset(n, 2.0, 0.5, 7);
        const PosteriorModel model = fit_conjugate_blr(ds, BlrPrior{}, 400, 7);
        const EndpointDraws draws = endpoint_draws(model, x, Levels{});
        std::vector<double> lows(draws.q_lower.data(), draws.q_lower.data() + 400);
        spreads.push_back(sample_sd(lows));
    }
    CHECK(spreads[0] >= spreads[1]);
    CHECK(spreads[1] >= spreads[2]);
}

TEST_CASE("bootstrap ensemble: identical rows give zero endpoint spread") {
    Dataset ds;
    ds.features = Eigen::MatrixXd::Constant(50, 1, 1.5);
    ds.targets = Eigen::VectorXd::Constant(50, 3.0);
    const PosteriorModel model =
        fit_bootstrap_quantile_ensemble(ds, 2, Levels{0.1, 0.1}, EnsembleFitConfig{});
    Eigen::VectorXd x(1);
    x << 1.5;
    const EndpointDraws draws = endpoint_draws(model, x, Levels{0.1, 0.1});
    CHECK(draws.q_lower(0) == draws.q_lower(1));
    CHECK(draws.q_upper(0) == draws.q_upper(1));
}

TEST_CASE("bootstrap ensemble: symmetric noise around zero on flat features") {
    Rng rng(8);
    Dataset ds;
    ds.features = Eigen::MatrixXd::Zero(400, 1);
    ds.targets.resize(400);
    for (int i = 0; i < 400; ++i) ds.targets(i) = rng.normal();
    const PosteriorModel model =
        fit_bootstrap_quantile_ensemble(ds, 20, Levels{0.1, 0.1}, EnsembleFitConfig{});
    Eigen::VectorXd x(1);
    x << 0.0;
    const EndpointDraws draws = endpoint_draws(model, x, Levels{0.1, 0.1});
    std::vector<double> lo(draws.q_lower.data(), draws.q_lower.data() + 20);
    std::vector<double> hi(draws.q_upper.data(), draws.q_upper.data() + 20);
    CHECK(linear_quantile(lo, 0.5) < 0.0);
    CHECK(linear_quantile(hi, 0.5) > 0.0);
}

TEST_CASE("bootstrap ensemble: mean upper draw near the empirical 0.95 quantile") {
    Rng rng(9);
    const int n = 2000;
    Dataset ds;
    ds.features.resize(n, 1);
    ds.targets.resize(n);
    for (int i = 0; i < n; ++i) {
        ds.features(i, 0) = rng.uniform();  // uninformative
        ds.targets(i) = rng.normal();
    }
    EnsembleFitConfig config;
    config.epochs = 400;
    config.seed = 9;
    const PosteriorModel model =
        fit_bootstrap_quantile_ensemble(ds, 50, Levels{0.1, 0.1}, config);
    Eigen::VectorXd x(1);
    x << 0.5;
    const EndpointDraws draws = endpoint_draws(model, x, Levels{0.1, 0.1});

    std::vector<double> y(ds.targets.data(), ds.targets.data() + n);
    const double empirical = oracle::quantile(y, 0.95);
    CHECK(std::abs(draws.q_upper.mean() - empirical) < 0.15);
    CHECK(std::abs(draws.q_upper.mean() - 1.6449) < 0.15);
}

TEST_CASE("pinball fit is invariant to row permutation") {
    const Dataset ds = linear_dataset(120, 1.0, 0.5, 10);
    Eigen::MatrixXd permuted_x = ds.features;
    Eigen::VectorXd permuted_y = ds.targets;
    // Reverse is a permutation; full-batch descent must not care.
    permuted_x.colwise().reverseInPlace();
    permuted_y.reverseInPlace();

    const Eigen::VectorXd a = fit_linear_pinball(ds.features, ds.targets, 0.05, {});
    const Eigen::VectorXd b = fit_linear_pinball(permuted_x, permuted_y, 0.05, {});
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("pinball fit rejects NaN targets with the loss diagnostic") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(10, 1);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(10);
    y(3) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_WITH_AS(fit_linear_pinball(x, y, 0.5, {}),
                         "pinball: NaN loss during fit", Error);
}

TEST_CASE("ensemble refuses endpoint draws at a different alpha0") {
    const Dataset ds = linear_dataset(60, 1.0, 0.2, 11);
    const PosteriorModel model =
        fit_bootstrap_quantile_ensemble(ds, 5, Levels{0.1, 0.1}, EnsembleFitConfig{});
    Eigen::VectorXd x(1);
    x << 0.0;
    CHECK_THROWS_AS(endpoint_draws(model, x, Levels{0.1, 0.2}), Error);
}

TEST_CASE("model bundle round trip reproduces draws bit for bit") {
    const auto tmp = std::filesystem::temp_directory_path() / "credo_bundle_test.json";
    Eigen::VectorXd x(1);
    x << 0.4;

    SUBCASE("conjugate backend") {
        const Dataset ds = linear_dataset(100, 2.0, 0.3, 12);
        ModelBundle bundle;
        bundle.model = fit_conjugate_blr(ds, BlrPrior{}, 64, 12);
        bundle.standardizer = fit_standardizer(ds);
        bundle.levels = Levels{0.1, 0.1};
        save_bundle(bundle, tmp.string());
        const ModelBundle back = load_bundle(tmp.string());
        CHECK(back.model.backend_tag() == "conjugate-blr");
        const EndpointDraws a = endpoint_draws(bundle.model, x, bundle.levels);
        const EndpointDraws b = endpoint_draws(back.model, x, back.levels);
        CHECK((a.q_lower - b.q_lower).cwiseAbs().maxCoeff() == 0.0);
        CHECK((a.q_upper - b.q_upper).cwiseAbs().maxCoeff() == 0.0);
        CHECK(back.standardizer.means(0) == bundle.standardizer.means(0));
    }
    SUBCASE("ensemble backend") {
        const Dataset ds = linear_dataset(80, -0.5, 0.3, 13);
        ModelBundle bundle;
        bundle.model = fit_bootstrap_quantile_ensemble(ds, 8, Levels{0.1, 0.1}, {});
        bundle.standardizer = fit_standardizer(ds);
        bundle.levels = Levels{0.1, 0.1};
        save_bundle(bundle, tmp.string());
        const ModelBundle back = load_bundle(tmp.string());
        CHECK(back.model.backend_tag() == "bootstrap-ensemble");
        const EndpointDraws a = endpoint_draws(bundle.model, x, bundle.levels);
        const EndpointDraws b = endpoint_draws(back.model, x, back.levels);
        CHECK((a.q_lower - b.q_lower).cwiseAbs().maxCoeff() == 0.0);
    }
    std::remove(tmp.c_str());
}

TEST_CASE("predictive_interval_mass approximates the exact mass (degenerate case)") {
    const PosteriorModel model = degenerate_model(100);
    Eigen::VectorXd x(1);
    x << 0.0;
    // At beta = 0, sigma = 1 the interval [-1.6449, 1.6449] holds 0.90 mass.
    const MassEstimate est = predictive_interval_mass(model, x, -1.6449, 1.6449, 20000, 5);
    CHECK(est.value == doctest::Approx(0.90).epsilon(1e-3));
    CHECK(est.se < 1e-3);
}
