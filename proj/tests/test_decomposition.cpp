#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "credo/decomposition.hpp"
#include "credo/envelope.hpp"
#include "credo/errors.hpp"
#include "credo/stats.hpp"

using namespace credo;

namespace {

EndpointDraws make_draws(std::vector<double> lo, std::vector<double> hi) {
    EndpointDraws draws;
    draws.q_lower = Eigen::Map<Eigen::VectorXd>(lo.data(), static_cast<Eigen::Index>(lo.size()));
    draws.q_upper = Eigen::Map<Eigen::VectorXd>(hi.data(), static_cast<Eigen::Index>(hi.size()));
    draws.x = Eigen::VectorXd::Zero(1);
    return draws;
}

}  // namespace

TEST_CASE("aleatoric width: hand mean of interval lengths") {
    CHECK(aleatoric_width(make_draws({0, 0}, {1, 3})) == doctest::Approx(2.0));
    CHECK(aleatoric_width(make_draws({2, 2, 2}, {5, 5, 5})) == doctest::Approx(3.0));
    // Permutation leaves the mean alone.
    CHECK(aleatoric_width(make_draws({0, 0}, {3, 1})) == doctest::Approx(2.0));
}

TEST_CASE("decompose: chained hand computation") {
    // B=2, intervals [0,1] and [0,3], tiny gamma keeps the full spread:
    // envelope [0,3], U_A = 2, U_E = 1; tau = 0.5 -> slack 1, total 4.
    const EndpointDraws draws = make_draws({0, 0}, {1, 3});
    const Envelope env = trimmed_envelope(draws, 0.01);
    CHECK(env.lower == doctest::Approx(0.0));
    CHECK(env.upper == doctest::Approx(3.0).epsilon(0.01));

    const Decomposition d = decompose(env, draws, 0.5);
    CHECK(d.aleatoric == doctest::Approx(2.0));
    CHECK(d.epistemic == doctest::Approx(env.upper - env.lower - 2.0));
    CHECK(d.slack == doctest::Approx(1.0));
    CHECK(d.total == doctest::Approx(d.aleatoric + d.epistemic + d.slack));
    CHECK_FALSE(d.epistemic_negative);
}

TEST_CASE("decompose: zero posterior spread has exactly zero epistemic") {
    const EndpointDraws draws = make_draws({1, 1, 1, 1}, {4, 4, 4, 4});
    const Envelope env = trimmed_envelope(draws, 0.425);
    const Decomposition d = decompose(env, draws, 0.2);
    CHECK(d.epistemic == 0.0);
    CHECK(d.aleatoric == doctest::Approx(3.0));
}

TEST_CASE("decompose: heavy trim can push epistemic negative, flagged not clamped") {
    // Right-skewed draw lengths: the mean length exceeds the near-median
    // trimmed envelope width.
    Rng rng(83);
    std::vector<double> lo(500), hi(500);
    for (std::size_t i = 0; i < lo.size(); ++i) {
        const double w = std::exp(2.0 * rng.normal());
        lo[i] = -w;
        hi[i] = w;
    }
    const EndpointDraws draws = make_draws(lo, hi);
    const Envelope env = trimmed_envelope(draws, 0.99);
    const Decomposition d = decompose(env, draws, 0.1);
    CHECK(d.epistemic < 0.0);
    CHECK(d.epistemic_negative);
    CHECK(d.total == doctest::Approx(d.aleatoric + d.epistemic + d.slack).epsilon(1e-12));
}

TEST_CASE("decompose: infinite tau_hat is a distinct error") {
    const EndpointDraws draws = make_draws({0, 0}, {1, 3});
    const Envelope env = trimmed_envelope(draws, 0.5);
    CHECK_THROWS_WITH_AS(decompose(env, draws, std::numeric_limits<double>::infinity()),
                         "decompose: undefined for infinite tau_hat", Error);
}

TEST_CASE("additivity holds to 1e-9 and epistemic is non-increasing in gamma") {
    Rng rng(89);
    std::vector<double> lo(300), hi(300);
    for (std::size_t i = 0; i < lo.size(); ++i) {
        const double c = rng.normal();
        lo[i] = c - 0.5 - std::abs(rng.normal());
        hi[i] = c + 0.5 + std::abs(rng.normal());
    }
    const EndpointDraws draws = make_draws(lo, hi);
    double prev_epistemic = std::numeric_limits<double>::infinity();
    for (double gamma = 0.05; gamma < 1.0; gamma += 0.09) {
        const Envelope env = trimmed_envelope(draws, gamma);
        const Decomposition d = decompose(env, draws, 0.37);
        CHECK(std::abs(d.total - (d.aleatoric + d.epistemic + d.slack)) < 1e-9);
        const double final_width = (env.upper + 0.37) - (env.lower - 0.37);
        CHECK(d.total == doctest::Approx(final_width).epsilon(1e-12));
        CHECK(d.epistemic <= prev_epistemic);
        prev_epistemic = d.epistemic;
    }
}

TEST_CASE("epistemic fraction excludes the slack") {
    Decomposition d;
    d.aleatoric = 3.0;
    d.epistemic = 1.0;
    d.slack = 100.0;
    CHECK(epistemic_fraction(d) == doctest::Approx(0.25));
}
