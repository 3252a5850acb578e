#include <benchmark/benchmark.h>

#include "credo/envelope.hpp"
#include "credo/stats.hpp"

namespace {

credo::EndpointDraws random_draws(int b) {
    credo::Rng rng(1);
    credo::EndpointDraws draws;
    draws.q_lower.resize(b);
    draws.q_upper.resize(b);
    draws.x = Eigen::VectorXd::Zero(1);
    for (int i = 0; i < b; ++i) {
        const double c = rng.normal();
        draws.q_lower(i) = c - 1.0;
        draws.q_upper(i) = c + 1.0;
    }
    return draws;
}

void BM_TrimmedEnvelope(benchmark::State& state) {
    const auto draws = random_draws(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(credo::trimmed_envelope(draws, 0.425));
    }
}
BENCHMARK(BM_TrimmedEnvelope)->Arg(100)->Arg(1000)->Arg(10000);

void BM_ScarcityScore(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    credo::Rng rng(2);
    Eigen::MatrixXd train(n, 1);
    for (int i = 0; i < n; ++i) train(i, 0) = rng.normal();
    const credo::ScarcityRefs refs = credo::fit_scarcity_refs(train, 25);
    Eigen::VectorXd x(1);
    x << 0.3;
    for (auto _ : state) {
        benchmark::DoNotOptimize(credo::scarcity_score(x, refs));
    }
}
BENCHMARK(BM_ScarcityScore)->Arg(500)->Arg(2000)->Arg(10000);

void BM_FitScarcityRefs(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    credo::Rng rng(3);
    Eigen::MatrixXd train(n, 1);
    for (int i = 0; i < n; ++i) train(i, 0) = rng.normal();
    for (auto _ : state) {
        benchmark::DoNotOptimize(credo::fit_scarcity_refs(train, 25));
    }
}
BENCHMARK(BM_FitScarcityRefs)->Arg(500)->Arg(2000);

}  // namespace
