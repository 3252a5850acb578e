#include <benchmark/benchmark.h>

#include "credo/evaluation.hpp"
#include "credo/stats.hpp"

namespace {

void BM_LofScores(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    credo::Rng rng(4);
    Eigen::MatrixXd pts(n, 2);
    for (int i = 0; i < n; ++i) {
        pts(i, 0) = rng.normal();
        pts(i, 1) = rng.normal();
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(credo::lof_scores(pts, 15));
    }
}
BENCHMARK(BM_LofScores)->Arg(100)->Arg(400)->Arg(1000);

void BM_Smis(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    credo::Rng rng(5);
    std::vector<credo::PredictionInterval> intervals(static_cast<std::size_t>(n));
    std::vector<double> targets(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double c = rng.normal();
        intervals[static_cast<std::size_t>(i)].lower = c - 1.0;
        intervals[static_cast<std::size_t>(i)].upper = c + 1.0;
        targets[static_cast<std::size_t>(i)] = rng.normal();
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(credo::smis(intervals, targets, 0.1));
    }
}
BENCHMARK(BM_Smis)->Arg(1000)->Arg(10000);

}  // namespace
