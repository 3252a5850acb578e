#include <benchmark/benchmark.h>

#include "credo/conformal.hpp"
#include "credo/dataset.hpp"

namespace {

void BM_CredoPipeline(benchmark::State& state) {
    const int b = static_cast<int>(state.range(0));
    const credo::Dataset source = credo::generate_scenario(1, 1000, 1);
    const credo::DataSplit parts = credo::split(source, {}, 1);
    const credo::Standardizer st = credo::fit_standardizer(parts.train);
    credo::Dataset train = parts.train, cal = parts.calibration;
    train.features = st.apply(parts.train.features);
    cal.features = st.apply(parts.calibration.features);
    const credo::PosteriorModel model =
        credo::fit_conjugate_blr(train, credo::BlrPrior{}, b, 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(credo::credo_pipeline(
            model, cal, credo::Levels{0.1, 0.1}, credo::GammaSource::fixed(0.425)));
    }
}
BENCHMARK(BM_CredoPipeline)->Arg(100)->Arg(1000);

void BM_EndpointDraws(benchmark::State& state) {
    const credo::Dataset source = credo::generate_scenario(1, 1000, 2);
    const credo::PosteriorModel model = credo::fit_conjugate_blr(
        source, credo::BlrPrior{}, static_cast<int>(state.range(0)), 2);
    Eigen::VectorXd x(1);
    x << 0.5;
    for (auto _ : state) {
        benchmark::DoNotOptimize(credo::endpoint_draws(model, x, credo::Levels{0.1, 0.1}));
    }
}
BENCHMARK(BM_EndpointDraws)->Arg(100)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
