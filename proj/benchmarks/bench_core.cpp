#include <benchmark/benchmark.h>

#include "kinkscan/estimator.hpp"
#include "kinkscan/lrd.hpp"
#include "kinkscan/rng.hpp"
#include "kinkscan/scenario.hpp"

namespace {

using namespace kinkscan;

Scenario bench_scenario() {
    Scenario s;
    s.mu.kinks = {{0.5, 3.0}};
    s.sigma.value = 0.1;
    s.design.assumption = DesignAssumption::A;
    s.design.error_process.alpha = 0.6;
    s.design.error_process.truncation = kAutoTruncation;
    return s;
}

void LrdSimulateDirect(benchmark::State& state) {
    LinearProcessSpec spec;
    spec.alpha = 0.6;
    spec.truncation = state.range(0);
    for (auto _ : state) {
        Rng rng(42);
        auto series = simulate_lrd(spec, 1024, rng);
        benchmark::DoNotOptimize(series.values.data());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(LrdSimulateDirect)->RangeMultiplier(4)->Range(256, 16384)->Complexity();

void LrdSimulateLong(benchmark::State& state) {
    LinearProcessSpec spec;
    spec.alpha = 0.6;
    spec.truncation = state.range(0);
    for (auto _ : state) {
        Rng rng(42);
        auto series = simulate_lrd(spec, static_cast<std::size_t>(state.range(0)), rng);
        benchmark::DoNotOptimize(series.values.data());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(LrdSimulateLong)->RangeMultiplier(4)->Range(4096, 65536)->Complexity();

void KappaProfileDetect(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    Dataset data = generate_dataset(bench_scenario(), n, 7, false);
    EstimatorConfig config;
    for (auto _ : state) {
        auto profile = detection_profile(data, config);
        benchmark::DoNotOptimize(profile.kappa.data());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(KappaProfileDetect)->RangeMultiplier(4)->Range(1024, 16384)->Complexity();

void EstimatePipeline(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    Dataset data = generate_dataset(bench_scenario(), n, 7, false);
    EstimatorConfig config;
    for (auto _ : state) {
        auto estimates = estimate(data, config);
        benchmark::DoNotOptimize(estimates.data());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(EstimatePipeline)->RangeMultiplier(4)->Range(1024, 16384)->Complexity();

} // namespace

BENCHMARK_MAIN();
