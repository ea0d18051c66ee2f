#include <benchmark/benchmark.h>

#include <numbers>

#include "nlmc/certify.hpp"
#include "nlmc/semigroup.hpp"
#include "nlmc/stationary.hpp"

using namespace nlmc;

static void BM_evolve_oscillator(benchmark::State& state) {
    const auto spec = corpus("oscillator");
    const Distribution m0{0.2, 0.4, 0.4};
    for (auto _ : state) benchmark::DoNotOptimize(evolve(spec, m0, 2 * std::numbers::pi));
}
BENCHMARK(BM_evolve_oscillator)->Unit(benchmark::kMillisecond);

static void BM_evolve_consumer(benchmark::State& state) {
    const auto spec = corpus("consumer");
    for (auto _ : state) benchmark::DoNotOptimize(evolve(spec, Distribution{0.8, 0.1, 0.1}, 100.0));
}
BENCHMARK(BM_evolve_consumer)->Unit(benchmark::kMillisecond);

static void BM_frozen_stationary(benchmark::State& state) {
    const auto spec = corpus("consumer");
    const auto m = Distribution::uniform(3);
    for (auto _ : state) benchmark::DoNotOptimize(frozen_stationary(spec, m));
}
BENCHMARK(BM_frozen_stationary);

static void BM_find_invariant_bistable(benchmark::State& state) {
    const auto spec = corpus("bistable");
    const SimplexGrid grid(2, static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(find_invariant(spec, grid));
}
BENCHMARK(BM_find_invariant_bistable)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

static void BM_certify_unique_consumer(benchmark::State& state) {
    const auto spec = corpus("consumer");
    const SimplexGrid grid(3, static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(certify_unique(spec, grid));
}
BENCHMARK(BM_certify_unique_consumer)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

static void BM_certify_ergodic_3_consumer(benchmark::State& state) {
    const auto spec = corpus("consumer");
    const SimplexGrid grid(3, 40);
    for (auto _ : state) benchmark::DoNotOptimize(certify_ergodic_3(spec, grid));
}
BENCHMARK(BM_certify_ergodic_3_consumer)->Unit(benchmark::kMillisecond);

static void BM_sample_path_bistable(benchmark::State& state) {
    const PathSampler sampler(corpus("bistable"), Distribution{0.9, 0.1}, 50.0);
    std::uint64_t seed = 0;
    for (auto _ : state) benchmark::DoNotOptimize(sampler.sample(std::nullopt, seed++));
}
BENCHMARK(BM_sample_path_bistable)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
