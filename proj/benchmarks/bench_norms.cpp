#include <benchmark/benchmark.h>

#include "ulch/norms.hpp"

using namespace ulch;

static void BM_UniformlyLocalL2(benchmark::State& state) {
    GridSpec g(3, static_cast<int>(state.range(0)), 4.0);
    Field f = random_field(g, 3);
    for (auto _ : state) {
        auto v = lp_uniformly_local(f, 2.0, 1.0, 0);
        benchmark::DoNotOptimize(v.value);
    }
}
BENCHMARK(BM_UniformlyLocalL2)->Arg(32)->Arg(48);

static void BM_WeightedL2(benchmark::State& state) {
    GridSpec g(3, static_cast<int>(state.range(0)), 4.0);
    Field f = random_field(g, 4);
    WeightFn w{WeightKind::polynomial, 5.0, 0.1, {0.0, 0.0, 0.0}};
    for (auto _ : state) {
        auto v = lp_weighted(f, w, 2.0);
        benchmark::DoNotOptimize(v.value);
    }
}
BENCHMARK(BM_WeightedL2)->Arg(32)->Arg(48);
