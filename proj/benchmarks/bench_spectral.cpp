#include <benchmark/benchmark.h>

#include "ulch/grid.hpp"
#include "ulch/norms.hpp"

using namespace ulch;

static void BM_Laplacian(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    const int n = static_cast<int>(state.range(1));
    GridSpec g(d, n, 4.0);
    Field f = random_field(g, 1);
    for (auto _ : state) {
        Field lap = laplacian(f);
        benchmark::DoNotOptimize(lap.values.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(g.point_count()));
}
BENCHMARK(BM_Laplacian)->Args({1, 1024})->Args({2, 128})->Args({3, 48});

static void BM_HelmholtzInverse(benchmark::State& state) {
    GridSpec g(3, static_cast<int>(state.range(0)), 4.0);
    Field f = random_field(g, 2);
    for (auto _ : state) {
        Field w = helmholtz_inverse(f);
        benchmark::DoNotOptimize(w.values.data());
    }
}
BENCHMARK(BM_HelmholtzInverse)->Arg(32)->Arg(48);
