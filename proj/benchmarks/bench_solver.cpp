#include <benchmark/benchmark.h>

#include "ulch/solver.hpp"

using namespace ulch;

static void BM_Step(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    const int n = static_cast<int>(state.range(1));
    SimConfig cfg;
    cfg.grid = GridSpec(d, n, 6.0);
    cfg.potential = PotentialSpec::regular({0.0, -1.0, 0.0, 1.0});
    cfg.g = Field(cfg.grid, 0.0);
    cfg.dt = 1e-3;
    SimState st(0.0, build_initial_condition(cfg));
    st.dt_current = cfg.dt;
    for (auto _ : state) {
        st = step(std::move(st), cfg);
        benchmark::DoNotOptimize(st.u.values.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(cfg.grid.point_count()));
}
BENCHMARK(BM_Step)->Args({1, 1024})->Args({2, 128})->Args({3, 48});
