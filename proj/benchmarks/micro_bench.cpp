/// @file micro_bench.cpp
/// @brief Microbenchmarks for the solver building blocks.

#include <benchmark/benchmark.h>

#include "sdc/assembly.hpp"
#include "sdc/bench.hpp"
#include "sdc/lu.hpp"
#include "sdc/precond.hpp"

namespace {

sdc::CoupledSystem make_system(int size) {
    sdc::ScenarioConfig cfg;
    cfg.cells_per_unit_square = size;
    auto grid = sdc::build_grid(cfg);
    return sdc::assemble_monolithic(grid, cfg, {}, 10 * cfg.dt);
}

void bm_spmv(benchmark::State& state) {
    auto sys = make_system(static_cast<int>(state.range(0)));
    std::vector<double> x(sys.n_total(), 1.0), y(sys.n_total());
    for (auto _ : state) {
        sdc::spmv(sys.matrix, x, y);
        benchmark::DoNotOptimize(y.data());
    }
    state.SetComplexityN(sys.n_total());
}
BENCHMARK(bm_spmv)->Arg(16)->Arg(50)->Complexity();

void bm_assemble_monolithic(benchmark::State& state) {
    sdc::ScenarioConfig cfg;
    cfg.cells_per_unit_square = static_cast<int>(state.range(0));
    auto grid = sdc::build_grid(cfg);
    for (auto _ : state) {
        auto sys = sdc::assemble_monolithic(grid, cfg, {}, cfg.dt);
        benchmark::DoNotOptimize(sys.matrix.values.data());
    }
}
BENCHMARK(bm_assemble_monolithic)->Arg(16)->Arg(50);

void bm_banded_lu(benchmark::State& state) {
    auto sys = make_system(static_cast<int>(state.range(0)));
    auto pa = sdc::permute_symmetric(sys.matrix, sys.grid.banded_ordering());
    for (auto _ : state) {
        auto f = sdc::lu_factor(pa);
        benchmark::DoNotOptimize(f.fill_stats.nnz_factors);
    }
}
BENCHMARK(bm_banded_lu)->Arg(16)->Arg(50)->Unit(benchmark::kMillisecond);

void bm_amg_vcycle(benchmark::State& state) {
    auto sys = make_system(static_cast<int>(state.range(0)));
    auto vblk = sdc::submatrix(sys.matrix, 0, sys.pv_v.size(), 0, sys.pv_v.size());
    sdc::AmgOptions opts;
    opts.components.assign(vblk.n_rows, 0);
    for (int k = sys.grid.ff.n_u(); k < vblk.n_rows; ++k) opts.components[k] = 1;
    auto h = sdc::amg_setup(vblk, opts);
    std::vector<double> r(vblk.n_rows, 1.0);
    for (auto _ : state) {
        auto z = sdc::amg_vcycle_apply(h, r);
        benchmark::DoNotOptimize(z.data());
    }
}
BENCHMARK(bm_amg_vcycle)->Arg(16)->Arg(50);

void bm_ilu0_apply(benchmark::State& state) {
    auto sys = make_system(static_cast<int>(state.range(0)));
    auto d = sdc::ground_dof(sdc::submatrix(sys.matrix, sys.td_pm.begin, sys.td_pm.end,
                                            sys.td_pm.begin, sys.td_pm.end));
    sdc::Ilu0Preconditioner ilu(d);
    std::vector<double> r(d.n_rows, 1.0), z(d.n_rows);
    for (auto _ : state) {
        ilu.apply(r, z);
        benchmark::DoNotOptimize(z.data());
    }
}
BENCHMARK(bm_ilu0_apply)->Arg(16)->Arg(50);

void bm_monolithic_step(benchmark::State& state) {
    sdc::ScenarioConfig cfg;
    cfg.cells_per_unit_square = 16;
    cfg.solver = sdc::solver_choice_at(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        sdc::MonolithicDriver driver(cfg, cfg.solver);
        auto st = driver.advance(cfg.dt);
        benchmark::DoNotOptimize(st.solution.data());
    }
}
BENCHMARK(bm_monolithic_step)->Arg(0)->Arg(4)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
