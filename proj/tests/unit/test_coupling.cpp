#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dense_oracles.hpp"
#include "sdc/coupling.hpp"
#include "sdc/lu.hpp"

using namespace sdc;

namespace {

ScenarioConfig scenario(int n) {
    ScenarioConfig cfg;
    cfg.cells_per_unit_square = n;
    return cfg;
}

// independent reference path: monolithic assembly plus banded direct solve
struct MonolithicReference {
    ScenarioConfig cfg;
    StaggeredGrid grid;
    std::vector<int> perm;
    std::vector<double> v_prev;
    std::vector<double> solution;

    explicit MonolithicReference(const ScenarioConfig& c)
        : cfg(c), grid(build_grid(c)), perm(grid.banded_ordering()),
          v_prev(grid.n_vel(), 0.0) {}

    const CoupledSystem step(double t) {
        static CoupledSystem sys;
        sys = assemble_monolithic(grid, cfg, v_prev, t);
        auto pa = permute_symmetric(sys.matrix, perm);
        std::vector<double> pb(sys.rhs.size());
        for (std::size_t k = 0; k < perm.size(); ++k) pb[k] = sys.rhs[perm[k]];
        auto px = lu_solve(lu_factor(pa), pb);
        solution.assign(px.size(), 0.0);
        for (std::size_t k = 0; k < perm.size(); ++k) solution[perm[k]] = px[k];
        v_prev.assign(solution.begin(), solution.begin() + grid.n_vel());
        return sys;
    }
};

double rel_diff(std::span<const double> a, std::span<const double> b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - b[i]) * (a[i] - b[i]);
        den += b[i] * b[i];
    }
    return std::sqrt(num) / std::sqrt(den);
}

} // namespace

TEST_CASE("solve_ff with zero data returns zero flow and zero traces") {
    CouplingDriver d(scenario(4));
    d.begin_timestep(0.0); // inflow ramp starts at zero
    auto ff = d.solve_ff(std::vector<double>(d.interface_dim(), 0.0));
    for (double v : ff.solution) CHECK(v == 0.0);
    for (double v : ff.trace) CHECK(v == 0.0);

    // trace is definitionally the stress trace of the subdomain solution
    auto recomputed = stokes_pressure_trace(d.grid().ff, 1e-3, ff.solution);
    CHECK(ff.trace == recomputed);
}

TEST_CASE("solve_pm with constant interface pressure gives a constant field") {
    CouplingDriver d(scenario(4));
    d.begin_timestep(0.0);
    const double c = 4.2e-10;
    auto pm = d.solve_pm(std::vector<double>(d.interface_dim(), c));
    for (double p : pm.solution) CHECK(p == doctest::Approx(c).epsilon(1e-12));
    for (double v : pm.trace) CHECK(std::abs(v) < 1e-15 * std::abs(c) + 1e-25);
}

TEST_CASE("solve_pm matches a hand-built TPFA system on the 2x2 grid") {
    ScenarioConfig cfg = scenario(2);
    CouplingDriver d(cfg);
    d.begin_timestep(0.0);
    const double t = cfg.permeability / cfg.dynamic_viscosity();
    const double h = 0.5;
    std::vector<double> p_gamma{1.0e-9, 3.0e-9};

    // cells: 0=(0,0) 1=(1,0) 2=(0,1) 3=(1,1); rows: side fluxes + top ghosts
    oracle::DenseMatrix a(4, 4);
    std::vector<double> b(4, 0.0);
    auto couple = [&](int i, int j) {
        a(i, i) += t;
        a(i, j) -= t;
    };
    couple(0, 1); couple(0, 2);
    couple(1, 0); couple(1, 3);
    couple(2, 3); couple(2, 0);
    couple(3, 2); couple(3, 1);
    a(2, 2) += 2 * t; b[2] = 2 * t * p_gamma[0];
    a(3, 3) += 2 * t; b[3] = 2 * t * p_gamma[1];
    auto pref = oracle::solve(a, b);

    auto pm = d.solve_pm(p_gamma);
    for (int k = 0; k < 4; ++k)
        CHECK(pm.solution[k] == doctest::Approx(pref[k]).epsilon(1e-12));
    for (int i = 0; i < 2; ++i) {
        const double expected = 2.0 * t * (pref[2 + i] - p_gamma[i]) / h;
        CHECK(pm.trace[i] == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("fixed point residual vanishes with zero forcing and is affine") {
    CouplingDriver d(scenario(3));
    d.begin_timestep(0.0);
    auto r0 = d.fixed_point_residual(std::vector<double>(d.interface_dim(), 0.0));
    for (double v : r0) CHECK(v == 0.0);

    // affinity under convex combinations at a nonzero time level
    d.begin_timestep(6e5);
    const int m = d.interface_dim();
    auto v1 = oracle::random_vector(m, 5);
    auto v2 = oracle::random_vector(m, 6);
    const double al = 0.3;
    std::vector<double> combo(m);
    for (int i = 0; i < m; ++i) combo[i] = al * v1[i] + (1 - al) * v2[i];
    auto r1 = d.fixed_point_residual(v1);
    auto r2 = d.fixed_point_residual(v2);
    auto rc = d.fixed_point_residual(combo);
    double scale_ref = 0.0;
    for (int i = 0; i < m; ++i) scale_ref = std::max(scale_ref, std::abs(rc[i]));
    for (int i = 0; i < m; ++i)
        CHECK(std::abs(rc[i] - al * r1[i] - (1 - al) * r2[i]) <= 1e-10 * scale_ref);
}

TEST_CASE("fixed point residual is small at the monolithic trace") {
    ScenarioConfig cfg = scenario(4);
    MonolithicReference ref(cfg);
    auto sys = ref.step(cfg.dt);
    auto traces = extract_interface_traces(sys, ref.solution);

    CouplingDriver d(cfg);
    d.begin_timestep(cfg.dt);
    auto r = d.fixed_point_residual(traces.v_pm_gamma);
    double vmax = 0.0;
    for (double v : traces.v_pm_gamma) vmax = std::max(vmax, std::abs(v));
    for (double v : r) CHECK(std::abs(v) <= 1e-8 * vmax);
}

TEST_CASE("iqn update is the secant method on a scalar interface") {
    // scalar affine residual R(v) = a v + b with operator view S(v) = v + R(v)
    const double a = -0.6, b = 0.31;
    auto big_r = [&](double v) { return a * v + b; };

    const double v0 = 0.0;
    const double r_0 = big_r(v0);
    const double vt1 = v0 + r_0; // S(v0)
    const double v1 = v0 + 0.5 * r_0;
    const double r_1 = big_r(v1);
    const double vt2 = v1 + r_1;

    IqnIlsHistory hist(10, 1e-13);
    hist.record(std::vector<double>{r_0}, std::vector<double>{vt1});
    auto v2 = iqn_ils_update(hist, std::vector<double>{v1}, std::vector<double>{r_1},
                             std::vector<double>{vt2});

    const double secant = v1 - r_1 * (v1 - v0) / (r_1 - r_0);
    CHECK(v2[0] == doctest::Approx(secant).epsilon(1e-13));

    // affine residual: the secant step is exact
    CHECK(big_r(v2[0]) == doctest::Approx(0.0).epsilon(1e-13));
}

TEST_CASE("iqn update keeps the iterate fixed at a root") {
    IqnIlsHistory hist(10, 1e-13);
    hist.record(std::vector<double>{0.2, -0.1}, std::vector<double>{1.2, 0.9});
    auto v = iqn_ils_update(hist, std::vector<double>{1.0, 1.0},
                            std::vector<double>{0.0, 0.0}, std::vector<double>{1.0, 1.0});
    CHECK(v[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(v[1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("iqn update without history is a contract violation") {
    IqnIlsHistory hist(10, 1e-13);
    CHECK_THROWS_AS(iqn_ils_update(hist, std::vector<double>{0.0}, std::vector<double>{1.0},
                                   std::vector<double>{1.0}),
                    std::invalid_argument);
}

TEST_CASE("history column count never exceeds the interface dimension") {
    const int m = 3;
    IqnIlsHistory hist(50, 1e-13);
    auto sample = [&](unsigned seed) { return oracle::random_vector(m, seed); };
    hist.record(sample(1), sample(2));
    for (unsigned k = 0; k < 8; ++k) {
        hist.push(sample(3 + 2 * k), sample(4 + 2 * k));
        CHECK(hist.columns() <= m);
    }
}

TEST_CASE("zero pressure drop converges in one iteration to zero") {
    ScenarioConfig cfg = scenario(3);
    cfg.dp_max = 0.0;
    CouplingDriver d(cfg);
    auto res = d.coupled_timestep(cfg.dt);
    CHECK(res.converged);
    CHECK(res.coupling_iterations == 1);
    for (double v : res.solution) CHECK(v == 0.0);
}

TEST_CASE("partitioned solution matches the monolithic solve") {
    for (int n : {2, 6}) {
        ScenarioConfig cfg = scenario(n);
        MonolithicReference ref(cfg);
        CouplingDriver d(cfg);
        const int steps = 3;
        CouplingDriver::TimestepResult last;
        for (int s = 1; s <= steps; ++s) {
            ref.step(s * cfg.dt);
            last = d.coupled_timestep(s * cfg.dt);
            REQUIRE(last.converged);
        }
        CHECK(rel_diff(last.solution, ref.solution) <= 1e-6);
    }
}

TEST_CASE("affine exactness bounds the coupling iteration count") {
    for (int n : {2, 6}) {
        ScenarioConfig cfg = scenario(n);
        CouplingDriver d(cfg);
        auto res = d.coupled_timestep(cfg.dt);
        REQUIRE(res.converged);
        CHECK(res.coupling_iterations <= n + 2);
    }
}

TEST_CASE("iteration count is stable across converged inner solvers") {
    ScenarioConfig cfg = scenario(6);
    CouplingDriver direct(cfg);
    SubdomainSolvers iter;
    iter.stokes = SubdomainSolvers::Stokes::pd_gmres_uzawa_inexact;
    iter.darcy = SubdomainSolvers::Darcy::bicgstab_amg;
    CouplingDriver iterative(cfg, {}, iter);
    for (int s = 1; s <= 2; ++s) {
        auto a = direct.coupled_timestep(s * cfg.dt);
        auto b = iterative.coupled_timestep(s * cfg.dt);
        REQUIRE(a.converged);
        REQUIRE(b.converged);
        CHECK(std::abs(a.coupling_iterations - b.coupling_iterations) <= 1);
        CHECK(b.max_residual_ratio <= 10.0 + 1e-9);
    }
}

TEST_CASE("iqn-ils needs no more iterations than picard") {
    ScenarioConfig cfg = scenario(16);
    CouplingConfig picard;
    picard.acceleration = CouplingConfig::Acceleration::picard;
    picard.max_coupling_iterations = 400;
    CouplingDriver dp(cfg, picard);
    CouplingDriver di(cfg); // iqn-ils default
    int picard_total = 0, iqn_total = 0;
    for (int s = 1; s <= 2; ++s) {
        auto a = dp.coupled_timestep(s * cfg.dt);
        auto b = di.coupled_timestep(s * cfg.dt);
        REQUIRE(a.converged);
        REQUIRE(b.converged);
        picard_total += a.coupling_iterations;
        iqn_total += b.coupling_iterations;
    }
    CHECK(iqn_total <= picard_total);
}
