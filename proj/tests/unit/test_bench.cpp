#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "sdc/bench.hpp"

using namespace sdc;

namespace {

int count_lines(const std::string& path) {
    std::ifstream f(path);
    REQUIRE(f.good());
    int n = 0;
    std::string line;
    while (std::getline(f, line))
        if (!line.empty()) ++n;
    return n;
}

} // namespace

TEST_CASE("plan parsing") {
    auto plan = parse_plan_text("sizes = 6, 16\n"
                                "configs = direct, pv-bj-amg-amg\n"
                                "repetitions = 2\n"
                                "# comment\n"
                                "parallel = 0\n");
    CHECK(plan.sizes == std::vector<int>{6, 16});
    REQUIRE(plan.configs.size() == 2);
    CHECK(plan.configs[0] == SolverChoice::direct);
    CHECK(plan.configs[1] == SolverChoice::pv_bj_amg_amg);
    CHECK(plan.repetitions == 2);
    CHECK_FALSE(plan.parallel_cells);

    CHECK_THROWS_AS(parse_plan_text("configs = nonsense\nsizes = 4\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_plan_text("sizes = \n"), std::invalid_argument);

    // empty config list expands to every configuration
    auto full = parse_plan_text("sizes = 4\n");
    CHECK(full.resolved_configs().size() == solver_choice_count);
}

TEST_CASE("scenario files round-trip the config fields") {
    auto cfg = parse_scenario_text("cells_per_unit_square = 4\n"
                                   "permeability = 1e-6\n"
                                   "alpha_bj = 1.0\n"
                                   "kinematic_viscosity = 1e-6\n"
                                   "density = 1000\n"
                                   "dt = 2e5\n"
                                   "t_end = 50e5\n"
                                   "dp_max = 1e-9\n"
                                   "solver = td-bgs-uzawa-amg\n");
    CHECK(cfg.cells_per_unit_square == 4);
    CHECK(cfg.solver == SolverChoice::td_bgs_uzawa_amg);
    CHECK(cfg.n_timesteps() == 25);
    CHECK_THROWS_AS(parse_scenario_text("dt = -1\n"), std::invalid_argument);
}

TEST_CASE("zero pressure drop is trivial for every strategy") {
    for (auto choice : {SolverChoice::direct, SolverChoice::pv_bj_amg_amg,
                        SolverChoice::partitioned_direct}) {
        ScenarioConfig cfg;
        cfg.cells_per_unit_square = 2;
        cfg.dp_max = 0.0;
        cfg.solver = choice;
        cfg.t_end = 3 * cfg.dt;
        auto res = run_transient(cfg);
        REQUIRE(res.completed);
        REQUIRE(static_cast<int>(res.records.size()) == 3);
        for (const auto& rec : res.records) {
            CHECK(rec.converged);
            CHECK(rec.outer_iterations <= 1);
        }
        for (double v : res.final_solution) CHECK(v == 0.0);
    }
}

TEST_CASE("direct transient run keeps residuals at direct-solve scale") {
    ScenarioConfig cfg;
    cfg.cells_per_unit_square = 2;
    cfg.solver = SolverChoice::direct;
    auto res = run_transient(cfg);
    REQUIRE(res.completed);
    CHECK(static_cast<int>(res.records.size()) == cfg.n_timesteps());
    double bscale = cfg.dp_max; // boundary data sets the rhs scale
    for (const auto& rec : res.records) {
        CHECK(rec.converged);
        CHECK(rec.final_residual <= 1e-12 * bscale);
    }
}

TEST_CASE("transient runs are deterministic") {
    ScenarioConfig cfg;
    cfg.cells_per_unit_square = 4;
    cfg.solver = SolverChoice::pv_bgs_amg_amg;
    cfg.t_end = 4 * cfg.dt;
    auto a = run_transient(cfg);
    auto b = run_transient(cfg);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].outer_iterations == b.records[i].outer_iterations);
        CHECK(a.records[i].final_residual == b.records[i].final_residual);
    }
    CHECK(a.final_solution == b.final_solution);
}

TEST_CASE("plan output has one row per cell plus fill-in rows") {
    BenchmarkPlan plan;
    plan.sizes = {2, 3};
    plan.configs = {SolverChoice::direct, SolverChoice::partitioned_direct};
    plan.repetitions = 1;
    plan.out_dir = (std::filesystem::temp_directory_path() / "sdc_plan_test").string();
    ScenarioConfig base;
    base.t_end = 2 * base.dt; // keep the unit test quick

    auto out = run_plan(plan, base);
    CHECK(out.rows.size() == 4);
    CHECK(count_lines(out.runtime_csv_path) == 5);  // header + 4 rows
    CHECK(count_lines(out.fillin_csv_path) == 3);   // header + 2 sizes
    for (const auto& row : out.rows) {
        CHECK(row.converged);
        CHECK(row.total_dof > 0);
        CHECK(row.timestep == 2);
    }
    std::filesystem::remove_all(plan.out_dir);
}

TEST_CASE("loglog slope of a power law recovers the exponent") {
    std::vector<double> x{100, 400, 1600};
    std::vector<double> y;
    for (double v : x) y.push_back(3.0 * std::pow(v, 1.7));
    CHECK(loglog_slope(x, y) == doctest::Approx(1.7).epsilon(1e-12));
}

TEST_CASE("verify reports cross-method agreement at size 2") {
    auto outcome = verify_equivalence(2);
    for (const auto& line : outcome.lines) CHECK(!line.empty());
    CHECK(outcome.pass);
}
