/// @file bench.hpp
/// @brief Benchmark harness: transient runs across grid sizes for every
/// solver configuration, with runtime, iteration, residual, and fill-in
/// reports.

#ifndef SDC_BENCH_HPP
#define SDC_BENCH_HPP

#include <iosfwd>
#include <string>

#include "sdc/coupling.hpp"

namespace sdc {

struct BenchmarkPlan {
    std::vector<int> sizes{6, 16, 50};
    std::vector<SolverChoice> configs; // empty means every configuration
    int repetitions = 3;
    std::string out_dir = ".";
    bool parallel_cells = false; // opt-in worker threads; timings flagged contended

    std::vector<SolverChoice> resolved_configs() const;
};

/// Plain-text key-value plan: sizes = 6,16,50 / configs = name,name,... /
/// repetitions = 3 / parallel = 0|1.
BenchmarkPlan parse_plan_file(const std::string& path);
BenchmarkPlan parse_plan_text(const std::string& text);

struct BenchRecord {
    std::string config;
    int size = 0;
    int total_dof = 0;
    int timestep = 0;
    double wall_seconds = 0.0;
    int outer_iterations = 0;
    int coupling_iterations = 0; // partitioned runs only
    double final_residual = 0.0;
    double direct_residual = 0.0; // stopping-rule reference on the same system
    double residual_ratio = 0.0;  // worst final/direct ratio of this step
    std::int64_t aux_memory_doubles = 0;
    bool converged = false;
    bool contended = false;
};

/// Monolithic solution path: direct factorization or right-preconditioned
/// PD-GMRES with one of the four block preconditioners. The stopping
/// tolerance of the iterative variants is ten times the residual of a
/// retained direct factorization on the same right-hand side.
class MonolithicDriver {
public:
    MonolithicDriver(const ScenarioConfig& cfg, SolverChoice choice);

    struct StepResult {
        std::vector<double> solution;
        SolveReport report;
        double direct_residual = 0.0;
        std::int64_t aux_memory_doubles = 0;
        double wall_seconds = 0.0; // productive solver time of this step
    };

    StepResult advance(double t);
    const StaggeredGrid& grid() const { return grid_; }

private:
    void ensure_reference(const CoupledSystem& sys);
    std::shared_ptr<Preconditioner> build_preconditioner(const CoupledSystem& sys) const;

    ScenarioConfig cfg_;
    SolverChoice choice_;
    StaggeredGrid grid_;
    std::vector<double> v_prev_;
    std::vector<int> ordering_;
    bool reference_ready_ = false;
    LUFactorization reference_factor_;
};

struct TransientResult {
    std::vector<BenchRecord> records; // one per time step
    std::vector<double> final_solution;
    int total_dof = 0;
    bool completed = true; // false when a step failed and the run was cut short
};

/// Runs the backward Euler loop with the configured solution strategy.
/// Solver failures flag the offending record and stop this run without
/// throwing, so a plan can continue with its next configuration.
TransientResult run_transient(const ScenarioConfig& cfg);

struct PlanOutput {
    std::vector<BenchRecord> rows; // aggregated, one per (config, size)
    std::string runtime_csv_path;
    std::string fillin_csv_path;
};

/// Executes every (config, size) cell of the plan, writes the runtime table
/// and the fill-in table (DoF, entries/DoF of the matrix and its factors for
/// the monolithic system at each size). Aggregation per cell: median
/// per-step wall time over repetitions and steps, median outer iterations,
/// worst-case residuals, peak memory estimate.
PlanOutput run_plan(const BenchmarkPlan& plan, const ScenarioConfig& base,
                    std::ostream* log = nullptr);

/// Writes the Table-1-style fill-in rows for the given sizes.
void write_fillin_csv(const std::vector<int>& sizes, const ScenarioConfig& base,
                      const std::string& path);

struct VerifyOutcome {
    bool pass = true;
    std::vector<std::string> lines;
};

/// Cross-method equivalence and stopping-rule fidelity at one size:
/// monolithic direct, the four block-preconditioned solves, and the
/// partitioned coupling must agree pairwise at the final step, and every
/// converged iterative run must stop within ten times the direct residual.
VerifyOutcome verify_equivalence(int size, double rel_tol = 1e-6);

/// Least-squares slope of log(y) against log(x); scaling-trend helper.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

} // namespace sdc

#endif
