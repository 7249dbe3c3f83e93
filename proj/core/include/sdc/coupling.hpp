/// @file coupling.hpp
/// @brief Serial implicit Dirichlet-Neumann coupling of the two subdomains
/// with Picard or interface quasi-Newton (inverse least-squares) acceleration.
///
/// Within a time step the free-flow problem is solved first with Dirichlet
/// normal velocities on the interface; its normal-stress trace then drives
/// the porous solve, whose flux trace closes the fixed-point loop
/// R(v) = S_pm(S_ff(v)) - v.

#ifndef SDC_COUPLING_HPP
#define SDC_COUPLING_HPP

#include <functional>
#include <memory>
#include <optional>

#include "sdc/assembly.hpp"
#include "sdc/krylov.hpp"
#include "sdc/precond.hpp"

namespace sdc {

struct CouplingConfig {
    double epsilon = 1e-8; // relative convergence tolerance, both measures
    int max_coupling_iterations = 100;
    enum class Acceleration { picard, iqn_ils };
    Acceleration acceleration = Acceleration::iqn_ils;
    double initial_relaxation = 0.5; // first iteration, before any history exists
    int history_capacity = 50;
    double filter_tolerance = 1e-13; // drop nearly dependent history columns
    // below this norm the relative measures switch to an absolute test
    double zero_guard = 1e-14;
};

/// Difference history of the interface fixed-point iteration. Columns are
/// consecutive differences, newest first; the column count never exceeds
/// min(capacity, interface dimension).
class IqnIlsHistory {
public:
    IqnIlsHistory(int capacity, double filter_tolerance)
        : capacity_(capacity), filter_tolerance_(filter_tolerance) {}

    bool has_previous() const { return has_previous_; }
    int columns() const { return static_cast<int>(d_residual_.size()); }
    double filter_tolerance() const { return filter_tolerance_; }

    /// Records the first sample without producing difference columns.
    void record(std::span<const double> residual, std::span<const double> v_tilde);

    /// Appends the difference columns for a new sample and trims to capacity.
    void push(std::span<const double> residual, std::span<const double> v_tilde);

    void clear();

    const std::vector<std::vector<double>>& residual_differences() const {
        return d_residual_;
    }
    const std::vector<std::vector<double>>& output_differences() const { return d_v_tilde_; }

private:
    int capacity_;
    double filter_tolerance_;
    bool has_previous_ = false;
    std::vector<double> prev_residual_, prev_v_tilde_;
    std::vector<std::vector<double>> d_residual_; // newest first
    std::vector<std::vector<double>> d_v_tilde_;
};

/// Quasi-Newton update: appends the new difference columns, solves
/// min_a ||Vhat a + R_k||_2 by QR with column filtering, and returns
/// v_{k+1} = v_k + R_k + What a. Throws std::invalid_argument when the
/// history holds no prior iterate (the caller must relax first).
std::vector<double> iqn_ils_update(IqnIlsHistory& history, std::span<const double> v_k,
                                   std::span<const double> residual_k,
                                   std::span<const double> v_tilde_k1);

/// Inner solvers per subdomain, matching the benchmark configurations.
struct SubdomainSolvers {
    enum class Stokes { direct, pd_gmres_uzawa_exact, pd_gmres_uzawa_inexact };
    enum class Darcy { direct, bicgstab_amg };
    Stokes stokes = Stokes::direct;
    Darcy darcy = Darcy::direct;
};

/// Drives the partitioned solution of the transient scenario. Both
/// participants are in-process solves; the serial-implicit order (free flow
/// first, then porous medium) is fixed.
class CouplingDriver {
public:
    CouplingDriver(const ScenarioConfig& cfg, CouplingConfig coupling = {},
                   SubdomainSolvers solvers = {});

    const StaggeredGrid& grid() const { return grid_; }
    int interface_dim() const { return grid_.n_interface(); }

    /// Sets the time level used by the subdomain solves of this step.
    void begin_timestep(double t) { t_ = t; }

    struct SubdomainSolve {
        std::vector<double> solution;
        std::vector<double> trace; // p_gamma for the free flow, v_gamma for the porous side
        SolveReport report;
        double direct_residual = 0.0; // reference residual of the retained factorization
        double reference_seconds = 0.0; // bookkeeping time spent on the tolerance reference
    };

    /// Free-flow solve with Dirichlet interface velocities; returns the
    /// normal-stress trace.
    SubdomainSolve solve_ff(const std::vector<double>& v_pm_gamma);

    /// Porous solve with Dirichlet interface pressures; returns the flux trace.
    SubdomainSolve solve_pm(const std::vector<double>& p_ff_gamma);

    /// R(v) = S_pm(S_ff(v)) - v at the current time level.
    std::vector<double> fixed_point_residual(const std::vector<double>& v);

    struct TimestepResult {
        std::vector<double> solution; // global layout [v_ff | p_ff | p_pm]
        int coupling_iterations = 0;
        bool converged = false;
        std::vector<double> measure_p; // per-iteration convergence measures
        std::vector<double> measure_v;
        int inner_iterations = 0;        // accumulated Krylov iterations
        double max_residual_ratio = 0.0; // worst final/direct residual ratio
        double max_final_residual = 0.0;
        double max_direct_residual = 0.0;
        double reference_seconds = 0.0; // tolerance bookkeeping, excluded from timings
    };

    /// One backward Euler step: alternates the subdomain solves with the
    /// configured acceleration until both relative measures hold. Commits
    /// the converged state for the next step. Non-convergence returns
    /// converged = false with the measure history attached.
    TimestepResult coupled_timestep(double t);

    /// Per-iteration trace hook: (timestep, iteration, measure_p, measure_v).
    std::function<void(int, int, double, double)> iteration_sink;

    std::int64_t solver_memory_doubles() const;

private:
    void ensure_stokes_setup(const LinearSystem& sys);
    void ensure_darcy_setup(const LinearSystem& sys);
    SubdomainSolve run_inner(const LinearSystem& sys, bool stokes_side);

    ScenarioConfig cfg_;
    CouplingConfig coupling_;
    SubdomainSolvers solvers_;
    StaggeredGrid grid_;

    double t_ = 0.0;
    int step_ = 0;
    std::vector<double> v_prev_;  // previous-step free-flow velocities
    std::vector<double> trace_v_; // converged interface state of the last step
    std::vector<double> trace_p_;

    // cached per-size setup products; both subdomain matrices are constant
    struct SubdomainCache {
        bool ready = false;
        std::vector<int> ordering;
        LUFactorization factor; // tolerance reference and direct solver
        std::shared_ptr<Preconditioner> precond;
    };
    SubdomainCache stokes_cache_, darcy_cache_;
};

} // namespace sdc

#endif
