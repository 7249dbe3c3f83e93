/// @file assembly.hpp
/// @brief Finite volume assembly: TPFA for the porous pressure, a staggered
/// MAC scheme for the free flow, backward Euler in time, and the interface
/// coupling blocks of the monolithic system.

#ifndef SDC_ASSEMBLY_HPP
#define SDC_ASSEMBLY_HPP

#include <optional>
#include <span>

#include "sdc/grid.hpp"
#include "sdc/sparse.hpp"

namespace sdc {

struct FlowParams {
    double nu = 1.0;          // kinematic viscosity [m^2/s]
    double rho = 1.0;         // density [kg/m^3]
    double dt = 1.0;          // time step [s]; +inf assembles the stationary system
    double slip_length = 0.0; // sqrt(K)/alpha_BJ, used on the interface side

    double mu() const { return nu * rho; }
    double time_coeff() const { return std::isfinite(dt) ? rho / dt : 0.0; }
    static FlowParams from(const ScenarioConfig& cfg) {
        return {cfg.kinematic_viscosity, cfg.density, cfg.dt, cfg.slip_length()};
    }
};

enum class StokesBcKind { pressure, velocity };

struct StokesSideBc {
    StokesBcKind kind = StokesBcKind::velocity;
    double pressure = 0.0;
    double u = 0.0;
    double v = 0.0;

    static StokesSideBc pressure_bc(double p) { return {StokesBcKind::pressure, p, 0.0, 0.0}; }
    static StokesSideBc wall(double u = 0.0, double v = 0.0) {
        return {StokesBcKind::velocity, 0.0, u, v};
    }
};

struct StokesBcs {
    StokesSideBc left, right, top, bottom;
};

struct LinearSystem {
    SparseMatrix matrix;
    std::vector<double> rhs;
};

/// Momentum rows are assembled at faces (time term, symmetric-gradient
/// viscous flux, pressure gradient), continuity rows at cells with negated
/// divergence so the pressure Schur complement comes out positive.
/// When interface_v_gamma is set, the bottom boundary carries Dirichlet
/// normal velocities plus the slip condition for the tangential component;
/// otherwise the bottom follows bcs.bottom. With an all-velocity boundary
/// the pressure gauge is fixed by pinning the first pressure dof.
LinearSystem assemble_stokes(const StokesBox& box, const FlowParams& par,
                             std::span<const double> v_prev, const StokesBcs& bcs,
                             const std::vector<double>* interface_v_gamma = nullptr);

enum class DarcyBcKind { noflow, dirichlet };

struct DarcySideBc {
    DarcyBcKind kind = DarcyBcKind::noflow;
    double pressure = 0.0;

    static DarcySideBc noflow_bc() { return {}; }
    static DarcySideBc dirichlet_bc(double p) { return {DarcyBcKind::dirichlet, p}; }
};

struct DarcyBcs {
    DarcySideBc left, right, top, bottom;
};

/// Cell-centered two-point flux discretization with face transmissibility
/// K/mu per unit depth; Dirichlet boundaries couple over the half distance.
/// When interface_p_gamma is set it overrides the top side with per-face
/// Dirichlet pressures.
LinearSystem assemble_darcy(const DarcyBox& box, double k_over_mu, const DarcyBcs& bcs,
                            const std::vector<double>* interface_p_gamma = nullptr);

struct IndexRange {
    int begin = 0;
    int end = 0;
    int size() const { return end - begin; }
};

/// Assembled monolithic system carrying both block partitionings of the
/// same matrix: two-domain ([v, p_ff] | p_pm) and pressure-velocity
/// (v | p_ff | p_pm). The ranges cover all rows exactly once and the
/// porous block is shared between the two views.
struct CoupledSystem {
    SparseMatrix matrix;
    std::vector<double> rhs;
    StaggeredGrid grid;
    double k_over_mu = 0.0;
    double mu = 0.0;

    IndexRange td_ff, td_pm;
    IndexRange pv_v, pv_pff, pv_ppm;

    int n_total() const { return matrix.n_rows; }
};

/// Builds the full system: Stokes block, Darcy block, and the coupling
/// entries at the interface. Free-flow boundary conditions are the inflow
/// pressure ramp on the left, zero pressure on the right, and a no-slip top
/// wall; the porous square is no-flow on its left, right, and bottom sides.
/// Interface rows impose normal-stress continuity (with the porous-side
/// half-cell flux resistance folded in), the slip condition for tangential
/// velocity, and normal mass-flux continuity in the porous rows.
CoupledSystem assemble_monolithic(const StaggeredGrid& grid, const ScenarioConfig& cfg,
                                  std::span<const double> v_prev, double t);

/// Interface traces exchanged by the partitioned scheme.
struct InterfaceState {
    std::vector<double> p_ff_gamma; // normal stress on the free-flow side [Pa]
    std::vector<double> v_pm_gamma; // upward normal velocity [m/s]
    int iteration = 0;
};

/// Free-flow side: normal stress p - 2 mu dv/dy at each interface face.
std::vector<double> stokes_pressure_trace(const StokesBox& box, double mu,
                                          std::span<const double> solution);

/// Porous side, Dirichlet form: TPFA flux through the interface over the
/// half distance between the top cell center and the interface value.
std::vector<double> darcy_velocity_trace_dirichlet(const DarcyBox& box, double k_over_mu,
                                                   std::span<const double> p,
                                                   std::span<const double> p_gamma);

/// Porous side, flux-coupled form: interface flux recovered from the mass
/// balance of the interface cells (no-flow outer boundaries).
std::vector<double> darcy_velocity_trace_balance(const DarcyBox& box, double k_over_mu,
                                                 std::span<const double> p);

InterfaceState extract_interface_traces(const CoupledSystem& system,
                                        std::span<const double> solution);

} // namespace sdc

#endif
