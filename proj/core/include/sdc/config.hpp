/// @file config.hpp
/// @brief Scenario parameters and the benchmark solver configurations.

#ifndef SDC_CONFIG_HPP
#define SDC_CONFIG_HPP

#include <cmath>
#include <string>

namespace sdc {

/// Solution strategies exercised by the benchmark harness. One name per
/// evaluation setup: the monolithic direct baseline, four monolithic
/// block-preconditioned Krylov variants, and the partitioned couplings.
enum class SolverChoice {
    direct,
    partitioned_direct,
    partitioned_uzawa_exact_amg,
    partitioned_uzawa_amg,
    pv_bj_amg_amg,
    pv_bgs_amg_amg,
    td_bj_uzawa_amg,
    td_bgs_uzawa_amg,
    td_bj_uzawa_ilu0,
    td_bgs_uzawa_ilu0,
};

std::string solver_choice_name(SolverChoice c);
SolverChoice solver_choice_from_name(const std::string& name);
constexpr int solver_choice_count = 10;
SolverChoice solver_choice_at(int idx);

bool solver_is_monolithic(SolverChoice c);
bool solver_is_iterative(SolverChoice c);

/// Transient scenario: free flow over a porous unit square, driven by a
/// half-cosine pressure ramp between the left and right boundary.
struct ScenarioConfig {
    int cells_per_unit_square = 16;
    double permeability = 1e-6;        // K [m^2]
    double alpha_bj = 1.0;             // Beavers-Joseph coefficient
    double kinematic_viscosity = 1e-6; // nu [m^2/s]
    double density = 1000.0;           // rho [kg/m^3]
    double dt = 2e5;                   // [s]
    double t_end = 50e5;               // [s]
    double dp_max = 1e-9;              // [Pa]
    SolverChoice solver = SolverChoice::direct;

    double dynamic_viscosity() const { return kinematic_viscosity * density; }
    double slip_length() const { return std::sqrt(permeability) / alpha_bj; }
    int n_timesteps() const { return static_cast<int>(std::llround(t_end / dt)); }

    /// Inflow pressure ramp: dp_max/2 * (1 - cos(pi t / t_end)).
    double inflow_pressure(double t) const;

    /// Throws std::invalid_argument when a field is out of range.
    void validate() const;
};

/// Plain-text key-value scenario file ('#' starts a comment). Field names:
/// cells_per_unit_square, permeability, alpha_bj, kinematic_viscosity,
/// density, dt, t_end, dp_max, solver.
ScenarioConfig parse_scenario_file(const std::string& path);
ScenarioConfig parse_scenario_text(const std::string& text);

} // namespace sdc

#endif
