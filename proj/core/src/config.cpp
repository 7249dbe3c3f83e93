#include "sdc/config.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sdc {

namespace {

constexpr std::array<const char*, solver_choice_count> names = {
    "direct",
    "partitioned-direct",
    "partitioned-uzawa-exact-amg",
    "partitioned-uzawa-amg",
    "pv-bj-amg-amg",
    "pv-bgs-amg-amg",
    "td-bj-uzawa-amg",
    "td-bgs-uzawa-amg",
    "td-bj-uzawa-ilu0",
    "td-bgs-uzawa-ilu0",
};

} // namespace

std::string solver_choice_name(SolverChoice c) { return names[static_cast<int>(c)]; }

SolverChoice solver_choice_from_name(const std::string& name) {
    for (int i = 0; i < solver_choice_count; ++i)
        if (name == names[i]) return static_cast<SolverChoice>(i);
    throw std::invalid_argument("unknown solver configuration: " + name);
}

SolverChoice solver_choice_at(int idx) {
    if (idx < 0 || idx >= solver_choice_count)
        throw std::invalid_argument("solver index out of range");
    return static_cast<SolverChoice>(idx);
}

bool solver_is_monolithic(SolverChoice c) {
    switch (c) {
    case SolverChoice::direct:
    case SolverChoice::pv_bj_amg_amg:
    case SolverChoice::pv_bgs_amg_amg:
    case SolverChoice::td_bj_uzawa_amg:
    case SolverChoice::td_bgs_uzawa_amg:
    case SolverChoice::td_bj_uzawa_ilu0:
    case SolverChoice::td_bgs_uzawa_ilu0:
        return true;
    default:
        return false;
    }
}

bool solver_is_iterative(SolverChoice c) { return c != SolverChoice::direct; }

double ScenarioConfig::inflow_pressure(double t) const {
    return dp_max * 0.5 * (1.0 - std::cos(M_PI * t / t_end));
}

void ScenarioConfig::validate() const {
    if (cells_per_unit_square < 2)
        throw std::invalid_argument("cells_per_unit_square must be at least 2");
    if (!(permeability > 0)) throw std::invalid_argument("permeability must be positive");
    if (!(kinematic_viscosity > 0))
        throw std::invalid_argument("kinematic_viscosity must be positive");
    if (!(density > 0)) throw std::invalid_argument("density must be positive");
    if (!(dt > 0)) throw std::invalid_argument("dt must be positive");
    if (!(alpha_bj > 0)) throw std::invalid_argument("alpha_bj must be positive");
    const double steps = t_end / dt;
    if (!(t_end > 0) || std::abs(steps - std::llround(steps)) > 1e-9 * steps)
        throw std::invalid_argument("t_end must be a positive integer multiple of dt");
}

namespace {

ScenarioConfig parse_stream(std::istream& in) {
    ScenarioConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r\n") != std::string::npos)
                throw std::invalid_argument("scenario file: bad line " + std::to_string(lineno));
            continue;
        }
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t\r\n");
            auto e = s.find_last_not_of(" \t\r\n");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key == "cells_per_unit_square")
            cfg.cells_per_unit_square = std::stoi(val);
        else if (key == "permeability")
            cfg.permeability = std::stod(val);
        else if (key == "alpha_bj")
            cfg.alpha_bj = std::stod(val);
        else if (key == "kinematic_viscosity")
            cfg.kinematic_viscosity = std::stod(val);
        else if (key == "density")
            cfg.density = std::stod(val);
        else if (key == "dt")
            cfg.dt = std::stod(val);
        else if (key == "t_end")
            cfg.t_end = std::stod(val);
        else if (key == "dp_max")
            cfg.dp_max = std::stod(val);
        else if (key == "solver")
            cfg.solver = solver_choice_from_name(val);
        else
            throw std::invalid_argument("scenario file: unknown key '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

} // namespace

ScenarioConfig parse_scenario_text(const std::string& text) {
    std::istringstream in(text);
    return parse_stream(in);
}

ScenarioConfig parse_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario file " + path);
    return parse_stream(in);
}

} // namespace sdc
