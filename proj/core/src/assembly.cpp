#include "sdc/assembly.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace sdc {

namespace {

enum class BottomMode { side, dirichlet_v, coupled };

// Emits the free-flow rows. Global dof numbering equals the box-local
// numbering, so the same emitter serves the standalone subdomain system and
// the free-flow part of the monolithic system; only the coupled interface
// rows reach outside the box through pm_col.
struct StokesAssembler {
    CooBuilder& coo;
    std::vector<double>& rhs;
    const StokesBox& box;
    const FlowParams& par;
    const StokesBcs& bcs;
    BottomMode bottom;
    std::span<const double> v_prev;
    std::span<const double> v_gamma;
    std::function<int(int)> pm_col;
    double half_cell_resistance = 0.0; // h^2 / (2 K/mu), folded into stress rows

    double h = 0.0, mu = 0.0, tc = 0.0;

    void run() {
        h = box.h;
        mu = par.mu();
        tc = par.time_coeff();
        if (!v_prev.empty() && static_cast<int>(v_prev.size()) < box.n_vel())
            throw std::invalid_argument("assemble_stokes: v_prev length mismatch");
        if (bottom == BottomMode::dirichlet_v &&
            static_cast<int>(v_gamma.size()) != box.nx)
            throw std::invalid_argument("assemble_stokes: interface data length mismatch");

        for (int j = 0; j < box.ny; ++j)
            for (int i = 0; i <= box.nx; ++i) u_row(i, j);
        for (int j = 0; j <= box.ny; ++j)
            for (int i = 0; i < box.nx; ++i) v_row(i, j);

        const bool pin_gauge = bottom == BottomMode::side &&
                               bcs.left.kind == StokesBcKind::velocity &&
                               bcs.right.kind == StokesBcKind::velocity &&
                               bcs.top.kind == StokesBcKind::velocity &&
                               bcs.bottom.kind == StokesBcKind::velocity;
        for (int j = 0; j < box.ny; ++j)
            for (int i = 0; i < box.nx; ++i) continuity_row(i, j, pin_gauge);
    }

    double prev(int dof) const { return v_prev.empty() ? 0.0 : v_prev[dof]; }

    void u_row(int i, int j) {
        const int row = box.u_index(i, j);
        if (i == 0 && bcs.left.kind == StokesBcKind::velocity) {
            coo.add(row, row, 1.0);
            rhs[row] = bcs.left.u;
            return;
        }
        if (i == box.nx && bcs.right.kind == StokesBcKind::velocity) {
            coo.add(row, row, 1.0);
            rhs[row] = bcs.right.u;
            return;
        }

        const bool half = (i == 0 || i == box.nx); // open-boundary half cell
        const double vol = h * h * (half ? 0.5 : 1.0);
        const double len = half ? 0.5 * h : h; // north/south face length

        if (tc != 0.0) {
            coo.add(row, row, tc * vol);
            rhs[row] += tc * vol * prev(row);
        }

        // east face
        if (i < box.nx) {
            coo.add(row, box.u_index(i + 1, j), -2.0 * mu);
            coo.add(row, row, 2.0 * mu);
            coo.add(row, box.p_index(i, j), h);
        } else {
            rhs[row] -= bcs.right.pressure * h; // outflux +p_right*h
        }
        // west face
        if (i > 0) {
            coo.add(row, row, 2.0 * mu);
            coo.add(row, box.u_index(i - 1, j), -2.0 * mu);
            coo.add(row, box.p_index(i - 1, j), -h);
        } else {
            rhs[row] += bcs.left.pressure * h; // outflux -p_left*h
        }

        // north face shear: -mu (du/dy + dv/dx) * len
        const double c = mu * len / h;
        if (j + 1 < box.ny) {
            coo.add(row, box.u_index(i, j + 1), -c);
            coo.add(row, row, c);
        } else if (bcs.top.kind == StokesBcKind::velocity) {
            coo.add(row, row, 2.0 * c); // one-sided over the half distance
            rhs[row] += 2.0 * c * bcs.top.u;
        } // pressure top: zero normal gradient of the tangential velocity
        if (i > 0 && i < box.nx) {
            coo.add(row, box.v_index(i, j + 1), -c);
            coo.add(row, box.v_index(i - 1, j + 1), c);
        }

        // south face shear: +mu (du/dy + dv/dx) * len
        if (j > 0) {
            coo.add(row, row, c);
            coo.add(row, box.u_index(i, j - 1), -c);
            if (i > 0 && i < box.nx) {
                coo.add(row, box.v_index(i, j), c);
                coo.add(row, box.v_index(i - 1, j), -c);
            }
        } else if (bottom == BottomMode::side) {
            if (bcs.bottom.kind == StokesBcKind::velocity) {
                coo.add(row, row, 2.0 * c);
                rhs[row] += 2.0 * c * bcs.bottom.u;
                if (i > 0 && i < box.nx) {
                    coo.add(row, box.v_index(i, j), c);
                    coo.add(row, box.v_index(i - 1, j), -c);
                }
            }
        } else {
            // slip condition: shear balances the tangential velocity over
            // the half distance plus the slip length
            coo.add(row, row, mu * len / (0.5 * h + par.slip_length));
        }
    }

    void v_row(int i, int j) {
        const int row = box.v_index(i, j);
        if (j == 0) {
            if (bottom == BottomMode::dirichlet_v) {
                coo.add(row, row, 1.0);
                rhs[row] = v_gamma[i];
                return;
            }
            if (bottom == BottomMode::coupled) {
                // normal-stress continuity against the porous pressure,
                // with the half-cell flux resistance of the first cell
                coo.add(row, box.p_index(i, 0), h);
                coo.add(row, row, 2.0 * mu + half_cell_resistance);
                coo.add(row, box.v_index(i, 1), -2.0 * mu);
                coo.add(row, pm_col(i), -h);
                return;
            }
            if (bcs.bottom.kind == StokesBcKind::velocity) {
                coo.add(row, row, 1.0);
                rhs[row] = bcs.bottom.v;
                return;
            }
        }
        if (j == box.ny && bcs.top.kind == StokesBcKind::velocity) {
            coo.add(row, row, 1.0);
            rhs[row] = bcs.top.v;
            return;
        }

        const bool half = (j == 0 || j == box.ny); // open-boundary half cell
        const double vol = h * h * (half ? 0.5 : 1.0);
        const double len = half ? 0.5 * h : h; // east/west face length

        if (tc != 0.0) {
            coo.add(row, row, tc * vol);
            rhs[row] += tc * vol * prev(row);
        }

        // north face
        if (j < box.ny) {
            coo.add(row, box.v_index(i, j + 1), -2.0 * mu);
            coo.add(row, row, 2.0 * mu);
            coo.add(row, box.p_index(i, j), h);
        } else {
            rhs[row] -= bcs.top.pressure * h;
        }
        // south face
        if (j > 0) {
            coo.add(row, row, 2.0 * mu);
            coo.add(row, box.v_index(i, j - 1), -2.0 * mu);
            coo.add(row, box.p_index(i, j - 1), -h);
        } else {
            rhs[row] += bcs.bottom.pressure * h;
        }

        // east face shear: -mu (dv/dx + du/dy) * len
        const double c = mu * len / h;
        if (i + 1 < box.nx) {
            coo.add(row, box.v_index(i + 1, j), -c);
            coo.add(row, row, c);
        } else if (bcs.right.kind == StokesBcKind::velocity) {
            coo.add(row, row, 2.0 * c);
            rhs[row] += 2.0 * c * bcs.right.v;
        }
        if (j > 0 && j < box.ny) {
            coo.add(row, box.u_index(i + 1, j), -c);
            coo.add(row, box.u_index(i + 1, j - 1), c);
        }

        // west face shear: +mu (dv/dx + du/dy) * len
        if (i > 0) {
            coo.add(row, row, c);
            coo.add(row, box.v_index(i - 1, j), -c);
        } else if (bcs.left.kind == StokesBcKind::velocity) {
            coo.add(row, row, 2.0 * c);
            rhs[row] += 2.0 * c * bcs.left.v;
        }
        if (j > 0 && j < box.ny) {
            coo.add(row, box.u_index(i, j), c);
            coo.add(row, box.u_index(i, j - 1), -c);
        }
    }

    void continuity_row(int i, int j, bool pin_gauge) {
        const int row = box.p_index(i, j);
        if (pin_gauge && i == 0 && j == 0) {
            coo.add(row, row, h);
            rhs[row] = 0.0;
            return;
        }
        coo.add(row, box.u_index(i + 1, j), -h);
        coo.add(row, box.u_index(i, j), h);
        coo.add(row, box.v_index(i, j + 1), -h);
        coo.add(row, box.v_index(i, j), h);
    }
};

struct DarcyAssembler {
    CooBuilder& coo;
    std::vector<double>& rhs;
    const DarcyBox& box;
    double t_face = 0.0; // K/mu
    DarcyBcs bcs;
    std::span<const double> p_gamma; // Dirichlet interface values, empty otherwise
    bool coupled_top = false;
    std::function<int(int)> v_col;
    int offset = 0; // row/column offset of the porous block

    void run() {
        if (!p_gamma.empty() && static_cast<int>(p_gamma.size()) != box.nx)
            throw std::invalid_argument("assemble_darcy: interface data length mismatch");
        const double t2 = 2.0 * t_face;
        for (int j = 0; j < box.ny; ++j) {
            for (int i = 0; i < box.nx; ++i) {
                const int row = offset + box.p_index(i, j);
                double diag = 0.0;
                auto interior = [&](int ii, int jj) {
                    diag += t_face;
                    coo.add(row, offset + box.p_index(ii, jj), -t_face);
                };
                auto boundary = [&](const DarcySideBc& side) {
                    if (side.kind == DarcyBcKind::dirichlet) {
                        diag += t2;
                        rhs[row] += t2 * side.pressure;
                    }
                };
                if (i > 0)
                    interior(i - 1, j);
                else
                    boundary(bcs.left);
                if (i + 1 < box.nx)
                    interior(i + 1, j);
                else
                    boundary(bcs.right);
                if (j > 0)
                    interior(i, j - 1);
                else
                    boundary(bcs.bottom);
                if (j + 1 < box.ny) {
                    interior(i, j + 1);
                } else if (coupled_top) {
                    coo.add(row, v_col(i), box.h); // upward mass flux through the face
                } else if (!p_gamma.empty()) {
                    diag += t2;
                    rhs[row] += t2 * p_gamma[i];
                } else {
                    boundary(bcs.top);
                }
                coo.add(row, row, diag);
            }
        }
    }
};

} // namespace

LinearSystem assemble_stokes(const StokesBox& box, const FlowParams& par,
                             std::span<const double> v_prev, const StokesBcs& bcs,
                             const std::vector<double>* interface_v_gamma) {
    const int n = box.n_total();
    CooBuilder coo(n, n);
    coo.reserve(static_cast<std::size_t>(12) * n);
    std::vector<double> rhs(n, 0.0);
    StokesAssembler a{coo,    rhs,    box,
                      par,    bcs,    interface_v_gamma ? BottomMode::dirichlet_v
                                                        : BottomMode::side,
                      v_prev, interface_v_gamma ? std::span<const double>(*interface_v_gamma)
                                                : std::span<const double>{},
                      {},     0.0};
    a.run();
    return {coo.finalize(), std::move(rhs)};
}

LinearSystem assemble_darcy(const DarcyBox& box, double k_over_mu, const DarcyBcs& bcs,
                            const std::vector<double>* interface_p_gamma) {
    const int n = box.n_p();
    CooBuilder coo(n, n);
    coo.reserve(static_cast<std::size_t>(5) * n);
    std::vector<double> rhs(n, 0.0);
    DarcyAssembler a{coo,
                     rhs,
                     box,
                     k_over_mu,
                     bcs,
                     interface_p_gamma ? std::span<const double>(*interface_p_gamma)
                                       : std::span<const double>{},
                     false,
                     {},
                     0};
    a.run();
    return {coo.finalize(), std::move(rhs)};
}

CoupledSystem assemble_monolithic(const StaggeredGrid& grid, const ScenarioConfig& cfg,
                                  std::span<const double> v_prev, double t) {
    const FlowParams par = FlowParams::from(cfg);
    const double k_over_mu = cfg.permeability / cfg.dynamic_viscosity();
    const int n = grid.n_total();

    CooBuilder coo(n, n);
    coo.reserve(static_cast<std::size_t>(12) * n);
    std::vector<double> rhs(n, 0.0);

    StokesBcs bcs;
    bcs.left = StokesSideBc::pressure_bc(cfg.inflow_pressure(t));
    bcs.right = StokesSideBc::pressure_bc(0.0);
    bcs.top = StokesSideBc::wall();
    bcs.bottom = {}; // replaced by the coupled interface rows

    StokesAssembler sa{coo,
                       rhs,
                       grid.ff,
                       par,
                       bcs,
                       BottomMode::coupled,
                       v_prev,
                       {},
                       [&grid](int face) { return grid.interface_pm_dof(face); },
                       grid.h * grid.h / (2.0 * k_over_mu)};
    sa.run();

    DarcyAssembler da{coo,
                      rhs,
                      grid.pm,
                      k_over_mu,
                      DarcyBcs{},
                      {},
                      true,
                      [&grid](int face) { return grid.interface_v_dof(face); },
                      grid.ff.n_total()};
    da.run();

    CoupledSystem sys;
    sys.matrix = coo.finalize();
    sys.rhs = std::move(rhs);
    sys.grid = grid;
    sys.k_over_mu = k_over_mu;
    sys.mu = cfg.dynamic_viscosity();
    const int n_vel = grid.n_vel();
    const int n_ff = grid.ff.n_total();
    sys.td_ff = {0, n_ff};
    sys.td_pm = {n_ff, n};
    sys.pv_v = {0, n_vel};
    sys.pv_pff = {n_vel, n_ff};
    sys.pv_ppm = {n_ff, n};
    return sys;
}

std::vector<double> stokes_pressure_trace(const StokesBox& box, double mu,
                                          std::span<const double> solution) {
    std::vector<double> trace(box.nx);
    for (int i = 0; i < box.nx; ++i) {
        const double dvdy =
            (solution[box.v_index(i, 1)] - solution[box.v_index(i, 0)]) / box.h;
        trace[i] = solution[box.p_index(i, 0)] - 2.0 * mu * dvdy;
    }
    return trace;
}

std::vector<double> darcy_velocity_trace_dirichlet(const DarcyBox& box, double k_over_mu,
                                                   std::span<const double> p,
                                                   std::span<const double> p_gamma) {
    std::vector<double> trace(box.nx);
    for (int i = 0; i < box.nx; ++i) {
        const double p_cell = p[box.p_index(i, box.ny - 1)];
        trace[i] = 2.0 * k_over_mu * (p_cell - p_gamma[i]) / box.h;
    }
    return trace;
}

std::vector<double> darcy_velocity_trace_balance(const DarcyBox& box, double k_over_mu,
                                                 std::span<const double> p) {
    std::vector<double> trace(box.nx);
    const int j = box.ny - 1;
    for (int i = 0; i < box.nx; ++i) {
        const double pc = p[box.p_index(i, j)];
        double outflux = 0.0;
        if (i > 0) outflux += k_over_mu * (pc - p[box.p_index(i - 1, j)]);
        if (i + 1 < box.nx) outflux += k_over_mu * (pc - p[box.p_index(i + 1, j)]);
        if (j > 0) outflux += k_over_mu * (pc - p[box.p_index(i, j - 1)]);
        trace[i] = -outflux / box.h;
    }
    return trace;
}

InterfaceState extract_interface_traces(const CoupledSystem& system,
                                        std::span<const double> solution) {
    if (static_cast<int>(solution.size()) != system.n_total())
        throw std::invalid_argument("extract_interface_traces: solution length mismatch");
    InterfaceState state;
    state.p_ff_gamma = stokes_pressure_trace(system.grid.ff, system.mu, solution);
    state.v_pm_gamma = darcy_velocity_trace_balance(
        system.grid.pm, system.k_over_mu, solution.subspan(system.grid.ff.n_total()));
    return state;
}

} // namespace sdc
