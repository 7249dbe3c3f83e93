/// @file grid.hpp
/// @brief Staggered grids for the free-flow channel and the porous square.
///
/// Geometry: the free-flow domain is a channel of width 1 and height 3
/// sitting on top of the 1x1 porous square; the interface is the shared
/// horizontal unit segment. Both domains use square cells of the same size,
/// so every interface face pairs one free-flow bottom face with one porous
/// top cell.

#ifndef SDC_GRID_HPP
#define SDC_GRID_HPP

#include <vector>

#include "sdc/config.hpp"

namespace sdc {

/// MAC layout over an nx-by-ny cell box: x-velocities on vertical faces,
/// y-velocities on horizontal faces, pressures at cell centers. Local dof
/// order is [u | v | p]; the bottom boundary is the interface side when the
/// box is part of the coupled geometry.
struct StokesBox {
    int nx = 0;
    int ny = 0;
    double h = 0.0;

    int n_u() const { return (nx + 1) * ny; }
    int n_v() const { return nx * (ny + 1); }
    int n_vel() const { return n_u() + n_v(); }
    int n_p() const { return nx * ny; }
    int n_total() const { return n_vel() + n_p(); }

    int u_index(int i, int j) const { return j * (nx + 1) + i; }
    int v_index(int i, int j) const { return n_u() + j * nx + i; }
    int p_index(int i, int j) const { return n_vel() + j * nx + i; }

    /// Symmetric permutation (new -> old) interleaving dofs by grid row;
    /// keeps the factor bandwidth proportional to one row of unknowns.
    std::vector<int> banded_ordering() const;
};

/// Cell-centered pressure layout over an nx-by-ny box; the top boundary is
/// the interface side in the coupled geometry.
struct DarcyBox {
    int nx = 0;
    int ny = 0;
    double h = 0.0;

    int n_p() const { return nx * ny; }
    int p_index(int i, int j) const { return j * nx + i; }
};

/// The coupled two-domain grid with global dof maps. Global ordering is
/// [v_ff | p_ff | p_pm]: free-flow velocities first, then free-flow
/// pressures, then porous pressures, so both block partitionings of the
/// system are contiguous index ranges.
struct StaggeredGrid {
    int cells_per_unit = 0;
    double h = 0.0;
    StokesBox ff;
    DarcyBox pm;

    int n_vel() const { return ff.n_vel(); }
    int n_pff() const { return ff.n_p(); }
    int n_ppm() const { return pm.n_p(); }
    int n_total() const { return ff.n_total() + pm.n_p(); }
    int n_interface() const { return cells_per_unit; }

    // global indices
    int u_dof(int i, int j) const { return ff.u_index(i, j); }
    int v_dof(int i, int j) const { return ff.v_index(i, j); }
    int p_ff_dof(int i, int j) const { return ff.p_index(i, j); }
    int p_pm_dof(int i, int j) const { return ff.n_total() + pm.p_index(i, j); }

    /// Stokes bottom face paired with the porous top cell below it.
    int interface_v_dof(int face) const { return v_dof(face, 0); }
    int interface_pm_dof(int face) const { return p_pm_dof(face, pm.ny - 1); }

    /// Symmetric permutation (new -> old) interleaving both domains by
    /// physical height, used by the direct solver path.
    std::vector<int> banded_ordering() const;
};

StaggeredGrid build_grid(const ScenarioConfig& cfg);

} // namespace sdc

#endif
