#include "sdc/grid.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>

namespace sdc {

namespace {

struct OrderKey {
    int y2; // twice the physical coordinate, integer-exact on uniform grids
    int x2;
    int rank;
    int dof;
};

std::vector<int> sort_keys(std::vector<OrderKey>& keys) {
    std::stable_sort(keys.begin(), keys.end(), [](const OrderKey& a, const OrderKey& b) {
        return std::tie(a.y2, a.x2, a.rank) < std::tie(b.y2, b.x2, b.rank);
    });
    std::vector<int> perm(keys.size());
    for (std::size_t k = 0; k < keys.size(); ++k) perm[k] = keys[k].dof;
    return perm;
}

} // namespace

std::vector<int> StokesBox::banded_ordering() const {
    std::vector<OrderKey> keys;
    keys.reserve(n_total());
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i <= nx; ++i) keys.push_back({2 * j + 1, 2 * i, 0, u_index(i, j)});
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i < nx; ++i) keys.push_back({2 * j, 2 * i + 1, 1, v_index(i, j)});
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) keys.push_back({2 * j + 1, 2 * i + 1, 2, p_index(i, j)});
    return sort_keys(keys);
}

std::vector<int> StaggeredGrid::banded_ordering() const {
    std::vector<OrderKey> keys;
    keys.reserve(n_total());
    const int lift = 2 * pm.ny; // free-flow domain sits above the porous square
    for (int j = 0; j < pm.ny; ++j)
        for (int i = 0; i < pm.nx; ++i)
            keys.push_back({2 * j + 1, 2 * i + 1, 3, p_pm_dof(i, j)});
    for (int j = 0; j < ff.ny; ++j)
        for (int i = 0; i <= ff.nx; ++i)
            keys.push_back({lift + 2 * j + 1, 2 * i, 0, u_dof(i, j)});
    for (int j = 0; j <= ff.ny; ++j)
        for (int i = 0; i < ff.nx; ++i)
            keys.push_back({lift + 2 * j, 2 * i + 1, 1, v_dof(i, j)});
    for (int j = 0; j < ff.ny; ++j)
        for (int i = 0; i < ff.nx; ++i)
            keys.push_back({lift + 2 * j + 1, 2 * i + 1, 2, p_ff_dof(i, j)});
    return sort_keys(keys);
}

StaggeredGrid build_grid(const ScenarioConfig& cfg) {
    cfg.validate();
    StaggeredGrid g;
    g.cells_per_unit = cfg.cells_per_unit_square;
    g.h = 1.0 / g.cells_per_unit;
    g.ff = StokesBox{g.cells_per_unit, 3 * g.cells_per_unit, g.h};
    g.pm = DarcyBox{g.cells_per_unit, g.cells_per_unit, g.h};
    return g;
}

} // namespace sdc
