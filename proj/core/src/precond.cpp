#include "sdc/precond.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sdc {

// ---------------------------------------------------------------------------
// ILU(0)

Ilu0Preconditioner::Ilu0Preconditioner(const SparseMatrix& a) {
    if (a.n_rows != a.n_cols) throw std::invalid_argument("ilu0: matrix must be square");
    const int n = a.n_rows;
    SparseMatrix f = a; // factor in place, restricted to the pattern of a

    std::vector<int> diag_pos(n, -1);
    for (int i = 0; i < n; ++i)
        for (int k = f.row_offsets[i]; k < f.row_offsets[i + 1]; ++k)
            if (f.col_indices[k] == i) diag_pos[i] = k;

    for (int i = 0; i < n; ++i) {
        const int row_begin = f.row_offsets[i];
        const int row_end = f.row_offsets[i + 1];
        for (int kk = row_begin; kk < row_end; ++kk) {
            const int k = f.col_indices[kk];
            if (k >= i) break;
            if (diag_pos[k] < 0 || f.values[diag_pos[k]] == 0.0)
                throw std::runtime_error("ilu0: zero pivot in row " + std::to_string(k));
            const double lik = f.values[kk] / f.values[diag_pos[k]];
            f.values[kk] = lik;
            // merge row k's upper part into the remainder of row i (both sorted)
            int p = diag_pos[k] + 1;
            int q = kk + 1;
            const int k_end = f.row_offsets[k + 1];
            while (p < k_end && q < row_end) {
                if (f.col_indices[p] == f.col_indices[q]) {
                    f.values[q] -= lik * f.values[p];
                    ++p;
                    ++q;
                } else if (f.col_indices[p] < f.col_indices[q]) {
                    ++p; // fill outside the pattern is dropped
                } else {
                    ++q;
                }
            }
        }
        if (diag_pos[i] < 0 || f.values[diag_pos[i]] == 0.0)
            throw std::runtime_error("ilu0: zero pivot in row " + std::to_string(i));
    }

    // split into strict lower and upper-with-diagonal triangles
    lower_ = SparseMatrix(n, n);
    upper_ = SparseMatrix(n, n);
    for (int i = 0; i < n; ++i) {
        for (int k = f.row_offsets[i]; k < f.row_offsets[i + 1]; ++k) {
            const int j = f.col_indices[k];
            if (j < i) {
                lower_.col_indices.push_back(j);
                lower_.values.push_back(f.values[k]);
            } else {
                upper_.col_indices.push_back(j);
                upper_.values.push_back(f.values[k]);
            }
        }
        lower_.row_offsets[i + 1] = static_cast<int>(lower_.col_indices.size());
        upper_.row_offsets[i + 1] = static_cast<int>(upper_.col_indices.size());
    }
}

void Ilu0Preconditioner::do_apply(std::span<const double> r, std::span<double> z) const {
    const int n = lower_.n_rows;
    for (int i = 0; i < n; ++i) {
        double s = r[i];
        for (int k = lower_.row_offsets[i]; k < lower_.row_offsets[i + 1]; ++k)
            s -= lower_.values[k] * z[lower_.col_indices[k]];
        z[i] = s;
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = z[i];
        const int begin = upper_.row_offsets[i];
        for (int k = begin + 1; k < upper_.row_offsets[i + 1]; ++k)
            s -= upper_.values[k] * z[upper_.col_indices[k]];
        z[i] = s / upper_.values[begin];
    }
}

// ---------------------------------------------------------------------------
// Gauss-Seidel

void sor_sweep(const SparseMatrix& a, std::span<double> z, std::span<const double> r,
               double omega) {
    for (int i = 0; i < a.n_rows; ++i) {
        double s = r[i];
        double diag = 0.0;
        for (int k = a.row_offsets[i]; k < a.row_offsets[i + 1]; ++k) {
            const int j = a.col_indices[k];
            if (j == i)
                diag = a.values[k];
            else
                s -= a.values[k] * z[j];
        }
        if (diag == 0.0)
            throw std::runtime_error("sor_sweep: zero diagonal in row " + std::to_string(i));
        z[i] = (1.0 - omega) * z[i] + omega * s / diag;
    }
}

std::vector<double> gauss_seidel_apply(const SparseMatrix& a, std::span<const double> r,
                                       double omega, int sweeps) {
    std::vector<double> z(a.n_rows, 0.0);
    for (int s = 0; s < sweeps; ++s) sor_sweep(a, z, r, omega);
    return z;
}

// ---------------------------------------------------------------------------
// Aggregation AMG

namespace {

std::vector<int> aggregate(const SparseMatrix& a, double theta,
                           const std::vector<int>& components, int& n_aggregates) {
    const int n = a.n_rows;
    std::vector<double> diag(n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int k = a.row_offsets[i]; k < a.row_offsets[i + 1]; ++k)
            if (a.col_indices[k] == i) diag[i] = a.values[k];

    auto strong = [&](int i, int k) {
        const int j = a.col_indices[k];
        if (j == i) return false;
        if (!components.empty() && components[i] != components[j]) return false;
        return std::abs(a.values[k]) >= theta * std::sqrt(std::abs(diag[i] * diag[j]));
    };

    std::vector<int> agg(n, -1);
    int next = 0;
    // seed pass: lowest unassigned index grows over its unassigned strong neighbors
    for (int i = 0; i < n; ++i) {
        if (agg[i] >= 0) continue;
        bool neighbor_taken = false;
        for (int k = a.row_offsets[i]; k < a.row_offsets[i + 1]; ++k)
            if (strong(i, k) && agg[a.col_indices[k]] >= 0) neighbor_taken = true;
        if (neighbor_taken) continue; // joins an aggregate in the second pass
        agg[i] = next;
        for (int k = a.row_offsets[i]; k < a.row_offsets[i + 1]; ++k) {
            const int j = a.col_indices[k];
            if (strong(i, k) && agg[j] < 0) agg[j] = next;
        }
        ++next;
    }
    // sweep-up pass: attach leftovers to their strongest neighbor aggregate
    for (int i = 0; i < n; ++i) {
        if (agg[i] >= 0) continue;
        int best = -1;
        double best_val = -1.0;
        for (int k = a.row_offsets[i]; k < a.row_offsets[i + 1]; ++k) {
            const int j = a.col_indices[k];
            if (j == i || agg[j] < 0) continue;
            const double w = std::abs(a.values[k]);
            if (strong(i, k) && w > best_val) {
                best_val = w;
                best = agg[j];
            }
        }
        if (best >= 0) {
            agg[i] = best;
        } else {
            agg[i] = next++; // isolated vertex becomes a singleton
        }
    }
    n_aggregates = next;
    return agg;
}

SparseMatrix galerkin_product(const SparseMatrix& a, const std::vector<int>& agg,
                              int n_coarse) {
    CooBuilder b(n_coarse, n_coarse);
    b.reserve(a.nnz());
    for (int i = 0; i < a.n_rows; ++i)
        for (int k = a.row_offsets[i]; k < a.row_offsets[i + 1]; ++k)
            b.add(agg[i], agg[a.col_indices[k]], a.values[k]);
    return b.finalize();
}

} // namespace

AMGHierarchy amg_setup(const SparseMatrix& a, AmgOptions opts) {
    if (a.n_rows != a.n_cols) throw std::invalid_argument("amg_setup: matrix must be square");
    if (!opts.components.empty() &&
        static_cast<int>(opts.components.size()) != a.n_rows)
        throw std::invalid_argument("amg_setup: component label length mismatch");
    AMGHierarchy h;
    h.opts = opts;
    h.levels.push_back({a, {}, 0});
    std::vector<int> components = opts.components;
    while (static_cast<int>(h.levels.size()) < opts.max_levels &&
           h.levels.back().a.n_rows > opts.coarse_threshold) {
        AMGHierarchy::Level& fine = h.levels.back();
        int n_coarse = 0;
        auto agg = aggregate(fine.a, opts.strength_theta, components, n_coarse);
        if (n_coarse >= fine.a.n_rows) break; // aggregation stagnated
        SparseMatrix coarse = galerkin_product(fine.a, agg, n_coarse);
        if (!components.empty()) {
            std::vector<int> coarse_components(n_coarse, 0);
            for (int i = 0; i < fine.a.n_rows; ++i)
                coarse_components[agg[i]] = components[i]; // aggregates are label-pure
            components = std::move(coarse_components);
        }
        fine.aggregate_of = std::move(agg);
        fine.n_coarse = n_coarse;
        h.levels.push_back({std::move(coarse), {}, 0});
    }
    h.coarse_lu = lu_factor(h.levels.back().a);
    return h;
}

std::int64_t AMGHierarchy::stored_doubles() const {
    std::int64_t s = coarse_lu.fill_stats.nnz_factors;
    for (const auto& l : levels) s += l.a.nnz();
    return s;
}

std::int64_t AmgPreconditioner::work_per_apply() const {
    std::int64_t s = h_.coarse_lu.fill_stats.nnz_factors;
    for (const auto& l : h_.levels) s += 5 * l.a.nnz();
    return s;
}

namespace {

std::vector<double> vcycle(const AMGHierarchy& h, std::size_t lev, std::span<const double> r) {
    const AMGHierarchy::Level& level = h.levels[lev];
    if (lev + 1 == h.levels.size()) return lu_solve(h.coarse_lu, r);

    const SparseMatrix& a = level.a;
    std::vector<double> z(a.n_rows, 0.0);
    sor_sweep(a, z, r, 1.0);

    std::vector<double> res(r.begin(), r.end());
    spmv_add(a, z, res, -1.0);
    std::vector<double> rc(level.n_coarse, 0.0);
    for (int i = 0; i < a.n_rows; ++i) rc[level.aggregate_of[i]] += res[i];

    auto zc = vcycle(h, lev + 1, rc);
    for (int i = 0; i < a.n_rows; ++i) z[i] += zc[level.aggregate_of[i]];

    sor_sweep(a, z, r, 1.0);
    return z;
}

} // namespace

std::vector<double> amg_vcycle_apply(const AMGHierarchy& h, std::span<const double> r) {
    if (static_cast<int>(r.size()) != h.finest_rows())
        throw std::invalid_argument("amg_vcycle_apply: dimension mismatch");
    return vcycle(h, 0, r);
}

// ---------------------------------------------------------------------------
// Uzawa

UzawaPreconditioner::UzawaPreconditioner(const SparseMatrix& v, const SparseMatrix& b,
                                         const SparseMatrix& c, UzawaConfig cfg)
    : n_v_(v.n_rows), n_p_(c.n_rows), b_(b), c_(c) {
    if (v.n_rows != v.n_cols || b.n_rows != n_v_ || c.n_cols != n_v_ ||
        b.n_cols != c.n_rows)
        throw std::invalid_argument("uzawa: inconsistent block dimensions");

    if (cfg.mode == UzawaConfig::Mode::exact)
        inner_ = std::make_unique<DirectSolvePreconditioner>(v);
    else
        inner_ = std::make_unique<AmgPreconditioner>(v, cfg.amg);

    // Relaxation from the dominant eigenvalue of the approximate Schur
    // complement, using the same inner solve as the sweep itself.
    LinearOperator schur{
        n_p_, [this](std::span<const double> x, std::span<double> y) {
            std::vector<double> t1(n_v_), t2(n_v_);
            spmv(b_, x, t1);
            inner_->apply(t1, t2);
            spmv(c_, t2, y);
        }};
    auto est = power_iteration(schur, cfg.power_tol_rel, cfg.power_max_iters, cfg.power_seed);
    omega_ = (std::abs(est.value) > 1e-300) ? 1.0 / est.value : 1.0;
}

void UzawaPreconditioner::do_apply(std::span<const double> r, std::span<double> z) const {
    std::span<const double> r_v = r.subspan(0, n_v_);
    std::span<const double> r_p = r.subspan(n_v_, n_p_);
    std::span<double> z_v = z.subspan(0, n_v_);
    std::span<double> z_p = z.subspan(n_v_, n_p_);

    inner_->apply(r_v, z_v);
    std::vector<double> cz(n_p_);
    spmv(c_, z_v, cz);
    for (int i = 0; i < n_p_; ++i) z_p[i] = omega_ * (cz[i] - r_p[i]);
}

// ---------------------------------------------------------------------------
// Block combinators

BlockPreconditioner::BlockPreconditioner(BlockPrecondKind kind, const SparseMatrix& matrix,
                                         int n_v, int n_pff, int n_ppm,
                                         std::shared_ptr<const Preconditioner> first,
                                         std::shared_ptr<const Preconditioner> pm)
    : kind_(kind), n_v_(n_v), n_pff_(n_pff), n_ppm_(n_ppm), first_(std::move(first)),
      pm_(std::move(pm)) {
    const int n = n_v_ + n_pff_ + n_ppm_;
    if (matrix.n_rows != n || matrix.n_cols != n)
        throw std::invalid_argument("block preconditioner: partition does not cover the matrix");
    const int n_ff = n_v_ + n_pff_;
    const bool td = kind_ == BlockPrecondKind::td_bj || kind_ == BlockPrecondKind::td_bgs;
    const int first_rows = td ? n_ff : n_v_;
    if (first_ && first_->rows() != first_rows)
        throw std::invalid_argument("block preconditioner: first sub-block size mismatch");
    if (pm_ && pm_->rows() != n_ppm_)
        throw std::invalid_argument("block preconditioner: pm sub-block size mismatch");
    if (!first_ || !pm_)
        throw std::invalid_argument("block preconditioner: missing sub-preconditioner");

    if (kind_ == BlockPrecondKind::td_bgs)
        c_prime_ = submatrix(matrix, n_ff, n, 0, n_ff);
    if (kind_ == BlockPrecondKind::pv_bgs) {
        c_ = submatrix(matrix, n_v_, n_ff, 0, n_v_);
        c1_prime_ = submatrix(matrix, n_ff, n, 0, n_v_);
    }
}

void BlockPreconditioner::do_apply(std::span<const double> r, std::span<double> z) const {
    const int n_ff = n_v_ + n_pff_;
    switch (kind_) {
    case BlockPrecondKind::td_bj: {
        first_->apply(r.subspan(0, n_ff), z.subspan(0, n_ff));
        pm_->apply(r.subspan(n_ff, n_ppm_), z.subspan(n_ff, n_ppm_));
        break;
    }
    case BlockPrecondKind::td_bgs: {
        first_->apply(r.subspan(0, n_ff), z.subspan(0, n_ff));
        std::vector<double> rp(r.begin() + n_ff, r.end());
        spmv_add(c_prime_, z.subspan(0, n_ff), rp, -1.0);
        pm_->apply(rp, z.subspan(n_ff, n_ppm_));
        break;
    }
    case BlockPrecondKind::pv_bj: {
        first_->apply(r.subspan(0, n_v_), z.subspan(0, n_v_));
        std::copy(r.begin() + n_v_, r.begin() + n_ff, z.begin() + n_v_);
        pm_->apply(r.subspan(n_ff, n_ppm_), z.subspan(n_ff, n_ppm_));
        break;
    }
    case BlockPrecondKind::pv_bgs: {
        first_->apply(r.subspan(0, n_v_), z.subspan(0, n_v_));
        std::vector<double> rpff(r.begin() + n_v_, r.begin() + n_ff);
        spmv_add(c_, z.subspan(0, n_v_), rpff, -1.0);
        std::copy(rpff.begin(), rpff.end(), z.begin() + n_v_);
        std::vector<double> rpm(r.begin() + n_ff, r.end());
        spmv_add(c1_prime_, z.subspan(0, n_v_), rpm, -1.0);
        pm_->apply(rpm, z.subspan(n_ff, n_ppm_));
        break;
    }
    }
}

std::int64_t BlockPreconditioner::setup_memory_doubles() const {
    return first_->setup_memory_doubles() + pm_->setup_memory_doubles() + c_prime_.nnz() +
           c_.nnz() + c1_prime_.nnz();
}

std::int64_t BlockPreconditioner::work_per_apply() const {
    return first_->work_per_apply() + pm_->work_per_apply() + c_prime_.nnz() + c_.nnz() +
           c1_prime_.nnz();
}

SparseMatrix ground_dof(const SparseMatrix& a, int dof) {
    if (dof < 0 || dof >= a.n_rows) throw std::invalid_argument("ground_dof: dof out of range");
    SparseMatrix g = a;
    double max_diag = 0.0;
    int anchor_pos = -1;
    for (int i = 0; i < g.n_rows; ++i) {
        for (int k = g.row_offsets[i]; k < g.row_offsets[i + 1]; ++k) {
            if (g.col_indices[k] == i) {
                max_diag = std::max(max_diag, std::abs(g.values[k]));
                if (i == dof) anchor_pos = k;
            }
        }
    }
    if (anchor_pos < 0)
        throw std::invalid_argument("ground_dof: anchor dof has no stored diagonal");
    g.values[anchor_pos] += (max_diag > 0.0 ? max_diag : 1.0);
    return g;
}

} // namespace sdc
