/// @file precond.hpp
/// @brief Sub-preconditioners (ILU(0), Gauss-Seidel, aggregation AMG, Uzawa)
/// and the block preconditioner combinators for the coupled system.

#ifndef SDC_PRECOND_HPP
#define SDC_PRECOND_HPP

#include <memory>

#include "sdc/krylov.hpp"
#include "sdc/lu.hpp"
#include "sdc/operator.hpp"

namespace sdc {

/// Incomplete LU restricted to the sparsity pattern of the matrix.
/// No pivoting; a vanishing pivot throws naming the row.
class Ilu0Preconditioner final : public Preconditioner {
public:
    explicit Ilu0Preconditioner(const SparseMatrix& a);

    int rows() const override { return lower_.n_rows; }
    std::int64_t setup_memory_doubles() const override {
        return lower_.nnz() + upper_.nnz();
    }
    std::int64_t work_per_apply() const override { return lower_.nnz() + upper_.nnz(); }

protected:
    void do_apply(std::span<const double> r, std::span<double> z) const override;

private:
    SparseMatrix lower_; // strict lower, unit diagonal implied
    SparseMatrix upper_; // upper including diagonal
};

/// Exact solve behind the preconditioner contract.
class DirectSolvePreconditioner final : public Preconditioner {
public:
    explicit DirectSolvePreconditioner(const SparseMatrix& a) : f_(lu_factor(a)) {}

    int rows() const override { return f_.rows(); }
    std::int64_t setup_memory_doubles() const override { return f_.fill_stats.nnz_factors; }
    std::int64_t work_per_apply() const override { return f_.fill_stats.nnz_factors; }
    const LUFactorization& factorization() const { return f_; }

protected:
    void do_apply(std::span<const double> r, std::span<double> z) const override {
        auto x = lu_solve(f_, r);
        std::copy(x.begin(), x.end(), z.begin());
    }

private:
    LUFactorization f_;
};

/// One forward SOR sweep on A z = r, updating z in place.
void sor_sweep(const SparseMatrix& a, std::span<double> z, std::span<const double> r,
               double omega);

/// Result of `sweeps` forward SOR sweeps on A z = r starting from zero.
std::vector<double> gauss_seidel_apply(const SparseMatrix& a, std::span<const double> r,
                                       double omega = 1.0, int sweeps = 1);

struct AmgOptions {
    int max_levels = 3;
    double strength_theta = 0.08;
    int coarse_threshold = 100;
    // Optional dof labels (one per row). Aggregates never mix labels, so
    // distinct fields sharing one matrix (the two staggered velocity
    // components) coarsen separately. Empty treats the system as scalar.
    std::vector<int> components;
};

/// Non-smoothed aggregation hierarchy. Restriction is the transpose of the
/// piecewise-constant prolongation; coarse operators satisfy the Galerkin
/// condition A_c = P^T A_f P exactly. The coarsest level is LU-factored.
struct AMGHierarchy {
    struct Level {
        SparseMatrix a;
        std::vector<int> aggregate_of; // fine index -> aggregate id; empty on the coarsest
        int n_coarse = 0;
    };
    std::vector<Level> levels;
    LUFactorization coarse_lu;
    AmgOptions opts;

    int finest_rows() const { return levels.front().a.n_rows; }
    std::int64_t stored_doubles() const;
};

/// Greedy strength-based aggregation: |a_ij| >= theta * sqrt(|a_ii a_jj|)
/// marks strong connections; aggregates are seeded by lowest index and grow
/// over their unassigned strong neighbors. Coarsening stops early when no
/// aggregation progress is possible.
AMGHierarchy amg_setup(const SparseMatrix& a, AmgOptions opts = {});

/// One V(1,1) cycle: Gauss-Seidel pre/post smoothing (one sweep, omega = 1),
/// Galerkin coarse correction, LU on the coarsest level.
std::vector<double> amg_vcycle_apply(const AMGHierarchy& h, std::span<const double> r);

class AmgPreconditioner final : public Preconditioner {
public:
    explicit AmgPreconditioner(const SparseMatrix& a, AmgOptions opts = {})
        : h_(amg_setup(a, opts)) {}
    explicit AmgPreconditioner(AMGHierarchy h) : h_(std::move(h)) {}

    int rows() const override { return h_.finest_rows(); }
    std::int64_t setup_memory_doubles() const override { return h_.stored_doubles(); }
    std::int64_t work_per_apply() const override;
    const AMGHierarchy& hierarchy() const { return h_; }

protected:
    void do_apply(std::span<const double> r, std::span<double> z) const override {
        auto x = amg_vcycle_apply(h_, r);
        std::copy(x.begin(), x.end(), z.begin());
    }

private:
    AMGHierarchy h_;
};

struct UzawaConfig {
    enum class Mode { exact, inexact };
    Mode mode = Mode::inexact;
    AmgOptions amg;              // inner velocity solver in inexact mode
    double power_tol_rel = 1e-3; // relaxation estimate accuracy
    int power_max_iters = 200;
    unsigned power_seed = 1729;
};

/// One Uzawa sweep on the saddle blocks [[V, B], [C, 0]]:
/// z_v = Vtilde^{-1} r_v, then z_p = omega (C z_v - r_p). The relaxation
/// parameter is 1/lambda_max of the approximate pressure Schur complement
/// C Vtilde^{-1} B, estimated once at setup by power iteration with the same
/// inner solver the sweep uses.
class UzawaPreconditioner final : public Preconditioner {
public:
    UzawaPreconditioner(const SparseMatrix& v, const SparseMatrix& b, const SparseMatrix& c,
                        UzawaConfig cfg = {});

    int rows() const override { return n_v_ + n_p_; }
    double omega() const { return omega_; }
    std::int64_t setup_memory_doubles() const override {
        return inner_->setup_memory_doubles() + b_.nnz() + c_.nnz();
    }
    std::int64_t work_per_apply() const override {
        return inner_->work_per_apply() + c_.nnz() + n_p_;
    }

protected:
    void do_apply(std::span<const double> r, std::span<double> z) const override;

private:
    int n_v_;
    int n_p_;
    SparseMatrix b_;
    SparseMatrix c_;
    std::unique_ptr<Preconditioner> inner_;
    double omega_ = 1.0;
};

enum class BlockPrecondKind { td_bj, td_bgs, pv_bj, pv_bgs };

/// Block-Jacobi and block-Gauss-Seidel combinators over the two-domain
/// (2x2) and pressure-velocity (3x3) partitionings of the coupled matrix.
/// The p_ff block of the pv variants carries no preconditioner (identity).
class BlockPreconditioner final : public Preconditioner {
public:
    /// Partition sizes follow the assembled ordering [v | p_ff | p_pm];
    /// the two-domain first block is [v | p_ff]. Coupling blocks are
    /// extracted from `matrix` as needed by the chosen kind.
    BlockPreconditioner(BlockPrecondKind kind, const SparseMatrix& matrix, int n_v, int n_pff,
                        int n_ppm, std::shared_ptr<const Preconditioner> first,
                        std::shared_ptr<const Preconditioner> pm);

    int rows() const override { return n_v_ + n_pff_ + n_ppm_; }
    BlockPrecondKind kind() const { return kind_; }
    std::int64_t setup_memory_doubles() const override;
    std::int64_t work_per_apply() const override;

protected:
    void do_apply(std::span<const double> r, std::span<double> z) const override;

private:
    BlockPrecondKind kind_;
    int n_v_;
    int n_pff_;
    int n_ppm_;
    std::shared_ptr<const Preconditioner> first_;
    std::shared_ptr<const Preconditioner> pm_;
    SparseMatrix c_prime_;   // pm rows x ff cols (td_bgs)
    SparseMatrix c_;         // p_ff rows x v cols (pv_bgs)
    SparseMatrix c1_prime_;  // pm rows x v cols (pv_bgs)
};

/// Copy of `a` with a strong diagonal anchor added at one dof. Pins the
/// constant nullspace of pure-flux blocks so factorizations and hierarchies
/// built on them stay nonsingular; used only on the preconditioner side.
SparseMatrix ground_dof(const SparseMatrix& a, int dof = 0);

} // namespace sdc

#endif
