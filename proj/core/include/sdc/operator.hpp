/// @file operator.hpp
/// @brief Solver-facing contracts: linear operators and the preconditioner interface.

#ifndef SDC_OPERATOR_HPP
#define SDC_OPERATOR_HPP

#include <atomic>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "sdc/sparse.hpp"

namespace sdc {

/// Square linear operator given by its action on a vector.
struct LinearOperator {
    int n = 0;
    std::function<void(std::span<const double>, std::span<double>)> apply_fn;

    void apply(std::span<const double> x, std::span<double> y) const { apply_fn(x, y); }

    /// Wraps a matrix by reference; the matrix must outlive the operator.
    static LinearOperator from_matrix(const SparseMatrix& a) {
        return {a.n_rows, [&a](std::span<const double> x, std::span<double> y) { spmv(a, x, y); }};
    }
};

/// Application of an approximate inverse to a residual vector. Every
/// implementation is a fixed linear process per application. Setup products
/// are immutable after construction; apply is safe to call concurrently on
/// distinct output vectors.
class Preconditioner {
public:
    virtual ~Preconditioner() = default;

    virtual int rows() const = 0;

    void apply(std::span<const double> r, std::span<double> z) const {
        applications_.fetch_add(1, std::memory_order_relaxed);
        do_apply(r, z);
    }
    std::vector<double> apply(std::span<const double> r) const {
        std::vector<double> z(rows());
        apply(r, z);
        return z;
    }

    /// Stored doubles created at setup (factor entries, hierarchy operators).
    virtual std::int64_t setup_memory_doubles() const { return 0; }
    /// Estimated floating point work of one application.
    virtual std::int64_t work_per_apply() const { return 0; }

    std::int64_t applications() const { return applications_.load(std::memory_order_relaxed); }

protected:
    virtual void do_apply(std::span<const double> r, std::span<double> z) const = 0;

private:
    mutable std::atomic<std::int64_t> applications_{0};
};

class IdentityPreconditioner final : public Preconditioner {
public:
    explicit IdentityPreconditioner(int n) : n_(n) {}
    int rows() const override { return n_; }

protected:
    void do_apply(std::span<const double> r, std::span<double> z) const override {
        for (std::size_t i = 0; i < r.size(); ++i) z[i] = r[i];
    }

private:
    int n_;
};

} // namespace sdc

#endif
