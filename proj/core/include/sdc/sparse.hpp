/// @file sparse.hpp
/// @brief CSR sparse matrix storage, assembly builder, and kernels.

#ifndef SDC_SPARSE_HPP
#define SDC_SPARSE_HPP

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace sdc {

/// Compressed sparse row matrix. Column indices within each row are kept
/// strictly increasing; row_offsets has length n_rows+1.
struct SparseMatrix {
    int n_rows = 0;
    int n_cols = 0;
    std::vector<int> row_offsets;
    std::vector<int> col_indices;
    std::vector<double> values;

    SparseMatrix() : row_offsets(1, 0) {}
    SparseMatrix(int rows, int cols)
        : n_rows(rows), n_cols(cols), row_offsets(rows + 1, 0) {}

    std::int64_t nnz() const { return static_cast<std::int64_t>(values.size()); }

    std::span<const int> row_cols(int i) const {
        return {col_indices.data() + row_offsets[i],
                static_cast<std::size_t>(row_offsets[i + 1] - row_offsets[i])};
    }
    std::span<const double> row_vals(int i) const {
        return {values.data() + row_offsets[i],
                static_cast<std::size_t>(row_offsets[i + 1] - row_offsets[i])};
    }

    /// Value at (i,j), zero if not stored. Binary search within the row.
    double at(int i, int j) const;

    /// Structural and ordering invariants; throws std::invalid_argument on violation.
    void check_invariants() const;

    static SparseMatrix identity(int n);
};

/// Coordinate-list assembly helper. Duplicate entries are summed when the
/// matrix is finalized; rows come out with sorted column indices.
class CooBuilder {
public:
    CooBuilder(int rows, int cols) : n_rows_(rows), n_cols_(cols) {}

    void add(int i, int j, double v);
    void reserve(std::size_t n) { entries_.reserve(n); }

    SparseMatrix finalize();

private:
    struct Entry {
        int row;
        int col;
        double val;
    };
    int n_rows_;
    int n_cols_;
    std::vector<Entry> entries_;
};

/// y = A x. Rows are independent.
void spmv(const SparseMatrix& a, std::span<const double> x, std::span<double> y);
std::vector<double> spmv(const SparseMatrix& a, const std::vector<double>& x);

/// y = y + alpha * A x
void spmv_add(const SparseMatrix& a, std::span<const double> x, std::span<double> y,
              double alpha = 1.0);

/// Submatrix copy of the half-open row/column ranges.
SparseMatrix submatrix(const SparseMatrix& a, int row_begin, int row_end,
                       int col_begin, int col_end);

SparseMatrix transpose(const SparseMatrix& a);

/// B = P A P^T for a permutation given as perm[new_index] = old_index.
SparseMatrix permute_symmetric(const SparseMatrix& a, const std::vector<int>& perm);

/// Matrix Market coordinate format (ASCII, real general, 1-based).
void write_matrix_market(const SparseMatrix& a, std::ostream& out);
void write_matrix_market(const SparseMatrix& a, const std::string& path);
SparseMatrix read_matrix_market(std::istream& in);
SparseMatrix read_matrix_market_file(const std::string& path);

// Small dense-vector helpers shared by the solvers.
double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void scale(std::span<double> x, double alpha);

} // namespace sdc

#endif
