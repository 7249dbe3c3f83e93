/// @file lu.hpp
/// @brief Sparse direct LU with threshold partial pivoting and fill-in accounting.

#ifndef SDC_LU_HPP
#define SDC_LU_HPP

#include "sdc/sparse.hpp"

namespace sdc {

struct FillStats {
    std::int64_t nnz_matrix = 0;
    std::int64_t nnz_factors = 0;
    double entries_per_dof_matrix = 0.0;
    double entries_per_dof_factors = 0.0;
};

/// P A = L U. L is strictly lower triangular with an implied unit diagonal,
/// U is upper triangular including the diagonal, both in pivot numbering.
/// row_permutation[k] is the original row that became the k-th pivot row.
struct LUFactorization {
    SparseMatrix lower;
    SparseMatrix upper;
    std::vector<int> row_permutation;
    FillStats fill_stats;

    int rows() const { return lower.n_rows; }
};

/// Left-looking column factorization. Pivoting is partial with a threshold:
/// the diagonal entry is kept whenever |a_jj| >= pivot_threshold * max|column|,
/// otherwise the largest remaining entry is promoted. No fill-reducing
/// ordering is applied; the matrix is factored exactly as given.
/// Throws std::runtime_error naming the failing row when no nonzero pivot exists.
LUFactorization lu_factor(const SparseMatrix& a, double pivot_threshold = 0.1);

/// Forward/backward substitution for the factored system.
std::vector<double> lu_solve(const LUFactorization& f, std::span<const double> b);

/// Factors a and reports stored-entry densities for the matrix and its factors.
FillStats fill_in_report(const SparseMatrix& a);

} // namespace sdc

#endif
