#include "sdc/lu.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sdc {

namespace {

// Column-major growable factor storage used during elimination.
struct ColumnStore {
    std::vector<int> ptr;
    std::vector<int> rows;
    std::vector<double> vals;

    explicit ColumnStore(int n, std::size_t reserve_nnz) : ptr(1, 0) {
        ptr.reserve(n + 1);
        rows.reserve(reserve_nnz);
        vals.reserve(reserve_nnz);
    }
    void push(int r, double v) {
        rows.push_back(r);
        vals.push_back(v);
    }
    void close_column() { ptr.push_back(static_cast<int>(rows.size())); }
};

// Depth-first reachability of column entries through the partially built L.
// Nodes carry original row numbers; pivotal rows continue into their L column.
int reach(const ColumnStore& l, const std::vector<int>& pinv, int start, int top,
          std::vector<int>& stack_order, std::vector<int>& work_stack,
          std::vector<int>& entry_pos, std::vector<char>& visited) {
    int head = 0;
    work_stack[0] = start;
    while (head >= 0) {
        int i = work_stack[head];
        if (!visited[i]) {
            visited[i] = 1;
            entry_pos[head] = (pinv[i] >= 0) ? l.ptr[pinv[i]] : 0;
        }
        bool descended = false;
        if (pinv[i] >= 0) {
            int col = pinv[i];
            for (int p = entry_pos[head]; p < l.ptr[col + 1]; ++p) {
                int child = l.rows[p];
                if (!visited[child]) {
                    entry_pos[head] = p + 1;
                    work_stack[++head] = child;
                    descended = true;
                    break;
                }
            }
        }
        if (!descended) {
            stack_order[--top] = i;
            --head;
        }
    }
    return top;
}

SparseMatrix columns_to_csr(int n, const ColumnStore& cs, const std::vector<int>& pinv,
                            bool remap_rows) {
    SparseMatrix m(n, n);
    std::vector<int> count(n + 1, 0);
    std::vector<int> mapped(cs.rows.size());
    for (std::size_t k = 0; k < cs.rows.size(); ++k) {
        mapped[k] = remap_rows ? pinv[cs.rows[k]] : cs.rows[k];
        ++count[mapped[k] + 1];
    }
    for (int i = 0; i < n; ++i) count[i + 1] += count[i];
    m.row_offsets = count;
    m.col_indices.resize(cs.rows.size());
    m.values.resize(cs.rows.size());
    std::vector<int> next(count.begin(), count.end() - 1);
    for (int j = 0; j < n; ++j) {
        for (int p = cs.ptr[j]; p < cs.ptr[j + 1]; ++p) {
            int pos = next[mapped[p]]++;
            m.col_indices[pos] = j;
            m.values[pos] = cs.vals[p];
        }
    }
    // Columns were visited in order, so each row came out sorted already.
    return m;
}

} // namespace

LUFactorization lu_factor(const SparseMatrix& a, double pivot_threshold) {
    if (a.n_rows != a.n_cols)
        throw std::invalid_argument("lu_factor: matrix must be square");
    const int n = a.n_rows;
    pivot_threshold = std::clamp(pivot_threshold, 0.0, 1.0);

    // Column access to A.
    const SparseMatrix at = transpose(a);

    ColumnStore l(n, static_cast<std::size_t>(4 * a.nnz() + n));
    ColumnStore u(n, static_cast<std::size_t>(4 * a.nnz() + n));

    std::vector<int> pinv(n, -1);
    std::vector<double> x(n, 0.0);
    std::vector<int> pattern(n), work_stack(n), entry_pos(n);
    std::vector<char> visited(n, 0);

    for (int j = 0; j < n; ++j) {
        // Pattern of x = L \ A(:,j) by DFS, in topological order.
        int top = n;
        for (int p = at.row_offsets[j]; p < at.row_offsets[j + 1]; ++p) {
            int i = at.col_indices[p];
            if (!visited[i]) top = reach(l, pinv, i, top, pattern, work_stack, entry_pos, visited);
        }
        for (int p = at.row_offsets[j]; p < at.row_offsets[j + 1]; ++p)
            x[at.col_indices[p]] = at.values[p];

        // Numeric sparse triangular solve.
        for (int k = top; k < n; ++k) {
            int i = pattern[k];
            int col = pinv[i];
            if (col < 0) continue;
            double xi = x[i];
            if (xi == 0.0) continue;
            for (int p = l.ptr[col]; p < l.ptr[col + 1]; ++p) x[l.rows[p]] -= l.vals[p] * xi;
        }

        // Pivot: largest remaining entry, diagonal preferred within threshold.
        int ipiv = -1;
        double amax = 0.0;
        for (int k = top; k < n; ++k) {
            int i = pattern[k];
            if (pinv[i] < 0) {
                double t = std::abs(x[i]);
                if (t > amax) {
                    amax = t;
                    ipiv = i;
                }
            }
        }
        if (ipiv < 0 || amax == 0.0)
            throw std::runtime_error("lu_factor: matrix is singular, zero pivot in row " +
                                     std::to_string(j));
        if (pinv[j] < 0 && std::abs(x[j]) >= pivot_threshold * amax) ipiv = j;
        const double pivot = x[ipiv];
        pinv[ipiv] = j;

        for (int k = top; k < n; ++k) {
            int i = pattern[k];
            visited[i] = 0;
            const double xi = x[i];
            x[i] = 0.0;
            if (i == ipiv) continue;
            if (pinv[i] < 0) {
                if (xi != 0.0) l.push(i, xi / pivot);
            } else {
                if (xi != 0.0) u.push(pinv[i], xi);
            }
        }
        u.push(j, pivot);
        l.close_column();
        u.close_column();
    }

    LUFactorization f;
    f.lower = columns_to_csr(n, l, pinv, /*remap_rows=*/true);
    f.upper = columns_to_csr(n, u, pinv, /*remap_rows=*/false);
    f.row_permutation.resize(n);
    for (int i = 0; i < n; ++i) f.row_permutation[pinv[i]] = i;

    f.fill_stats.nnz_matrix = a.nnz();
    f.fill_stats.nnz_factors = f.lower.nnz() + f.upper.nnz();
    f.fill_stats.entries_per_dof_matrix = static_cast<double>(a.nnz()) / n;
    f.fill_stats.entries_per_dof_factors = static_cast<double>(f.fill_stats.nnz_factors) / n;
    return f;
}

std::vector<double> lu_solve(const LUFactorization& f, std::span<const double> b) {
    const int n = f.rows();
    if (static_cast<int>(b.size()) != n)
        throw std::invalid_argument("lu_solve: dimension mismatch");

    std::vector<double> y(n);
    for (int k = 0; k < n; ++k) y[k] = b[f.row_permutation[k]];

    const SparseMatrix& l = f.lower;
    for (int i = 0; i < n; ++i) {
        double s = y[i];
        for (int p = l.row_offsets[i]; p < l.row_offsets[i + 1]; ++p)
            s -= l.values[p] * y[l.col_indices[p]];
        y[i] = s;
    }
    const SparseMatrix& u = f.upper;
    for (int i = n - 1; i >= 0; --i) {
        double s = y[i];
        const int begin = u.row_offsets[i];
        double diag = u.values[begin]; // sorted row: diagonal comes first
        for (int p = begin + 1; p < u.row_offsets[i + 1]; ++p)
            s -= u.values[p] * y[u.col_indices[p]];
        y[i] = s / diag;
    }
    return y;
}

FillStats fill_in_report(const SparseMatrix& a) {
    return lu_factor(a).fill_stats;
}

} // namespace sdc
