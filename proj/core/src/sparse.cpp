#include "sdc/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace sdc {

double SparseMatrix::at(int i, int j) const {
    auto cols = row_cols(i);
    auto it = std::lower_bound(cols.begin(), cols.end(), j);
    if (it == cols.end() || *it != j) return 0.0;
    return values[row_offsets[i] + (it - cols.begin())];
}

void SparseMatrix::check_invariants() const {
    if (static_cast<int>(row_offsets.size()) != n_rows + 1)
        throw std::invalid_argument("SparseMatrix: row_offsets length mismatch");
    if (row_offsets.front() != 0)
        throw std::invalid_argument("SparseMatrix: row_offsets[0] != 0");
    for (int i = 0; i < n_rows; ++i) {
        if (row_offsets[i + 1] < row_offsets[i])
            throw std::invalid_argument("SparseMatrix: row_offsets not nondecreasing");
        for (int k = row_offsets[i]; k < row_offsets[i + 1]; ++k) {
            if (col_indices[k] < 0 || col_indices[k] >= n_cols)
                throw std::invalid_argument("SparseMatrix: column index out of range");
            if (k > row_offsets[i] && col_indices[k] <= col_indices[k - 1])
                throw std::invalid_argument("SparseMatrix: columns not strictly increasing");
        }
    }
    if (row_offsets.back() != static_cast<int>(values.size()) ||
        values.size() != col_indices.size())
        throw std::invalid_argument("SparseMatrix: stored value count mismatch");
}

SparseMatrix SparseMatrix::identity(int n) {
    SparseMatrix a(n, n);
    a.row_offsets.resize(n + 1);
    a.col_indices.resize(n);
    a.values.assign(n, 1.0);
    for (int i = 0; i <= n; ++i) a.row_offsets[i] = i;
    for (int i = 0; i < n; ++i) a.col_indices[i] = i;
    return a;
}

void CooBuilder::add(int i, int j, double v) {
    if (i < 0 || i >= n_rows_ || j < 0 || j >= n_cols_)
        throw std::invalid_argument("CooBuilder::add: index out of range");
    entries_.push_back({i, j, v});
}

SparseMatrix CooBuilder::finalize() {
    // stable: duplicates are summed in insertion order, keeping assembly
    // results bit-reproducible
    std::stable_sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    SparseMatrix m(n_rows_, n_cols_);
    m.col_indices.reserve(entries_.size());
    m.values.reserve(entries_.size());
    std::size_t k = 0;
    for (int i = 0; i < n_rows_; ++i) {
        while (k < entries_.size() && entries_[k].row == i) {
            int col = entries_[k].col;
            double sum = 0.0;
            while (k < entries_.size() && entries_[k].row == i && entries_[k].col == col) {
                sum += entries_[k].val;
                ++k;
            }
            m.col_indices.push_back(col);
            m.values.push_back(sum);
        }
        m.row_offsets[i + 1] = static_cast<int>(m.col_indices.size());
    }
    return m;
}

void spmv(const SparseMatrix& a, std::span<const double> x, std::span<double> y) {
    if (static_cast<int>(x.size()) != a.n_cols || static_cast<int>(y.size()) != a.n_rows)
        throw std::invalid_argument("spmv: dimension mismatch");
    for (int i = 0; i < a.n_rows; ++i) {
        double sum = 0.0;
        for (int k = a.row_offsets[i]; k < a.row_offsets[i + 1]; ++k)
            sum += a.values[k] * x[a.col_indices[k]];
        y[i] = sum;
    }
}

std::vector<double> spmv(const SparseMatrix& a, const std::vector<double>& x) {
    std::vector<double> y(a.n_rows);
    spmv(a, x, y);
    return y;
}

void spmv_add(const SparseMatrix& a, std::span<const double> x, std::span<double> y,
              double alpha) {
    if (static_cast<int>(x.size()) != a.n_cols || static_cast<int>(y.size()) != a.n_rows)
        throw std::invalid_argument("spmv_add: dimension mismatch");
    for (int i = 0; i < a.n_rows; ++i) {
        double sum = 0.0;
        for (int k = a.row_offsets[i]; k < a.row_offsets[i + 1]; ++k)
            sum += a.values[k] * x[a.col_indices[k]];
        y[i] += alpha * sum;
    }
}

SparseMatrix submatrix(const SparseMatrix& a, int row_begin, int row_end,
                       int col_begin, int col_end) {
    if (row_begin < 0 || row_end > a.n_rows || col_begin < 0 || col_end > a.n_cols ||
        row_begin > row_end || col_begin > col_end)
        throw std::invalid_argument("submatrix: bad range");
    SparseMatrix m(row_end - row_begin, col_end - col_begin);
    for (int i = row_begin; i < row_end; ++i) {
        for (int k = a.row_offsets[i]; k < a.row_offsets[i + 1]; ++k) {
            int j = a.col_indices[k];
            if (j >= col_begin && j < col_end) {
                m.col_indices.push_back(j - col_begin);
                m.values.push_back(a.values[k]);
            }
        }
        m.row_offsets[i - row_begin + 1] = static_cast<int>(m.col_indices.size());
    }
    return m;
}

SparseMatrix transpose(const SparseMatrix& a) {
    SparseMatrix t(a.n_cols, a.n_rows);
    std::vector<int> count(a.n_cols + 1, 0);
    for (int c : a.col_indices) ++count[c + 1];
    for (int j = 0; j < a.n_cols; ++j) count[j + 1] += count[j];
    t.row_offsets = count;
    t.col_indices.resize(a.nnz());
    t.values.resize(a.nnz());
    std::vector<int> next(count.begin(), count.end() - 1);
    for (int i = 0; i < a.n_rows; ++i) {
        for (int k = a.row_offsets[i]; k < a.row_offsets[i + 1]; ++k) {
            int pos = next[a.col_indices[k]]++;
            t.col_indices[pos] = i;
            t.values[pos] = a.values[k];
        }
    }
    return t;
}

SparseMatrix permute_symmetric(const SparseMatrix& a, const std::vector<int>& perm) {
    if (a.n_rows != a.n_cols || static_cast<int>(perm.size()) != a.n_rows)
        throw std::invalid_argument("permute_symmetric: size mismatch");
    std::vector<int> inv(perm.size());
    for (std::size_t k = 0; k < perm.size(); ++k) inv[perm[k]] = static_cast<int>(k);
    CooBuilder b(a.n_rows, a.n_cols);
    b.reserve(a.nnz());
    for (int i = 0; i < a.n_rows; ++i)
        for (int k = a.row_offsets[i]; k < a.row_offsets[i + 1]; ++k)
            b.add(inv[i], inv[a.col_indices[k]], a.values[k]);
    return b.finalize();
}

void write_matrix_market(const SparseMatrix& a, std::ostream& out) {
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << a.n_rows << ' ' << a.n_cols << ' ' << a.nnz() << '\n';
    out.precision(17);
    for (int i = 0; i < a.n_rows; ++i)
        for (int k = a.row_offsets[i]; k < a.row_offsets[i + 1]; ++k)
            out << i + 1 << ' ' << a.col_indices[k] + 1 << ' ' << a.values[k] << '\n';
}

void write_matrix_market(const SparseMatrix& a, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    write_matrix_market(a, f);
}

SparseMatrix read_matrix_market(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("%%MatrixMarket", 0) != 0)
        throw std::runtime_error("not a Matrix Market file");
    if (line.find("coordinate") == std::string::npos ||
        line.find("general") == std::string::npos)
        throw std::runtime_error("unsupported Matrix Market variant: " + line);
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] != '%') break;
    }
    std::istringstream head(line);
    int rows = 0, cols = 0;
    std::int64_t nnz = 0;
    if (!(head >> rows >> cols >> nnz))
        throw std::runtime_error("bad Matrix Market size line");
    CooBuilder b(rows, cols);
    b.reserve(static_cast<std::size_t>(nnz));
    for (std::int64_t k = 0; k < nnz; ++k) {
        int i, j;
        double v;
        if (!(in >> i >> j >> v)) throw std::runtime_error("truncated Matrix Market data");
        b.add(i - 1, j - 1, v);
    }
    return b.finalize();
}

SparseMatrix read_matrix_market_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    return read_matrix_market(f);
}

double dot(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void scale(std::span<double> x, double alpha) {
    for (double& v : x) v *= alpha;
}

} // namespace sdc
