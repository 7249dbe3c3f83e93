#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dense_oracles.hpp"
#include "sdc/lu.hpp"
#include "sdc/sparse.hpp"

using namespace sdc;

namespace {

SparseMatrix diag(const std::vector<double>& d) {
    CooBuilder b(static_cast<int>(d.size()), static_cast<int>(d.size()));
    for (std::size_t i = 0; i < d.size(); ++i) b.add(static_cast<int>(i), static_cast<int>(i), d[i]);
    return b.finalize();
}

SparseMatrix tridiagonal(int n, double lo, double di, double hi) {
    CooBuilder b(n, n);
    for (int i = 0; i < n; ++i) {
        if (i > 0) b.add(i, i - 1, lo);
        b.add(i, i, di);
        if (i + 1 < n) b.add(i, i + 1, hi);
    }
    return b.finalize();
}

// ||P A - L U||_F via dense arithmetic (test sizes are small).
double factorization_residual_fro(const SparseMatrix& a, const LUFactorization& f) {
    auto da = oracle::from_sparse(a);
    auto dl = oracle::from_sparse(f.lower);
    auto du = oracle::from_sparse(f.upper);
    const int n = a.n_rows;
    double err2 = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double lu = du(i, j); // unit diagonal of L
            for (int k = 0; k < i; ++k) lu += dl(i, k) * du(k, j);
            double pa = da(f.row_permutation[i], j);
            err2 += (pa - lu) * (pa - lu);
        }
    }
    return std::sqrt(err2);
}

double frobenius(const SparseMatrix& a) {
    double s = 0.0;
    for (double v : a.values) s += v * v;
    return std::sqrt(s);
}

} // namespace

TEST_CASE("diagonal matrix factors trivially") {
    auto a = diag({2.0, 3.0, 4.0});
    auto f = lu_factor(a);
    CHECK(f.lower.nnz() == 0);
    CHECK(f.upper.nnz() == 3);
    CHECK(f.fill_stats.nnz_factors == 3);
    CHECK(f.upper.at(0, 0) == 2.0);
    CHECK(f.upper.at(1, 1) == 3.0);
    CHECK(f.upper.at(2, 2) == 4.0);
    CHECK(f.row_permutation == std::vector<int>{0, 1, 2});
}

TEST_CASE("lu_solve trivial cases") {
    auto fi = lu_factor(SparseMatrix::identity(2));
    auto x = lu_solve(fi, std::vector<double>{7.0, 8.0});
    CHECK(x[0] == 7.0);
    CHECK(x[1] == 8.0);

    auto fd = lu_factor(diag({2.0, 4.0}));
    auto y = lu_solve(fd, std::vector<double>{2.0, 4.0});
    CHECK(y[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(y[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("dense random systems match the dense oracle") {
    for (unsigned seed : {11u, 22u, 33u}) {
        auto a = oracle::random_dominant(10, 0.9, seed);
        auto b = oracle::random_vector(10, seed + 1);
        auto f = lu_factor(a);
        auto x = lu_solve(f, b);
        auto xref = oracle::solve(oracle::from_sparse(a), b);
        double num = 0.0, den = 0.0;
        for (int i = 0; i < 10; ++i) {
            num += (x[i] - xref[i]) * (x[i] - xref[i]);
            den += xref[i] * xref[i];
        }
        CHECK(std::sqrt(num / den) < 1e-12);
    }
}

TEST_CASE("factorization residual stays tiny on random instances") {
    for (int n : {20, 80, 200}) {
        auto a = oracle::random_dominant(n, n <= 20 ? 0.5 : 0.05, 400 + n);
        auto f = lu_factor(a);
        CHECK(factorization_residual_fro(a, f) <= 1e-10 * frobenius(a));
    }
}

TEST_CASE("pivoting handles a zero diagonal") {
    // [[0, 1], [1, 0]] requires a row swap.
    CooBuilder b(2, 2);
    b.add(0, 1, 1.0);
    b.add(1, 0, 1.0);
    auto f = lu_factor(b.finalize());
    auto x = lu_solve(f, std::vector<double>{3.0, 5.0});
    CHECK(x[0] == doctest::Approx(5.0));
    CHECK(x[1] == doctest::Approx(3.0));
}

TEST_CASE("singular matrix raises an error naming the failing row") {
    CooBuilder b(3, 3);
    b.add(0, 0, 1.0);
    b.add(1, 1, 1.0);
    // row/column 2 empty -> structurally singular
    b.add(2, 1, 0.0);
    bool threw = false;
    try {
        lu_factor(b.finalize());
    } catch (const std::runtime_error& e) {
        threw = true;
        CHECK(std::string(e.what()).find("2") != std::string::npos);
    }
    CHECK(threw);
}

TEST_CASE("fill_in_report identity and tridiagonal") {
    auto id = SparseMatrix::identity(25);
    auto s = fill_in_report(id);
    CHECK(s.entries_per_dof_matrix == 1.0);
    CHECK(s.entries_per_dof_factors == 1.0);

    // 1D Laplacian: no fill beyond the band.
    auto t = tridiagonal(100, -1.0, 2.0, -1.0);
    auto st = fill_in_report(t);
    CHECK(st.nnz_matrix == 298);
    CHECK(st.entries_per_dof_factors <= 3.0);
}

TEST_CASE("entries per dof is exactly nnz over rows") {
    auto a = oracle::random_dominant(17, 0.3, 77);
    auto s = fill_in_report(a);
    CHECK(s.entries_per_dof_matrix == static_cast<double>(s.nnz_matrix) / 17.0);
    CHECK(s.entries_per_dof_factors == static_cast<double>(s.nnz_factors) / 17.0);
}
