#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "modcs/linalg.hpp"
#include "modcs/rng.hpp"

using namespace modcs;

namespace {

DenseMatrix random_matrix(std::size_t n, std::size_t m, std::uint64_t seed) {
    Rng rng(seed);
    DenseMatrix a(n, m);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < m; ++c) a(r, c) = rng.gaussian();
    return a;
}

// Power iteration on A'A: independent route to the largest singular value.
double power_iteration_top(const DenseMatrix& a, std::size_t iters = 4000) {
    Rng rng(99);
    Vector v(a.cols());
    for (auto& x : v) x = rng.gaussian();
    double lambda = 0.0;
    for (std::size_t k = 0; k < iters; ++k) {
        Vector w = a.tmul(a.mul(v));
        lambda = norm2(w);
        if (lambda == 0.0) return 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = w[i] / lambda;
    }
    return std::sqrt(lambda);
}

// Inverse power iteration via repeated normal-equation solves: independent
// route to the smallest singular value.
double power_iteration_bottom(const DenseMatrix& a, std::size_t iters = 4000) {
    DenseMatrix g = gram(a);
    Cholesky ch;
    ch.factor(g);
    Rng rng(7);
    Vector v(a.cols());
    for (auto& x : v) x = rng.gaussian();
    double mu = 0.0;
    for (std::size_t k = 0; k < iters; ++k) {
        Vector w = ch.solve(v);
        mu = norm2(w);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = w[i] / mu;
    }
    return std::sqrt(1.0 / mu);
}

// Gaussian elimination on the normal equations, fully independent of the QR path.
Vector normal_equations_solve(const DenseMatrix& a, const Vector& y) {
    const std::size_t k = a.cols();
    DenseMatrix g = gram(a);
    Vector rhs = a.tmul(y);
    // augmented elimination with partial pivoting
    std::vector<std::vector<double>> aug(k, std::vector<double>(k + 1));
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) aug[i][j] = g(i, j);
        aug[i][k] = rhs[i];
    }
    for (std::size_t col = 0; col < k; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < k; ++r)
            if (std::abs(aug[r][col]) > std::abs(aug[piv][col])) piv = r;
        std::swap(aug[piv], aug[col]);
        for (std::size_t r = col + 1; r < k; ++r) {
            const double f = aug[r][col] / aug[col][col];
            for (std::size_t j = col; j <= k; ++j) aug[r][j] -= f * aug[col][j];
        }
    }
    Vector x(k);
    for (std::size_t i = k; i-- > 0;) {
        double s = aug[i][k];
        for (std::size_t j = i + 1; j < k; ++j) s -= aug[i][j] * x[j];
        x[i] = s / aug[i][i];
    }
    return x;
}

} // namespace

TEST_CASE("columns extracts by index set") {
    DenseMatrix id3 = DenseMatrix::identity(3);
    DenseMatrix sub = columns(id3, IndexSet{0, 2});
    CHECK(sub.rows() == 3);
    CHECK(sub.cols() == 2);
    CHECK(sub(0, 0) == 1.0);
    CHECK(sub(2, 1) == 1.0);
    CHECK(sub(1, 0) == 0.0);

    CHECK(columns(id3, IndexSet{}).cols() == 0);

    DenseMatrix a(2, 3);
    a(0, 0) = 1; a(0, 1) = 2; a(0, 2) = 3;
    a(1, 0) = 4; a(1, 1) = 5; a(1, 2) = 6;
    DenseMatrix mid = columns(a, IndexSet{1});
    CHECK(mid(0, 0) == 2.0);
    CHECK(mid(1, 0) == 5.0);

    CHECK_THROWS_AS(columns(a, IndexSet{3}), input_error);
}

TEST_CASE("columns of a disjoint union equals merged column sets") {
    DenseMatrix a = random_matrix(5, 8, 3);
    IndexSet t1{0, 3, 6};
    IndexSet t2{1, 4};
    IndexSet u = t1.set_union(t2);
    DenseMatrix au = columns(a, u);
    for (std::size_t k = 0; k < u.size(); ++k) {
        Vector expected = a.column(u[k]);
        for (std::size_t r = 0; r < a.rows(); ++r) CHECK(au(r, k) == expected[r]);
    }
}

TEST_CASE("singular value extremes on known matrices") {
    CHECK(min_singular_value(DenseMatrix::identity(3)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(operator_norm(DenseMatrix::identity(4)) == doctest::Approx(1.0).epsilon(1e-12));

    DenseMatrix d(2, 2);
    d(0, 0) = 2.0;
    d(1, 1) = 1.0;
    CHECK(min_singular_value(d) == doctest::Approx(1.0).epsilon(1e-12));

    DenseMatrix d2(2, 2);
    d2(0, 0) = 3.0;
    d2(1, 1) = 1.0;
    CHECK(operator_norm(d2) == doctest::Approx(3.0).epsilon(1e-12));

    DenseMatrix empty(3, 0);
    CHECK(std::isinf(min_singular_value(empty)));
    CHECK(operator_norm(empty) == 0.0);
}

TEST_CASE("singular values agree with power-iteration oracles") {
    for (std::uint64_t seed : {11u, 12u, 13u, 14u, 15u}) {
        DenseMatrix a = random_matrix(5, 3, seed);
        CHECK(operator_norm(a) == doctest::Approx(power_iteration_top(a)).epsilon(1e-8));
        CHECK(min_singular_value(a) == doctest::Approx(power_iteration_bottom(a)).epsilon(1e-8));
    }
    DenseMatrix sq = random_matrix(4, 4, 77);
    CHECK(operator_norm(sq) == doctest::Approx(power_iteration_top(sq)).epsilon(1e-8));
}

TEST_CASE("min_singular_value <= operator_norm") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        DenseMatrix a = random_matrix(6, 4, seed);
        CHECK(min_singular_value(a) <= operator_norm(a) + 1e-12);
    }
}

TEST_CASE("least squares basics") {
    DenseMatrix id = DenseMatrix::identity(4);
    Vector y{1, -2, 3, 0.5};
    Vector b = least_squares(id, y);
    for (std::size_t i = 0; i < 4; ++i) CHECK(b[i] == doctest::Approx(y[i]).epsilon(1e-12));

    DenseMatrix col(3, 1);
    col(0, 0) = 1; col(1, 0) = 2; col(2, 0) = -1;
    Vector y2{2, 4, -2};
    Vector b2 = least_squares(col, y2);
    CHECK(b2[0] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("least squares matches the normal-equations oracle") {
    for (std::uint64_t seed : {21u, 22u, 23u}) {
        DenseMatrix a = random_matrix(6, 3, seed);
        Rng rng(seed + 100);
        Vector y(6);
        for (auto& v : y) v = rng.gaussian();
        Vector b = least_squares(a, y);
        Vector oracle = normal_equations_solve(a, y);
        for (std::size_t i = 0; i < 3; ++i)
            CHECK(b[i] == doctest::Approx(oracle[i]).epsilon(1e-8));

        // residual orthogonal to range(A)
        Vector r = a.mul(b);
        for (std::size_t i = 0; i < y.size(); ++i) r[i] = y[i] - r[i];
        Vector atr = a.tmul(r);
        CHECK(norm_inf(atr) < 1e-8);
    }
}

TEST_CASE("least squares residual is minimal against random probes") {
    DenseMatrix a = random_matrix(7, 4, 31);
    Rng rng(32);
    Vector y(7);
    for (auto& v : y) v = rng.gaussian();
    Vector b = least_squares(a, y);
    Vector r = a.mul(b);
    for (std::size_t i = 0; i < y.size(); ++i) r[i] = y[i] - r[i];
    const double best = norm2(r);
    for (int probe = 0; probe < 100; ++probe) {
        Vector bp = b;
        for (auto& v : bp) v += 0.3 * rng.gaussian();
        Vector rp = a.mul(bp);
        for (std::size_t i = 0; i < y.size(); ++i) rp[i] = y[i] - rp[i];
        CHECK(norm2(rp) >= best - 1e-10);
    }
}

TEST_CASE("least squares rejects rank-deficient input") {
    DenseMatrix a(3, 2);
    a(0, 0) = 1; a(0, 1) = 2;
    a(1, 0) = 2; a(1, 1) = 4;
    a(2, 0) = -1; a(2, 1) = -2;
    Vector y{1, 0, 1};
    CHECK_THROWS_AS(least_squares(a, y), singular_error);

    DenseMatrix wide(2, 3);
    CHECK_THROWS_AS(least_squares(wide, Vector{1, 2}), singular_error);
}

TEST_CASE("operations are deterministic") {
    DenseMatrix a = random_matrix(6, 5, 41);
    auto s1 = singular_values(a);
    auto s2 = singular_values(a);
    CHECK(s1 == s2);
    Rng rng(5);
    Vector y(6);
    for (auto& v : y) v = rng.gaussian();
    DenseMatrix a2 = columns(a, IndexSet{0, 2, 4});
    CHECK(least_squares(a2, y) == least_squares(a2, y));
}
