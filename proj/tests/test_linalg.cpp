#include <doctest.h>

#include <cmath>
#include <random>

#include "fracms/error.hpp"
#include "fracms/linalg.hpp"
#include "oracles.hpp"

using namespace fracms;

TEST_CASE("spd_solve trivial systems") {
    const Vector b = Vector::LinSpaced(5, -2.0, 3.0);
    CHECK((spd_solve(SparseSym::identity(5), b) - b).norm() == 0.0);
    Matrix two(1, 1);
    two(0, 0) = 2.0;
    Vector four(1);
    four(0) = 4.0;
    CHECK(spd_solve(SparseSym::from_dense(two), four)(0) == doctest::Approx(2.0));
}

TEST_CASE("spd_solve matches dense elimination") {
    std::mt19937_64 rng(3);
    const Matrix a = oracle::random_spd(8, rng);
    const Vector b = oracle::random_matrix(8, 1, rng);
    const Vector x = spd_solve(SparseSym::from_dense(a), b);
    const auto ref = oracle::gauss_solve(oracle::to_dense(a), std::vector<double>(b.data(), b.data() + 8));
    for (int i = 0; i < 8; ++i) CHECK(x(i) == doctest::Approx(ref[i]).epsilon(1e-10));
}

TEST_CASE("spd_solve residual on random instances") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> size(1, 50);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = size(rng);
        const Matrix a = oracle::random_spd(n, rng, 0.1);
        const Vector b = oracle::random_matrix(n, 1, rng);
        const Vector x = spd_solve(SparseSym::from_dense(a), b);
        CHECK((a * x - b).norm() <= 1e-10 * b.norm());
    }
}

TEST_CASE("non-SPD matrices are rejected") {
    Matrix a(2, 2);
    a << 1.0, 2.0, 2.0, 1.0;
    CHECK_THROWS_AS(spd_solve(SparseSym::from_dense(a), Vector::Ones(2)), SolverError);
    Matrix ns(2, 2);
    ns << 1.0, 2.0, 0.0, 1.0;
    CHECK_THROWS_AS(SparseSym::from_dense(ns), InvalidArgument);
}

TEST_CASE("gen_eig_smallest trivial pairs") {
    const auto p = gen_eig_smallest(Matrix::Identity(4, 4), Matrix::Identity(4, 4), 3);
    REQUIRE(p.count() == 3);
    for (int i = 0; i < 3; ++i) CHECK(p.values(i) == doctest::Approx(1.0));
    Matrix a = Matrix::Zero(3, 3);
    a.diagonal() << 3.0, 1.0, 2.0;
    const auto q = gen_eig_smallest(a, Matrix::Identity(3, 3), 2);
    CHECK(q.values(0) == doctest::Approx(1.0));
    CHECK(q.values(1) == doctest::Approx(2.0));
}

TEST_CASE("gen_eig_smallest matches inertia bisection") {
    std::mt19937_64 rng(17);
    for (int n = 1; n <= 6; ++n) {
        const Matrix b = oracle::random_spd(n, rng);
        const Matrix g = oracle::random_matrix(n, n, rng);
        const Matrix a = g * g.transpose();
        const auto p = gen_eig_smallest(a, b, n);
        const auto ref = oracle::pencil_eigenvalues(oracle::to_dense(a), oracle::to_dense(b), -1.0, 1e3);
        for (int i = 0; i < n; ++i) CHECK(std::abs(p.values(i) - ref[i]) <= 1e-9 * std::max(1.0, ref[i]));
        const Matrix gram = p.vectors.transpose() * b * p.vectors;
        CHECK((gram - Matrix::Identity(n, n)).norm() <= 1e-10);
        CHECK((a * p.vectors - b * p.vectors * p.values.asDiagonal()).norm() <= 1e-9 * (1.0 + a.norm()));
    }
}

TEST_CASE("gen_eig_smallest scaling invariance and errors") {
    std::mt19937_64 rng(19);
    const Matrix b = oracle::random_spd(6, rng);
    const Matrix g = oracle::random_matrix(6, 6, rng);
    const Matrix a = g * g.transpose();
    const auto p = gen_eig_smallest(a, b, 4);
    const auto q = gen_eig_smallest(Matrix(1e5 * a), Matrix(1e5 * b), 4);
    for (int i = 0; i < 4; ++i) CHECK(oracle::rel_diff(q.values(i), p.values(i)) <= 1e-10);
    CHECK_THROWS_AS(gen_eig_smallest(a, b, 7), InvalidArgument);
    Matrix indefinite = Matrix::Identity(6, 6);
    indefinite(0, 0) = -1.0;
    CHECK_THROWS_AS(gen_eig_smallest(a, indefinite, 2), SolverError);
    const auto sp = gen_eig_smallest(SparseSym::from_dense(a), SparseSym::from_dense(b), 4);
    CHECK((sp.values - p.values).norm() <= 1e-12 * p.values.norm());
}

TEST_CASE("kkt_solve hand example") {
    Matrix c(1, 2);
    c << 1.0, 0.0;
    Vector g(1);
    g << 1.0;
    const auto s = kkt_solve(SparseSym::identity(2), c, Vector::Zero(2), g);
    CHECK(s.x(0) == doctest::Approx(1.0));
    CHECK(std::abs(s.x(1)) < 1e-14);
    CHECK(s.multipliers(0) == doctest::Approx(-1.0));
}

TEST_CASE("kkt_solve with no constraints is an SPD solve") {
    std::mt19937_64 rng(23);
    const Matrix a = oracle::random_spd(5, rng);
    const Vector b = oracle::random_matrix(5, 1, rng);
    const auto s = kkt_solve(SparseSym::from_dense(a), Matrix(0, 5), b, Vector(0));
    CHECK((s.x - spd_solve(SparseSym::from_dense(a), b)).norm() <= 1e-12 * s.x.norm());
    CHECK(s.multipliers.size() == 0);
}

TEST_CASE("kkt_solve matches dense elimination of the saddle system") {
    std::mt19937_64 rng(29);
    for (int n = 2; n <= 10; ++n) {
        const int m = n / 2;
        const Matrix a = oracle::random_spd(n, rng);
        const Matrix c = oracle::random_matrix(m, n, rng);
        const Vector b = oracle::random_matrix(n, 1, rng);
        const Vector g = oracle::random_matrix(m, 1, rng);
        const auto s = kkt_solve(SparseSym::from_dense(a), c, b, g);

        oracle::Dense k(n + m, std::vector<double>(n + m, 0.0));
        std::vector<double> rhs(n + m);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) k[i][j] = a(i, j);
            for (int j = 0; j < m; ++j) k[i][n + j] = c(j, i), k[n + j][i] = c(j, i);
            rhs[i] = b(i);
        }
        for (int j = 0; j < m; ++j) rhs[n + j] = g(j);
        const auto ref = oracle::gauss_solve(k, rhs);
        for (int i = 0; i < n; ++i) CHECK(std::abs(s.x(i) - ref[i]) <= 1e-9 * (1.0 + std::abs(ref[i])));
        for (int j = 0; j < m; ++j)
            CHECK(std::abs(s.multipliers(j) - ref[n + j]) <= 1e-9 * (1.0 + std::abs(ref[n + j])));
        CHECK((a * s.x + c.transpose() * s.multipliers - b).norm() < 1e-10);
        CHECK((c * s.x - g).norm() < 1e-10);
    }
}

TEST_CASE("kkt_solve handles A singular off ker(C)") {
    // A = diag(0, 1) is SPD on ker(C) for C = (1 0).
    Matrix a = Matrix::Zero(2, 2);
    a(1, 1) = 1.0;
    Matrix c(1, 2);
    c << 1.0, 0.0;
    Vector b(2), g(1);
    b << 0.5, 2.0;
    g << 3.0;
    const auto s = kkt_solve(SparseSym::from_dense(a), c, b, g);
    CHECK(s.x(0) == doctest::Approx(3.0));
    CHECK(s.x(1) == doctest::Approx(2.0));
    CHECK(s.multipliers(0) == doctest::Approx(0.5));
}

TEST_CASE("rank-deficient constraints name the offending row") {
    Matrix c(3, 4);
    c << 1, 0, 0, 0,
         0, 1, 0, 0,
         1, 1, 0, 0;
    try {
        kkt_solve(SparseSym::identity(4), c, Vector::Zero(4), Vector::Ones(3));
        FAIL("expected RankDeficientError");
    } catch (const RankDeficientError& e) {
        CHECK(e.constraint() == 2);
    }
}

TEST_CASE("gamma function") {
    CHECK(gamma_fn(1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(gamma_fn(2.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(oracle::rel_diff(gamma_fn(1.5), std::sqrt(M_PI) / 2.0) <= 1e-12);
    CHECK(oracle::rel_diff(gamma_fn(1.5), 0.886226925452758) <= 1e-12);
    for (int i = 0; i < 20; ++i) {
        const double x = 0.5 + (i + 0.5) / 20.0;
        CHECK(oracle::rel_diff(gamma_fn(x + 1.0), x * gamma_fn(x)) <= 1e-11);
    }
    CHECK_THROWS_AS(gamma_fn(0.5), InvalidArgument);
    CHECK_THROWS_AS(gamma_fn(2.6), InvalidArgument);
}
