#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "fracms/error.hpp"
#include "fracms/fields.hpp"
#include "fracms/stability.hpp"
#include "oracles.hpp"

using namespace fracms;

namespace {

ReducedSystem dense_system(const Matrix& m, const Matrix& a, int n1) {
    return reduce(SparseSym::from_dense(a), SparseSym::from_dense(m), ReducedBasis::identity(static_cast<int>(m.rows())),
                  n1);
}

FineLoad constant_load(const Vector& f) { return FineLoad{[f](double) { return f; }, true}; }

/// Largest |(u1, u2)| / (|u1| |u2|) over a grid of directions in two planes,
/// refined around the best cell.
double grid_search_gamma(const Matrix& b1, const Matrix& b2, const Matrix& m) {
    auto cosine = [&](double t, double p) {
        const Vector u1 = b1 * Eigen::Vector2d(std::cos(t), std::sin(t));
        const Vector u2 = b2 * Eigen::Vector2d(std::cos(p), std::sin(p));
        return std::abs(u1.dot(m * u2)) / std::sqrt(u1.dot(m * u1) * u2.dot(m * u2));
    };
    double best = 0.0, bt = 0.0, bp = 0.0;
    const int n = 400;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double t = M_PI * i / n, p = M_PI * j / n;
            const double c = cosine(t, p);
            if (c > best) best = c, bt = t, bp = p;
        }
    double step = M_PI / n;
    for (int level = 0; level < 30; ++level) {
        for (int i = -10; i <= 10; ++i)
            for (int j = -10; j <= 10; ++j) {
                const double t = bt + step * i / 10.0, p = bp + step * j / 10.0;
                const double c = cosine(t, p);
                if (c > best) best = c, bt = t, bp = p;
            }
        step /= 5.0;
    }
    return best;
}

}  // namespace


TEST_CASE("lambda_max examples") {
    std::mt19937_64 rng(73);
    const Matrix m = oracle::random_spd(7, rng);
    CHECK(lambda_max(m, m) == doctest::Approx(1.0).epsilon(1e-12));
    Matrix a = Matrix::Zero(2, 2);
    a.diagonal() << 1.0, 9.0;
    CHECK(lambda_max(a, Matrix::Identity(2, 2)) == doctest::Approx(9.0).epsilon(1e-14));
    const Matrix b = oracle::random_spd(10, rng), g = oracle::random_matrix(10, 10, rng);
    const Matrix ak = g * g.transpose();
    const auto ref = oracle::pencil_eigenvalues(oracle::to_dense(ak), oracle::to_dense(b), -1.0, 1e4);
    CHECK(oracle::rel_diff(lambda_max(ak, b), ref.back()) <= 1e-8);
    CHECK(oracle::rel_diff(lambda_max_lanczos(SparseSym::from_dense(ak), SparseSym::from_dense(b)), ref.back()) <= 1e-8);
}

TEST_CASE("Lanczos agrees with the dense eigensolver on assembled operators") {
    const auto g = build_grids(4, 6);
    FieldSpec spec;
    spec.contrast = 1e5;
    const auto ops = assemble_fine(g, gen_field(spec, g.fine_n()));
    const double dense = lambda_max(ops.stiffness.dense(), ops.mass.dense());
    CHECK(oracle::rel_diff(lambda_max_lanczos(ops.stiffness, ops.mass), dense) <= 1e-8);
}

TEST_CASE("gamma limiting cases") {
    std::mt19937_64 rng(79);
    const Matrix m11 = oracle::random_spd(3, rng), m22 = oracle::random_spd(2, rng);
    const auto zero = estimate_gamma(m11, Matrix::Zero(3, 2), m22);
    CHECK(zero.gamma == 0.0);
    CHECK(zero.min_ratio == doctest::Approx(1.0).epsilon(1e-12));
    const Matrix one = Matrix::Constant(1, 1, 2.0);
    const auto same = estimate_gamma(one, one, one);
    CHECK(same.gamma == doctest::Approx(1.0).epsilon(1e-12));
    StabilityReport r;
    r.gamma = same.gamma;
    CHECK_FALSE(r.gamma_valid());
    CHECK_THROWS_AS(dt_max_partial(0.5, 1.0, 1.0), InvalidArgument);
}

TEST_CASE("gamma matches a grid search over two planes") {
    std::mt19937_64 rng(83);
    for (int trial = 0; trial < 3; ++trial) {
        const Matrix b1 = oracle::random_matrix(6, 2, rng), b2 = oracle::random_matrix(6, 2, rng);
        const Matrix m = oracle::random_spd(6, rng);
        const auto g = estimate_gamma(b1.transpose() * m * b1, b1.transpose() * m * b2, b2.transpose() * m * b2);
        CHECK(g.gamma == doctest::Approx(grid_search_gamma(b1, b2, m)).epsilon(1e-9));
        // The smallest ratio ||u1 + u2||^2 / ||u2||^2 is 1 - gamma^2.
        CHECK(g.min_ratio == doctest::Approx(1.0 - g.gamma * g.gamma).epsilon(1e-9));
        for (int s = 0; s < 200; ++s) {
            const Vector u1 = b1 * oracle::random_matrix(2, 1, rng), u2 = b2 * oracle::random_matrix(2, 1, rng);
            const Vector sum = u1 + u2;
            CHECK(sum.dot(m * sum) / u2.dot(m * u2) >= (1.0 - g.gamma * g.gamma) - 1e-8);
        }
    }
}

TEST_CASE("maximal time steps") {
    CHECK(dt_max_explicit(0.5, 1.0) == doctest::Approx(1.0 / M_PI).epsilon(1e-13));
    CHECK(dt_max_partial(0.5, 0.0, 1.0) == doctest::Approx(4.0 / M_PI).epsilon(1e-13));
    for (double alpha : {0.3, 0.7, 0.9}) {
        const double lam = 123.0;
        CHECK(dt_max_explicit(alpha, 4 * lam) == doctest::Approx(std::pow(4.0, -1.0 / alpha) * dt_max_explicit(alpha, lam)).epsilon(1e-12));
        CHECK(dt_max_partial(alpha, 0.0, lam) == doctest::Approx(std::pow(2.0, 1.0 / alpha) * dt_max_explicit(alpha, lam)).epsilon(1e-12));
        // alpha0 at the bound equals the threshold.
        const double dt = dt_max_partial(alpha, 0.4, lam);
        CHECK(make_kernel(alpha, dt, 1).alpha0() * lam == doctest::Approx(1.0 - 0.16).epsilon(1e-12));
    }
    CHECK(dt_max_partial(0.9, 1.0 - 1e-9, 1.0) < 1e-8);
    CHECK(std::isinf(dt_max_explicit(0.5, 0.0)));
    CHECK(std::isinf(dt_max_partial(0.5, 0.2, 0.0)));
}

TEST_CASE("energy audit") {
    std::mt19937_64 rng(89);
    const Matrix m = oracle::random_spd(5, rng), a = oracle::random_spd(5, rng, 0.0);
    const auto sys = dense_system(m, a, 5);
    const auto k = make_kernel(0.4, 1e-2, 40);

    const auto zero = run_scheme(Scheme::implicit, sys, k, Vector::Zero(5), FineLoad::zero(5));
    const auto z = energy_audit(zero.trajectory, sys, FineLoad::zero(5), k);
    CHECK(z.slack == 0.0);
    CHECK(z.lhs == 0.0);

    const Vector u0 = oracle::random_matrix(5, 1, rng), f = oracle::random_matrix(5, 1, rng);
    const auto run = run_scheme(Scheme::implicit, sys, k, u0, constant_load(f));
    const auto e1 = energy_audit(run.trajectory, sys, constant_load(f), k);
    CHECK(e1.min_slack >= 0.0);
    const auto scaled = run_scheme(Scheme::implicit, sys, k, 3.0 * u0, constant_load(3.0 * f));
    const auto e3 = energy_audit(scaled.trajectory, sys, constant_load(3.0 * f), k);
    CHECK(e3.slack == doctest::Approx(9.0 * e1.slack).epsilon(1e-10));
}

TEST_CASE("explicit run beyond the bound violates the estimate before blowing up") {
    std::mt19937_64 rng(97);
    Matrix a = Matrix::Zero(10, 10);
    for (int i = 0; i < 10; ++i) a(i, i) = 1.0 + 9.0 * i;
    const auto sys = dense_system(Matrix::Identity(10, 10), a, 10);
    const double alpha = 0.6;
    // alpha0 * lambda_max four times the explicit threshold 1/2.
    const double dt = std::pow(4.0, 1.0 / alpha) * dt_max_explicit(alpha, 91.0);
    const auto k = make_kernel(alpha, dt, 1000);
    const Vector u0 = oracle::random_matrix(10, 1, rng);
    const auto run = run_scheme(Scheme::explicit_euler, sys, k, u0, FineLoad::zero(10));
    REQUIRE(run.diverged);
    const auto audit = energy_audit(run.trajectory, sys, FineLoad::zero(10), k);
    CHECK(audit.min_slack < 0.0);
    CHECK(audit.min_slack_step < run.diverged_step);
}

TEST_CASE("report and sweep output") {
    StabilityReport r;
    r.alpha = 0.9;
    r.gamma = 0.4;
    r.dt_max_partial = 2.8e-5;
    std::ostringstream out;
    write_report(out, r);
    CHECK(out.str().find("gamma=0.4") != std::string::npos);
    CHECK(out.str().find("dt_max_partial=2.8e-05") != std::string::npos);
    std::ostringstream csv;
    write_sweep_csv(csv, {SweepRow{100.0, 1.0, 2.0, 0.5, 1e-3, 2e-3}});
    CHECK(csv.str().rfind("contrast,lambda_full,lambda_v2,gamma,dt_exp,dt_partial\n", 0) == 0);
    CHECK(csv.str().find("100,1,2,0.5,0.001,0.002") != std::string::npos);
}

TEST_CASE("homogeneous medium has no contrast effect") {
    const auto g = build_grids(4, 6);
    const std::vector<double> mask = rect_mask(g.fine_n(), channel_preset(1));
    const auto rows = contrast_sweep(g, mask, {1.0}, 0.9, SpaceParams{2, 3, 3});
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].lambda_full / rows[0].lambda_v2 < 10.0);
    CHECK(rows[0].lambda_v2 / rows[0].lambda_full <= 1.0 + 1e-12);
    const auto sys_check = analyze(dense_system(Matrix::Identity(3, 3), Matrix::Identity(3, 3), 2), 0.5, 1e-3);
    CHECK(sys_check.gamma == 0.0);
    CHECK(sys_check.lambda_max_v2 == doctest::Approx(1.0));
}
