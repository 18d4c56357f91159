#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>
#include <sstream>

#include "fracms/assembly.hpp"
#include "fracms/error.hpp"
#include "fracms/raster.hpp"
#include "oracles.hpp"

using namespace fracms;

namespace {

PermeabilityField random_field(int n, std::uint64_t seed, double lo, double hi) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(static_cast<std::size_t>(n) * n);
    for (double& x : v) x = u(rng);
    return PermeabilityField(n, v);
}

PermeabilityField checkerboard(int n, double a, double b) {
    std::vector<double> v(static_cast<std::size_t>(n) * n);
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) v[ix + iy * n] = ((ix + iy) % 2 == 0) ? a : b;
    return PermeabilityField(n, v);
}

double min_eig(const Matrix& a) { return Eigen::SelfAdjointEigenSolver<Matrix>(a).eigenvalues().minCoeff(); }

}  // namespace

TEST_CASE("element mass matrix") {
    Matrix4 ref;
    ref << 4, 2, 1, 2, 2, 4, 2, 1, 1, 2, 4, 2, 2, 1, 2, 4;
    ref /= 36.0;
    CHECK((element_mass(1.0) - ref).norm() <= 1e-15);
    CHECK(element_mass(0.37).sum() == doctest::Approx(0.37 * 0.37).epsilon(1e-14));
    CHECK((element_mass(0.01) - 1e-4 * ref).norm() <= 1e-18);
}

TEST_CASE("element stiffness matrix") {
    Matrix4 ref;
    ref << 4, -1, -2, -1, -1, 4, -1, -2, -2, -1, 4, -1, -1, -2, -1, 4;
    ref /= 6.0;
    for (double h : {1.0, 0.01}) CHECK((element_stiffness(1.0, h) - ref).norm() <= 1e-15);
    const Matrix4 k = element_stiffness(3.7, 0.2);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(k.row(i).sum()) <= 1e-14);
    CHECK((element_stiffness(1e5, 0.1) - 1e5 * ref).norm() <= 1e-9);
}

TEST_CASE("mass matrix is positive definite") {
    const auto g = build_grids(2, 2);
    const auto m = assemble_mass(g);
    CHECK(min_eig(m.dense()) > 0.0);
    // Row sums of the interior mass matrix equal the integral of each hat.
    const auto g2 = build_grids(3, 3);
    const Vector ones = Vector::Ones(g2.num_nodes());
    const Vector load = load_vector_nodal(g2, std::vector<double>(ones.data(), ones.data() + ones.size()));
    const double h = g2.h();
    for (int i = 0; i < load.size(); ++i) CHECK(load(i) == doctest::Approx(h * h).epsilon(1e-13));
}

TEST_CASE("smallest Laplacian eigenvalue") {
    // Exact discrete eigenvalue of the separable Q1 pencil for the mode
    // sin(pi x) sin(pi y): 2 * 6 (1 - cos(pi h)) / (h^2 (2 + cos(pi h))).
    auto discrete = [](double h) {
        const double c = std::cos(M_PI * h);
        return 2.0 * 6.0 * (1.0 - c) / (h * h * (2.0 + c));
    };
    const auto g = build_grids(2, 2);
    const auto k = PermeabilityField::constant(g.fine_n(), 1.0);
    const auto a = assemble_stiffness(g, k), m = assemble_mass(g);
    const auto p = gen_eig_smallest(a.dense(), m.dense(), 1);
    CHECK(p.values(0) == doctest::Approx(discrete(0.25)).epsilon(1e-12));
    CHECK(p.values(0) == doctest::Approx(20.774).epsilon(1e-4));
    // Converges to the continuum value 2 pi^2 as h -> 0.
    const auto g8 = build_grids(4, 4);
    const auto a8 = assemble_stiffness(g8, PermeabilityField::constant(16, 1.0));
    const auto p8 = gen_eig_smallest(a8.dense(), assemble_mass(g8).dense(), 1);
    CHECK(p8.values(0) == doctest::Approx(discrete(1.0 / 16)).epsilon(1e-11));
    CHECK(std::abs(p8.values(0) - 2 * M_PI * M_PI) < 0.01 * 2 * M_PI * M_PI);
}

TEST_CASE("stiffness is SPD and monotone in kappa") {
    const auto g = build_grids(3, 3);
    const auto k1 = random_field(9, 1, 0.5, 2.0);
    const auto a1 = assemble_stiffness(g, k1);
    CHECK(min_eig(a1.dense()) > 0.0);
    std::vector<double> bigger(k1.values().begin(), k1.values().end());
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    for (double& x : bigger) x += u(rng);
    const auto a2 = assemble_stiffness(g, PermeabilityField(9, bigger));
    for (int t = 0; t < 20; ++t) {
        const Vector v = oracle::random_matrix(g.num_dofs(), 1, rng);
        CHECK(a1.quad(v) <= a2.quad(v) * (1 + 1e-14));
    }
}

TEST_CASE("weighted mass") {
    const auto g = build_grids(2, 3);
    const std::vector<double> zero(g.num_cells(), 0.0);
    CHECK(assemble(g, zero, Weight::weighted_mass).matrix().norm() == 0.0);
    CHECK_THROWS_AS(assemble(g, std::vector<double>(3, 1.0), Weight::weighted_mass), InvalidArgument);
    const std::vector<double> ones(g.num_cells(), 1.0);
    CHECK((assemble(g, ones, Weight::weighted_mass).dense() - assemble_mass(g).dense()).norm() <= 1e-15);
}

TEST_CASE("weighted mass is the sum of element blocks") {
    const auto g = build_grids(3, 4);
    const auto k = random_field(g.fine_n(), 3, 1.0, 1e3);
    const auto pou = msfem_partition(g, k);
    const auto kt = kappa_tilde(g, k, pou);
    const Matrix s = assemble_weighted_mass(g, kt).dense();
    Matrix sum = Matrix::Zero(s.rows(), s.cols());
    for (int e = 0; e < g.num_elements(); ++e) {
        std::vector<double> w(g.num_cells(), 0.0);
        for (int c : g.element(e).cells) w[c] = kt.values[c];
        sum += assemble(g, w, Weight::weighted_mass).dense();
    }
    CHECK((sum - s).norm() <= 1e-12 * s.norm());
}

TEST_CASE("partition of unity for constant kappa is the bilinear hat basis") {
    const auto g = build_grids(3, 4);
    const auto pou = msfem_partition(g, PermeabilityField::constant(g.fine_n(), 2.5));
    REQUIRE(pou.count() == 16);
    const double H = g.H();
    for (int v = 0; v < pou.count(); ++v) {
        const auto [vx, vy] = g.node_position(g.coarse_vertex_node(v));
        for (int node = 0; node < g.num_nodes(); ++node) {
            const auto [x, y] = g.node_position(node);
            const double hat = std::max(0.0, 1.0 - std::abs(x - vx) / H) * std::max(0.0, 1.0 - std::abs(y - vy) / H);
            CHECK(std::abs(pou.chi[v](node) - hat) <= 1e-10);
        }
    }
}

TEST_CASE("partition of unity sums to one and respects bounds") {
    const auto g = build_grids(3, 6);
    for (const auto& k : {random_field(g.fine_n(), 4, 1.0, 1e4), checkerboard(g.fine_n(), 1.0, 1e5)}) {
        const auto pou = msfem_partition(g, k);
        for (int node = 0; node < g.num_nodes(); ++node) {
            double sum = 0.0;
            for (const auto& c : pou.chi) {
                sum += c(node);
                CHECK(c(node) >= -1e-8);
                CHECK(c(node) <= 1.0 + 1e-8);
            }
            CHECK(std::abs(sum - 1.0) <= 1e-10);
        }
        // Support: chi_v vanishes outside the closed elements sharing vertex v.
        for (int v = 0; v < pou.count(); ++v) {
            const auto [vx, vy] = g.node_coords(g.coarse_vertex_node(v));
            for (int node = 0; node < g.num_nodes(); ++node) {
                const auto [nx, ny] = g.node_coords(node);
                if (std::abs(nx - vx) >= g.refine() || std::abs(ny - vy) >= g.refine())
                    CHECK(pou.chi[v](node) == 0.0);
            }
        }
    }
}

TEST_CASE("kappa_tilde closed form and linearity") {
    const auto g = build_grids(3, 4);
    const auto k = PermeabilityField::constant(g.fine_n(), 1.0);
    const auto pou = msfem_partition(g, k);
    const auto kt = kappa_tilde(g, k, pou);
    const double H = g.H();
    for (int c = 0; c < g.num_cells(); ++c) {
        const auto [cx, cy] = g.cell_coords(c);
        const double s = ((cx % g.refine()) + 0.5) / g.refine();
        const double t = ((cy % g.refine()) + 0.5) / g.refine();
        const double ref = 2.0 / (H * H) * ((1 - t) * (1 - t) + t * t + (1 - s) * (1 - s) + s * s);
        CHECK(kt.values[c] == doctest::Approx(ref).epsilon(1e-9));
    }
    const auto k2 = random_field(g.fine_n(), 9, 1.0, 100.0);
    const auto pou2 = msfem_partition(g, k2);
    const auto a = kappa_tilde(g, k2, pou2), b = kappa_tilde(g, k2.scaled(7.0), pou2);
    for (int c = 0; c < g.num_cells(); ++c) {
        CHECK(b.values[c] == doctest::Approx(7.0 * a.values[c]).epsilon(1e-13));
        CHECK(a.values[c] >= 0.0);
    }
}

TEST_CASE("load vectors") {
    const auto g = build_grids(2, 3);
    const Vector zero = load_vector(g, [](double, double, double) { return 0.0; }, 0.0);
    CHECK(zero.norm() == 0.0);
    const Vector one = load_vector(g, [](double, double, double) { return 1.0; }, 0.0);
    const Vector rows = assemble_mass(g).matrix() * Vector::Ones(g.num_dofs());
    // Interior hats: four cells of area h^2, each contributing a quarter.
    for (int i = 0; i < one.size(); ++i) {
        CHECK(one(i) == doctest::Approx(g.h() * g.h()).epsilon(1e-13));
        // The interior mass row equals the full row only away from the boundary.
        const auto [ix, iy] = g.node_coords(g.node_of_dof(i));
        if (ix > 1 && iy > 1 && ix < g.fine_n() - 1 && iy < g.fine_n() - 1)
            CHECK(one(i) == doctest::Approx(rows(i)).epsilon(1e-13));
    }
    const Vector cells = load_vector_cells(g, std::vector<double>(g.num_cells(), 1.0));
    CHECK((cells - one).norm() <= 1e-15);
}

TEST_CASE("smooth load matches a quadrature oracle") {
    const auto g = build_grids(10, 10);
    auto f = [](double x, double y) { return 2 * M_PI * M_PI * std::sin(M_PI * x) * std::sin(M_PI * y); };
    const Vector load = load_vector(g, [&](double x, double y, double) { return f(x, y); }, 0.0);
    const double h = g.h();
    Vector ref = Vector::Zero(g.num_dofs());
    // Tensor Gauss-Legendre on each of the four cells around a node, with the hat as weight.
    for (int d = 0; d < g.num_dofs(); ++d) {
        const auto [x0, y0] = g.node_position(g.node_of_dof(d));
        auto hat = [&](double x, double y) { return (1 - std::abs(x - x0) / h) * (1 - std::abs(y - y0) / h); };
        for (double xa : {x0 - h, x0})
            for (double ya : {y0 - h, y0})
                ref(d) += oracle::gauss_legendre(
                    [&](double x) {
                        return oracle::gauss_legendre([&](double y) { return f(x, y) * hat(x, y); }, ya, ya + h, 4);
                    },
                    xa, xa + h, 4);
    }
    CHECK((load - ref).norm() <= 1e-3 * ref.norm());
}

TEST_CASE("permeability field validation and raster round trip") {
    CHECK_THROWS_AS(PermeabilityField(2, {1.0, 2.0, -1.0, 1.0}), InvalidArgument);
    CHECK_THROWS_AS(PermeabilityField(2, {1.0, 2.0, 1.0}), InvalidArgument);
    const auto k = random_field(7, 11, 1e-3, 1e5);
    std::stringstream ss;
    write_raster(ss, k.to_raster());
    const auto back = PermeabilityField::from_raster(read_raster(ss));
    REQUIRE(back.n() == 7);
    for (int c = 0; c < back.num_cells(); ++c) CHECK(back[c] == k[c]);
    CHECK(back.checksum() == k.checksum());
    CHECK(k.contrast() == doctest::Approx(k.max() / k.min()));
}

TEST_CASE("raster parse errors carry line numbers") {
    std::stringstream bad1("2 2\n1 2\n3 x\n");
    try {
        read_raster(bad1);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
    std::stringstream bad2("2 two\n");
    CHECK_THROWS_AS(read_raster(bad2), ParseError);
    std::stringstream short_data("2 2\n1 2 3\n");
    CHECK_THROWS_AS(read_raster(short_data), ParseError);
}
