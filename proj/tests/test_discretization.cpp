#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "hardy/assembly.hpp"
#include "hardy/grid.hpp"
#include "hardy/sparse.hpp"

using namespace hardy;
using Catch::Approx;

TEST_CASE("sparse operator deduplicates and stays symmetric") {
    std::vector<Triplet> t{{0, 1, 2.0}, {1, 0, 2.0}, {0, 0, 1.0}, {0, 0, 3.0}, {1, 1, 5.0}};
    SparseOperator A(2, t);
    CHECK(A.nnz() == 4);
    CHECK(A.is_symmetric());
    std::vector<double> x{1.0, 1.0}, y(2);
    A.matvec(x, y);
    CHECK(y[0] == 6.0);
    CHECK(y[1] == 7.0);
    CHECK(A.quadratic_form(x) == 13.0);
    CHECK_FALSE(A.is_diagonal());
}

TEST_CASE("uniform grid nodes and volumes") {
    auto s = Scenario::flat_slab(3, 1, 0.2);
    auto g = build_grid(s, 16, 1.0);
    REQUIRE(g.axis_nodes.size() == 3);
    CHECK(g.axis_nodes[0].size() == 17);
    CHECK(g.axis_nodes[0][1] == Approx(1.0 / 16));
    CHECK(g.axis_nodes[1][1] - g.axis_nodes[1][0] == Approx(2.0 / 16));
    // FlatSlab n-cell volume (1/n)*(2/n)^{N-1}
    const double vol =
        (g.axis_nodes[0][1] - g.axis_nodes[0][0]) * (g.axis_nodes[1][1] - g.axis_nodes[1][0]) *
        (g.axis_nodes[2][1] - g.axis_nodes[2][0]);
    CHECK(vol == Approx((1.0 / 16) * std::pow(2.0 / 16, 2)));
}

TEST_CASE("graded axis follows the power law") {
    auto s = Scenario::flat_slab(3, 1, 0.2);
    auto g = build_grid(s, 8, 2.0);
    for (int j = 0; j <= 8; ++j) CHECK(g.axis_nodes[0][j] == Approx(std::pow(j / 8.0, 2)));
}

TEST_CASE("doubling n quarters the smallest transverse spacing at gamma 2") {
    auto s = Scenario::flat_slab(3, 1, 0.2);
    auto g1 = build_grid(s, 16, 2.0);
    auto g2 = build_grid(s, 32, 2.0);
    const double h1 = g1.axis_nodes[0][1] - g1.axis_nodes[0][0];
    const double h2 = g2.axis_nodes[0][1] - g2.axis_nodes[0][0];
    CHECK(h2 == Approx(h1 / 4));
}

TEST_CASE("grid rejects unresolved collars and bad parameters") {
    auto s = Scenario::flat_slab(3, 1, 0.2);
    CHECK_THROWS_AS(build_grid(s, 4, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(build_grid(s, 16, 5.0), std::invalid_argument);
    auto tight = Scenario::flat_slab(3, 1, 0.01);
    CHECK_THROWS_AS(build_grid(tight, 8, 1.0), std::invalid_argument);  // collar unresolved
}

TEST_CASE("interior map is a bijection") {
    auto s = Scenario::ball_equator(0.3);
    auto g = build_grid(s, 12, 2.0);
    std::size_t count = 0;
    for (std::size_t f = 0; f < g.interior.size(); ++f) {
        if (g.interior[f] >= 0) {
            CHECK(g.interior_nodes[std::size_t(g.interior[f])] == f);
            ++count;
            // interior nodes of the ball grid are strictly inside the ball
            CHECK(norm(g.node_point(f)) < 1.0);
        }
    }
    CHECK(count == g.n_interior());
    CHECK(count > 0);
}

TEST_CASE("1D-style stiffness stencil on a uniform grid") {
    // p == 1, uniform: row of an interior node is the standard FV stencil
    auto s = Scenario::flat_slab(3, 1, 0.2);
    auto g = build_grid(s, 16, 1.0);
    auto p1 = ScalarField::parse("1", s);
    auto A = assemble_stiffness(g, p1);
    CHECK(A.is_symmetric(1e-12));
    // diagonal entry: sum over axes of 2 * area / h
    const double h0 = 1.0 / 16, h1 = 2.0 / 16, h2 = 2.0 / 16;
    const double expect_diag =
        2 * (h1 * h2) / h0 + 2 * (h0 * h2) / h1 + 2 * (h0 * h1) / h2;
    auto d = A.diagonal();
    // pick some interior node away from the boundary
    bool found = false;
    for (std::size_t f = 0; f < g.interior.size(); ++f) {
        if (g.interior[f] < 0) continue;
        Vec x = g.node_point(f);
        if (x[0] > 0.3 && x[0] < 0.7 && std::abs(x[1]) < 0.5 && std::abs(x[2]) < 0.5) {
            CHECK(d[std::size_t(g.interior[f])] == Approx(expect_diag));
            found = true;
            break;
        }
    }
    CHECK(found);
}

TEST_CASE("stiffness row sums vanish on interior-only rows") {
    // rows whose full stencil is interior annihilate constants
    auto s = Scenario::flat_slab(3, 1, 0.2);
    auto g = build_grid(s, 16, 1.5);
    auto p1 = ScalarField::parse("1", s);
    auto A = assemble_stiffness(g, p1);
    std::vector<double> ones(g.n_interior(), 1.0), y(g.n_interior());
    A.matvec(ones, y);
    int deep_rows = 0;
    for (std::size_t f = 0; f < g.interior.size(); ++f) {
        if (g.interior[f] < 0) continue;
        bool deep = true;
        for (std::size_t a = 0; a < 3; ++a) {
            const std::size_t ia = (f / g.strides[a]) % g.dims[a];
            if (ia <= 1 || ia + 2 >= g.dims[a]) deep = false;
        }
        if (deep) {
            CHECK(y[std::size_t(g.interior[f])] == Approx(0.0).margin(1e-10));
            ++deep_rows;
        }
    }
    CHECK(deep_rows > 50);
}

TEST_CASE("plain mass reproduces cell volumes") {
    auto s = Scenario::flat_slab(3, 1, 0.2);
    auto g = build_grid(s, 16, 1.0);
    auto one = ScalarField::parse("1", s);
    auto B = assemble_singular_mass(g, one, MassMode::Plain);
    CHECK(B.is_diagonal());
    auto d = B.diagonal();
    const double cellvol = (1.0 / 16) * (2.0 / 16) * (2.0 / 16);
    for (std::size_t f = 0; f < g.interior.size(); ++f) {
        if (g.interior[f] < 0) continue;
        // interior node away from boundary owns exactly one cell volume
        const double v = d[std::size_t(g.interior[f])];
        Vec x = g.node_point(f);
        if (x[0] > 0.2 && x[0] < 0.8 && std::abs(x[1]) < 0.5 && std::abs(x[2]) < 0.5)
            CHECK(v == Approx(cellvol).epsilon(1e-12));
    }
}

TEST_CASE("smooth singular mass approximates w/delta^2 far from Sigma") {
    auto s = Scenario::flat_slab(3, 1, 0.2);
    auto g = build_grid(s, 16, 1.0);
    auto one = ScalarField::parse("1", s);
    auto B = assemble_singular_mass(g, one, MassMode::Q);
    auto d = B.diagonal();
    const double cellvol = (1.0 / 16) * (2.0 / 16) * (2.0 / 16);
    for (std::size_t f = 0; f < g.interior.size(); ++f) {
        if (g.interior[f] < 0) continue;
        Vec x = g.node_point(f);
        const double delta0 = s.dist_sigma(x);
        if (delta0 > 0.7) {
            const double entry = d[std::size_t(g.interior[f])];
            CHECK(entry == Approx(cellvol / (delta0 * delta0)).epsilon(0.02));
        }
    }
}

TEST_CASE("Sigma-adjacent mass entry matches the polar integral") {
    // FlatSlab k=1, N=3: near Sigma the kernel is 1/r^2 in the transverse
    // plane; integrate over the first cell [0,hx] x [0,hy] analytically:
    // int int (x^2+y^2)^-1 dx dy has the closed form below
    auto s = Scenario::flat_slab(3, 1, 0.2);
    auto g = build_grid(s, 16, 1.0);
    auto one = ScalarField::parse("1", s);
    auto B = assemble_singular_mass(g, one, MassMode::Q);
    auto diag = B.diagonal();

    const double hx = g.axis_nodes[0][1] - g.axis_nodes[0][0];
    // oracle: quadrature of the exact kernel against the hat weights over the
    // four transverse cells around the node (1,center,j), at high order
    std::vector<double> gn, gw;
    gauss_legendre(48, gn, gw);
    // node at (x1 = hx, x2 = 0, tangent center): hat-weighted integral over
    // the 2x2 transverse cells times tangent dual length
    const std::size_t mid1 = g.dims[1] / 2;
    const std::size_t mid2 = g.dims[2] / 2;
    const std::size_t flat = 1 * g.strides[0] + mid1 * g.strides[1] + mid2 * g.strides[2];
    REQUIRE(g.interior[flat] >= 0);
    const double hy = g.axis_nodes[1][mid1 + 1] - g.axis_nodes[1][mid1];
    double oracle = 0;
    for (int cx = -1; cx <= 0; ++cx) {
        for (int cy = -1; cy <= 0; ++cy) {
            const double x0 = hx + cx * hx, y0 = 0 + cy * hy;
            for (std::size_t i = 0; i < gn.size(); ++i) {
                for (std::size_t j = 0; j < gn.size(); ++j) {
                    const double xx = x0 + hx * 0.5 * (gn[i] + 1);
                    const double yy = y0 + hy * 0.5 * (gn[j] + 1);
                    const double hatx = 1.0 - std::abs(xx - hx) / hx;
                    const double haty = 1.0 - std::abs(yy - 0) / hy;
                    oracle += gw[i] * gw[j] * 0.25 * hx * hy * hatx * haty / (xx * xx + yy * yy);
                }
            }
        }
    }
    // tangent direction: node owns the dual length (uniform here), and the
    // tangent hat integrates to the dual length across the two cells
    const double hz = g.axis_nodes[2][1] - g.axis_nodes[2][0];
    oracle *= hz;
    CHECK(diag[std::size_t(g.interior[flat])] == Approx(oracle).epsilon(1e-3));
}

TEST_CASE("quadrature order bump changes Sigma-adjacent entries below a percent") {
    auto s = Scenario::flat_slab(3, 1, 0.2);
    auto g = build_grid(s, 32, 2.0);
    auto one = ScalarField::parse("1", s);
    // raising both quadrature orders must barely move Sigma-adjacent
    // entries: the subdivision already resolves the singular layer
    auto B4 = assemble_singular_mass(g, one, MassMode::Q, 4, 8);
    auto B8 = assemble_singular_mass(g, one, MassMode::Q, 8, 16);
    auto d4 = B4.diagonal(), d8 = B8.diagonal();
    double worst = 0;
    for (std::size_t f = 0; f < g.interior.size(); ++f) {
        if (g.interior[f] < 0) continue;
        Vec x = g.node_point(f);
        if (s.dist_sigma(x) < 0.05) {
            const std::size_t i = std::size_t(g.interior[f]);
            worst = std::max(worst, std::abs(d8[i] - d4[i]) / d8[i]);
        }
    }
    CHECK(worst < 0.01);
}

TEST_CASE("rayleigh quotient basics") {
    std::vector<Triplet> ta{{0, 0, 2.0}, {1, 1, 8.0}};
    std::vector<Triplet> tb{{0, 0, 1.0}, {1, 1, 2.0}};
    SparseOperator A(2, ta), B(2, tb);
    std::vector<double> u{1.0, 0.0};
    CHECK(rayleigh_quotient(A, B, nullptr, 0.0, u) == Approx(2.0));
    // homogeneity
    std::vector<double> u5{5.0, 0.0};
    CHECK(rayleigh_quotient(A, B, nullptr, 0.0, u5) == Approx(2.0));
    // lambda direction: increasing lambda lowers the quotient when B_eta > 0
    SparseOperator Beta(2, {{0, 0, 1.0}, {1, 1, 1.0}});
    CHECK(rayleigh_quotient(A, B, &Beta, 1.0, u) < 2.0);
    std::vector<double> zero{0.0, 0.0};
    CHECK_THROWS_AS(rayleigh_quotient(A, B, nullptr, 0.0, zero), std::invalid_argument);
}

TEST_CASE("masses are positive definite and stiffness PSD") {
    auto s = Scenario::ball_equator(0.3);
    auto g = build_grid(s, 12, 2.0);
    auto one = ScalarField::parse("1", s);
    auto A = assemble_stiffness(g, one);
    auto Bq = assemble_singular_mass(g, one, MassMode::Q);
    CHECK(A.is_symmetric(1e-12));
    auto bd = Bq.diagonal();
    for (double v : bd) CHECK(v > 0);
    // PSD spot check on quasi-random vectors
    Halton seq(5, 3);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<double> u(g.n_interior());
        for (std::size_t i = 0; i < u.size(); ++i)
            u[i] = 2 * seq.point(trial * u.size() + i)[0] - 1;
        CHECK(A.quadratic_form(u) >= -1e-10);
    }
}
