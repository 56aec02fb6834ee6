#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "hardy/distance_expansions.hpp"
#include "hardy/finite_difference.hpp"
#include "hardy/geometry.hpp"

using namespace hardy;
using Catch::Approx;

TEST_CASE("ball collar point radially below the equator") {
    auto s = Scenario::ball_equator(0.3);
    auto cp = eval_collar_point(s, Vec{0.9, 0.0, 0.0});
    CHECK(cp.d == Approx(0.1));
    CHECK(cp.delta_hat == Approx(0.0).margin(1e-15));
    CHECK(cp.delta == Approx(0.1));
    CHECK(cp.delta_tilde == Approx(0.1));
    CHECK(cp.sigma[0] == Approx(1.0));
}

TEST_CASE("projection distance is the Pythagorean combination") {
    // delta_hat = 0.3, d = 0.4 -> delta_tilde = 0.5, any scenario
    auto s = Scenario::ball_equator(0.6);
    const double lat = 0.3;
    const double d = 0.4;
    Vec x = (1.0 - d) * Vec{std::cos(lat), 0.0, std::sin(lat)};
    auto cp = eval_collar_point(s, x);
    CHECK(cp.delta_hat == Approx(0.3));
    CHECK(cp.d == Approx(0.4));
    CHECK(cp.delta_tilde == Approx(0.5));

    auto f = Scenario::flat_slab(3, 1, 0.25);
    // rescale to stay in the slab collar
    auto cpf = eval_collar_point(f, Vec{0.04, 0.03, 0.1});
    CHECK(cpf.delta_tilde == Approx(std::hypot(cpf.delta_hat, cpf.d)));
    CHECK(cpf.delta_hat == Approx(0.03));
    CHECK(cpf.d == Approx(0.04));
}

TEST_CASE("delta versus delta_tilde near the equator") {
    auto s = Scenario::ball_equator(0.3);
    Vec x{0.99 * std::cos(0.01), 0.0, 0.99 * std::sin(0.01)};
    auto cp = eval_collar_point(s, x);
    // gap frozen from exact arithmetic: 2.5052e-3, i.e. ~0.177 * delta_tilde,
    // matching the first-order expansion delta^2 = delta_tilde^2 (1 + O(dt))
    CHECK(std::abs(cp.delta - cp.delta_tilde) / cp.delta_tilde ==
          Approx(2.5052005079e-3).epsilon(1e-6));
    CHECK(std::abs(cp.delta * cp.delta / (cp.delta_tilde * cp.delta_tilde) - 1.0) /
              cp.delta_tilde ==
          Approx(0.35384507).epsilon(1e-6));
    CHECK(cp.delta <= cp.delta_tilde + 1e-15);
}

TEST_CASE("delta <= delta_tilde at collar points of both scenarios") {
    for (auto s : {Scenario::ball_equator(0.3), Scenario::flat_slab(4, 2, 0.2)}) {
        for (double rung : {0.15, 0.08, 0.05}) {
            for (const Vec& x : collar_samples_at(s, rung, 50)) {
                auto cp = eval_collar_point(s, x);
                INFO(to_string(s.kind) << " rung " << rung);
                CHECK(cp.delta <= cp.delta_tilde * (1 + 1e-12));
                CHECK(cp.delta_tilde ==
                      Approx(std::hypot(cp.delta_hat, cp.d)).epsilon(1e-14));
            }
        }
    }
}

TEST_CASE("collar rejection and singular flag") {
    auto s = Scenario::ball_equator(0.05);
    CHECK_THROWS_AS(eval_collar_point(s, Vec{0.5, 0.0, 0.0}), OutsideCollar);
    CHECK_THROWS_AS(eval_collar_point(s, Vec{1.5, 0.0, 0.0}), OutsideDomain);
    // polar axis: delta_hat cut locus
    CHECK_THROWS_AS(eval_collar_point(s, Vec{0.0, 0.0, 0.5}), OutsideDomain);
}

TEST_CASE("fermi map centers and steps") {
    auto s = Scenario::ball_equator(0.3);
    auto chart = make_chart(s, 0.0);
    Vec P = chart.map(Vec{0.0, 0.0, 0.0});
    CHECK(P[0] == Approx(1.0));
    CHECK(P[1] == Approx(0.0).margin(1e-15));

    Vec inward = chart.map(Vec{0.1, 0.0, 0.0});
    CHECK(inward[0] == Approx(0.9));
    CHECK(inward[2] == Approx(0.0).margin(1e-15));

    CHECK_THROWS_AS(chart.map(Vec{0.2, 0.0, 0.0}), OutOfChart);
}

TEST_CASE("equator arc length equals the tangent coordinate") {
    auto s = Scenario::ball_equator(0.3);
    auto chart = make_chart(s, 0.0);
    const double t = 0.12;
    // arclength of tau -> chart.map((0,0,tau)) from 0 to t by fine quadrature
    const int nq = 2000;
    double len = 0;
    Vec prev = chart.map(Vec{0.0, 0.0, 0.0});
    for (int i = 1; i <= nq; ++i) {
        Vec cur = chart.map(Vec{0.0, 0.0, t * i / nq});
        len += norm(cur - prev);
        prev = cur;
    }
    CHECK(std::abs(len - t) <= 1e-8);
}

TEST_CASE("metric components: identity rows and columns") {
    auto flat = Scenario::flat_slab(3, 1, 0.25);
    auto fc = make_chart(flat, 0.0, {0.1});
    auto repf = metric_components(fc, Vec{0.02, 0.01, 0.015}, 1e-5);
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 3; ++b)
            CHECK(repf.g[a][b] == Approx(a == b ? 1.0 : 0.0).margin(1e-10));

    auto ball = Scenario::ball_equator(0.3);
    auto bc = make_chart(ball, 0.4);
    auto rep0 = metric_components(bc, Vec{0.0, 0.0, 0.0}, 1e-5);
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 3; ++b)
            CHECK(rep0.g[a][b] == Approx(a == b ? 1.0 : 0.0).margin(1e-9));
}

TEST_CASE("metric rows g11 and g1b are exact at sampled y") {
    auto ball = Scenario::ball_equator(0.3);
    auto bc = make_chart(ball, 1.1);
    Halton seq(3, 0);
    for (int i = 0; i < 20; ++i) {
        Vec u = seq.point(i);
        Vec y{0.1 * (u[0] - 0.5) * 0.2, 0.1 * (u[1] - 0.5) * 0.2, 0.1 * (u[2] - 0.5) * 0.2};
        auto rep = metric_components(bc, y, 1e-5);
        CHECK(rep.res_g11 <= 1e-9);
        CHECK(rep.res_g1b <= 1e-9);
    }
}

TEST_CASE("metric deviation scales linearly in |ytilde|") {
    auto ball = Scenario::ball_equator(0.4);
    auto bc = make_chart(ball, 0.0);
    // fitted C = res_offdiag should be stable across |ytilde| rungs
    std::vector<double> fits;
    for (double r : {0.1, 0.05, 0.025}) {
        auto rep = metric_components(bc, Vec{r / 2, r / 2, 0.0}, 1e-6);
        fits.push_back(rep.res_offdiag);
    }
    const double lo = *std::min_element(fits.begin(), fits.end());
    const double hi = *std::max_element(fits.begin(), fits.end());
    CHECK(lo > 0);
    CHECK(hi / lo <= 3.0);
}

TEST_CASE("flat slab expansions are exact up to FD error") {
    auto s = Scenario::flat_slab(3, 1, 0.25);
    const double ladder[] = {0.2, 0.1, 0.05, 0.025};
    auto rep = check_distance_expansions(s, ladder, 40);
    int used = 0;
    for (const auto& sm : rep.samples) {
        if (sm.excluded) continue;
        ++used;
        CHECK(sm.r[0] <= 1e-8);
        CHECK(sm.r[1] <= 1e-8);
        CHECK(sm.r[2] <= 1e-8);
        CHECK(sm.r[3] <= 1e-5);  // second-derivative FD noise
    }
    CHECK(used >= 150);
}

TEST_CASE("ball expansions: exact identity and rung-stable constants") {
    auto s = Scenario::ball_equator(0.45);
    const double ladder[] = {0.2, 0.1, 0.05, 0.025};
    auto rep = check_distance_expansions(s, ladder, 60);
    for (const auto& sm : rep.samples) {
        if (sm.excluded) continue;
        CHECK(sm.r[1] <= 1e-6);  // the gradient identity is exact
    }
    for (int item : {0, 2, 3}) {
        INFO("item r" << item + 1);
        CHECK(rep.fit_ratio[item] > 0);
        CHECK(rep.fit_ratio[item] <= 3.0);
    }
}

TEST_CASE("parametric curve scenario reproduces the equator") {
    // the equator as a parametric curve: distances must match ball_equator
    auto curve = CurveOnSphere(Expression::parse("cos(t)"), Expression::parse("sin(t)"),
                               Expression::parse("0"), 256);
    auto sc = Scenario::parametric_curve(curve, 0.2);
    auto sb = Scenario::ball_equator(0.2);
    Halton seq(3, 5);
    for (int i = 0; i < 10; ++i) {
        Vec u = seq.point(i);
        const double lat = 0.1 * (u[0] - 0.5);
        const double d = 0.02 + 0.05 * u[1];
        const double phi = 2 * M_PI * u[2];
        Vec x = (1 - d) * Vec{std::cos(lat) * std::cos(phi), std::cos(lat) * std::sin(phi),
                              std::sin(lat)};
        CHECK(sc.dist_sigma(x) == Approx(sb.dist_sigma(x)).margin(1e-8));
        CHECK(sc.delta_tilde(x) == Approx(sb.delta_tilde(x)).margin(1e-8));
    }
    CHECK(curve.length() == Approx(2 * M_PI).epsilon(1e-6));
}
