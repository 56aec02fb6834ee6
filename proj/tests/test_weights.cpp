#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "hardy/weights.hpp"

using namespace hardy;
using Catch::Approx;

namespace {

// reference quadrature oracle: composite Simpson at fixed high resolution,
// independent of the adaptive path under test
template <class F>
double simpson(F&& f, double a, double b, int n) {
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + (b - a) * i / n);
    return s * (b - a) / (3 * n);
}

}  // namespace

TEST_CASE("constant weights with eta = delta^2 validate") {
    auto s = Scenario::ball_equator(0.3);
    auto w = WeightTriple::parse("1", "1", "delta^2", s);
    auto rep = validate_weights(w, s, 2000);
    CHECK(rep.valid);
    CHECK(rep.max_eta_on_sigma <= 1e-12);
    CHECK(rep.max_q_over_p_on_sigma == Approx(1.0).margin(1e-10));
    // eta/delta = delta, so the fitted C is the largest sampled delta in the collar
    CHECK(rep.eta_over_delta_C <= s.beta * 1.05);
    CHECK(rep.eta_over_delta_C > 0.5 * s.beta);
}

TEST_CASE("constant q above p is rejected") {
    auto s = Scenario::ball_equator(0.3);
    auto w = WeightTriple::parse("1", "1.5", "delta^2", s);
    auto rep = validate_weights(w, s, 500);
    CHECK_FALSE(rep.valid);
    bool found = false;
    for (const auto& v : rep.violations)
        if (v.condition.find("q/p") != std::string::npos) found = true;
    CHECK(found);
}

TEST_CASE("angular weight attains the ratio maximum at psi in {0, pi}") {
    auto s = Scenario::ball_equator(0.3);
    auto w = WeightTriple::parse("1", "1 - sin(psi)^2/2", "delta^2", s);
    auto rep = validate_weights(w, s, 2000);
    CHECK(rep.valid);
    // sample-max oracle over a psi grid
    double oracle = 0;
    for (int i = 0; i < 20000; ++i) {
        const double psi = 2 * M_PI * i / 20000.0;
        oracle = std::max(oracle, 1 - std::sin(psi) * std::sin(psi) / 2);
    }
    CHECK(rep.max_q_over_p_on_sigma == Approx(oracle).margin(1e-8));
}

TEST_CASE("negative eta off the singular set is rejected") {
    auto s = Scenario::flat_slab(3, 1, 0.2);
    auto w = WeightTriple::parse("1", "1", "0 - delta^2", s);
    auto rep = validate_weights(w, s, 500);
    CHECK_FALSE(rep.valid);
}

TEST_CASE("attainment integral: constant gap") {
    auto s = Scenario::ball_equator(0.3);
    // q/p = 1 - c^2 with c = 0.5: I = |Sigma|/c = 2 pi / 0.5 = 4 pi
    auto w = WeightTriple::parse("1", "0.75", "delta^2", s);
    auto r = attainment_integral(w, s, 1e-10);
    REQUIRE(r.verdict == AttainmentVerdict::Finite);
    CHECK(r.value == Approx(4 * M_PI).epsilon(1e-8));
}

TEST_CASE("attainment integral: quadratic contact diverges") {
    auto s = Scenario::ball_equator(0.3);
    auto w = WeightTriple::parse("1", "1 - sin(psi)^2", "delta^2", s);
    auto r = attainment_integral(w, s, 1e-8);
    CHECK(r.verdict == AttainmentVerdict::Divergent);
    CHECK(r.local_exponent == Approx(2.0).margin(0.1));
}

TEST_CASE("partial-integral ladder of the quadratic-contact case grows logarithmically") {
    // independent oracle for the divergence classification: partial integrals
    // over |psi - zero| > tau grow linearly in log(1/tau)
    auto gap = [](double psi) { return std::sin(psi) * std::sin(psi); };
    auto integrand = [&](double psi) { return 1.0 / std::sqrt(gap(psi)); };
    std::vector<double> partials;
    for (int j = 3; j <= 8; ++j) {
        const double cut = std::pow(0.5, j);
        double total = 0;
        total += simpson(integrand, cut, M_PI - cut, 20000);
        total += simpson(integrand, M_PI + cut, 2 * M_PI - cut, 20000);
        partials.push_back(total);
    }
    // increments should be near-constant (log growth), not shrinking
    for (std::size_t i = 1; i + 1 < partials.size(); ++i) {
        const double inc1 = partials[i] - partials[i - 1];
        const double inc2 = partials[i + 1] - partials[i];
        CHECK(inc2 == Approx(inc1).epsilon(0.05));
        CHECK(inc1 > 1.0);
    }
}

TEST_CASE("attainment integral: lifted contact is finite and matches reference") {
    auto s = Scenario::ball_equator(0.3);
    auto w = WeightTriple::parse("1", "1 - (0.01 + sin(psi)^2)", "delta^2", s);
    auto r = attainment_integral(w, s, 1e-9);
    REQUIRE(r.verdict == AttainmentVerdict::Finite);
    auto ref_f = [](double psi) {
        return 1.0 / std::sqrt(0.01 + std::sin(psi) * std::sin(psi));
    };
    const double ref = simpson(ref_f, 0.0, 2 * M_PI, 400000);
    CHECK(r.value == Approx(ref).epsilon(1e-6));
}

TEST_CASE("attainment monotone under integrand domination") {
    auto s = Scenario::ball_equator(0.3);
    // 1 - q1/p >= 1 - q2/p pointwise -> I(q1) <= I(q2)
    auto w1 = WeightTriple::parse("1", "0.5 + 0.1*sin(psi)^2", "delta^2", s);
    auto w2 = WeightTriple::parse("1", "0.7 + 0.1*sin(psi)^2", "delta^2", s);
    auto r1 = attainment_integral(w1, s, 1e-9);
    auto r2 = attainment_integral(w2, s, 1e-9);
    REQUIRE(r1.verdict == AttainmentVerdict::Finite);
    REQUIRE(r2.verdict == AttainmentVerdict::Finite);
    CHECK(r1.value <= r2.value);
}

TEST_CASE("attainment verdict is invariant under parameter shift") {
    auto s = Scenario::ball_equator(0.3);
    auto a = attainment_integral(
        WeightTriple::parse("1", "1 - sin(psi)^2", "delta^2", s), s, 1e-8);
    auto b = attainment_integral(
        WeightTriple::parse("1", "1 - sin(psi - 1.3)^2", "delta^2", s), s, 1e-8);
    CHECK(a.verdict == b.verdict);
    auto c = attainment_integral(
        WeightTriple::parse("1", "1 - (0.01 + sin(psi)^2)", "delta^2", s), s, 1e-9);
    auto d = attainment_integral(
        WeightTriple::parse("1", "1 - (0.01 + sin(psi - 1.3)^2)", "delta^2", s), s, 1e-9);
    REQUIRE(c.verdict == AttainmentVerdict::Finite);
    REQUIRE(d.verdict == AttainmentVerdict::Finite);
    CHECK(c.value == Approx(d.value).epsilon(1e-6));
}

TEST_CASE("normalize_p: identity weight") {
    auto s = Scenario::flat_slab(3, 1, 0.2);
    auto w = WeightTriple::parse("1", "1 - delta^2", "delta^2", s);
    auto pn = normalize_p(w, s);
    CHECK(pn.v_extra.is_constant());
    CHECK(pn.v_extra.constant_value() == 0.0);
    VarEnv env{{"x1", 0.1}, {"x2", 0.2}, {"x3", 0.0}, {"delta", 0.3}};
    CHECK(pn.q_over_p.eval(env) == Approx(1 - 0.09));
}

TEST_CASE("normalize_p: exponential tilt gives constant potential") {
    // p = exp(v . x), |v|^2 = 0.04 + 0.09 -> V_extra = -|v|^2/4
    auto s = Scenario::flat_slab(3, 1, 0.2);
    auto w = WeightTriple::parse("exp(0.2*x1 + 0.3*x2)", "1", "delta^2", s);
    auto pn = normalize_p(w, s);
    VarEnv env{{"x1", 0.4}, {"x2", -0.1}, {"x3", 0.2}};
    CHECK(pn.v_extra.eval(env) == Approx(-(0.04 + 0.09) / 4).epsilon(1e-12));
}

TEST_CASE("normalize_p: quadratic bump potential at the origin") {
    // p = 1 + x1^2: lap p = 2, grad p = 0 at x1 = 0 -> V_extra(0) = -1
    auto s = Scenario::flat_slab(3, 1, 0.2);
    auto w = WeightTriple::parse("1 + x1^2", "1", "delta^2", s);
    auto pn = normalize_p(w, s);
    VarEnv env{{"x1", 0.0}, {"x2", 0.3}, {"x3", 0.1}};
    CHECK(pn.v_extra.eval(env) == Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("normalize_p rejects non-ambient descriptors") {
    auto s = Scenario::flat_slab(3, 1, 0.2);
    auto w = WeightTriple::parse("1 + delta^2", "1", "delta^2", s);
    CHECK_THROWS_AS(normalize_p(w, s), std::invalid_argument);
}
