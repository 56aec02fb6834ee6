#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "hardy/expression.hpp"

using namespace hardy;
using Catch::Approx;

TEST_CASE("parsing and evaluation") {
    VarEnv env{{"x1", 2.0}, {"x2", -3.0}};
    CHECK(Expression::parse("1 + 2*3").eval({}) == 7.0);
    CHECK(Expression::parse("x1^2 + x2").eval(env) == Approx(1.0));
    CHECK(Expression::parse("2^3^2").eval({}) == 512.0);  // right associative
    CHECK(Expression::parse("-x1^2").eval(env) == Approx(-4.0));
    CHECK(Expression::parse("sin(pi/2)").eval({}) == Approx(1.0));
    CHECK(Expression::parse("exp(log(5))").eval({}) == Approx(5.0));
    CHECK(Expression::parse("pow(x1, 10)").eval(env) == Approx(1024.0));
    CHECK(Expression::parse("min(x1, x2)").eval(env) == Approx(-3.0));
    CHECK(Expression::parse("max(x1, x2)").eval(env) == Approx(2.0));
    CHECK(Expression::parse("1e-3 * 2").eval({}) == Approx(2e-3));
    CHECK(Expression::parse("abs(x2)").eval(env) == Approx(3.0));
}

TEST_CASE("parse errors carry a position") {
    CHECK_THROWS_AS(Expression::parse("1 +"), ParseError);
    CHECK_THROWS_AS(Expression::parse("foo(2)"), ParseError);
    CHECK_THROWS_AS(Expression::parse("(1 + 2"), ParseError);
    CHECK_THROWS_AS(Expression::parse("1 2"), ParseError);
    CHECK_THROWS_AS(Expression::parse("pow(1)"), ParseError);
}

TEST_CASE("unbound variable is a domain error") {
    auto e = Expression::parse("x1 + y");
    CHECK_THROWS_AS(e.eval({{"x1", 1.0}}), std::domain_error);
}

TEST_CASE("symbolic derivatives match finite differences") {
    const std::string exprs[] = {
        "x1^3 + 2*x1",        "sin(x1)*cos(x1)", "exp(-x1^2/2)",     "log(1 + x1^2)",
        "sqrt(1 + x1^2)",     "x1^x1",           "tan(x1/2)",        "atan(x1)",
        "sinh(x1)*tanh(x1)",  "1/(1+x1)",        "pow(x1, 2.5)",     "asin(x1/3)",
    };
    for (const auto& src : exprs) {
        auto e = Expression::parse(src);
        auto de = e.derivative("x1");
        for (double x : {0.3, 0.7, 1.1}) {
            const double h = 1e-6;
            const double fd =
                (e.eval({{"x1", x + h}}) - e.eval({{"x1", x - h}})) / (2 * h);
            INFO(src << " at x1=" << x);
            CHECK(de.eval({{"x1", x}}) == Approx(fd).margin(1e-6));
        }
    }
}

TEST_CASE("second derivatives are exact on polynomials") {
    auto e = Expression::parse("x1^4 - 3*x1^2 + x1");
    auto d2 = e.derivative("x1").derivative("x1");
    CHECK(d2.eval({{"x1", 2.0}}) == Approx(12 * 4 - 6));
}

TEST_CASE("variable collection") {
    auto e = Expression::parse("x1 * d + delta_tilde^2");
    auto vars = e.variables();
    REQUIRE(vars.size() == 3);
    CHECK(vars[0] == "x1");
    CHECK(vars[1] == "d");
    CHECK(vars[2] == "delta_tilde");
}

TEST_CASE("compiled evaluation agrees with tree evaluation") {
    auto e = Expression::parse("sin(x1) + x2^2 / (1 + d)");
    std::vector<std::string> slots{"x1", "x2", "d"};
    CompiledExpression c(e, slots);
    const double vals[] = {0.4, 1.5, 0.2};
    const double ref = e.eval({{"x1", 0.4}, {"x2", 1.5}, {"d", 0.2}});
    CHECK(c.eval({vals, 3}) == Approx(ref).epsilon(1e-15));
    CHECK(c.used_slots()[0]);
    CHECK(c.used_slots()[1]);
    CHECK(c.used_slots()[2]);
}

TEST_CASE("derivative of constants vanishes structurally") {
    auto e = Expression::parse("3*pi + 7");
    CHECK(e.derivative("x1").is_constant());
    CHECK(e.derivative("x1").constant_value() == 0.0);
}
