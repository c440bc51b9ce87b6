#include "cgnn/bounds.hpp"
#include "cgnn/expr.hpp"

#include "doctest.h"

#include <cmath>

using namespace cgnn::expr;

TEST_SUITE("exprlang") {

TEST_CASE("parse and evaluate basic expressions") {
    CHECK(parse_expr("sin(u)+2", {"u"})(0.0) == doctest::Approx(2.0));
    CHECK(parse_expr("2+3*t", {"t"})(1.0) == doctest::Approx(5.0));
    CHECK(parse_expr("tanh(u)", {"u"})(0.5) == doctest::Approx(0.46211715726000974).epsilon(1e-14));
    CHECK(parse_expr("u*exp(sin(u)/(1+u^2))", {"u"})(0.0) == 0.0);
    CHECK(parse_expr("cos(t)/3 + exp(-t)", {"t"})(0.0) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("precedence and associativity") {
    CHECK(parse_expr("2^3^2", {})(std::span<const double>{}) == doctest::Approx(512.0));
    CHECK(parse_expr("-2^2", {})(std::span<const double>{}) == doctest::Approx(-4.0));
    CHECK(parse_expr("8/4/2", {})(std::span<const double>{}) == doctest::Approx(1.0));
    CHECK(parse_expr("10-4-3", {})(std::span<const double>{}) == doctest::Approx(3.0));
    CHECK(parse_expr("2*pi", {})(std::span<const double>{}) == doctest::Approx(2.0 * M_PI));
    CHECK(parse_expr("u1-u2", {"u1", "u2"})(3.0, 5.0) == doctest::Approx(-2.0));
}

TEST_CASE("syntax errors carry offsets") {
    try {
        parse_expr("sin(", {"u"});
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 4);
    }
    CHECK_THROWS_AS(parse_expr("foo(u)", {"u"}), ParseError);
    CHECK_THROWS_AS(parse_expr("v+1", {"u"}), ParseError);
    CHECK_THROWS_AS(parse_expr("sin(u,u)", {"u"}), ParseError);
    CHECK_THROWS_AS(parse_expr("", {"u"}), ParseError);
    CHECK_THROWS_AS(parse_expr("u\xc3\xa9", {"u"}), ParseError);
}

TEST_CASE("non-finite evaluation names the subtree") {
    const auto e = parse_expr("1+1/u", {"u"});
    try {
        e(0.0);
        FAIL("expected EvalError");
    } catch (const EvalError& err) {
        CHECK(err.subtree().find("/") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_expr("exp(u)", {"u"})(1000.0), EvalError);
}

TEST_CASE("canonical print round-trips") {
    for (const char* text : {"(4+exp(-t))*u*exp(sin(u)/(1+u^2))", "-3.25*abs(cos(t))^2", "2*pi+e", "tan(u)-tanh(-u)"}) {
        const auto a = parse_expr(text, {"t", "u"});
        const auto b = parse_expr(a.to_string(), {"t", "u"});
        CHECK(a == b);
        CHECK(a(0.3, -1.7) == b(0.3, -1.7));
    }
}

TEST_CASE("named evaluation") {
    const auto e = parse_expr("t*u", {"t", "u"});
    CHECK(eval_expr(e, {{"t", 2.0}, {"u", 3.0}}) == 6.0);
    CHECK_THROWS(eval_expr(e, {{"t", 2.0}}));
}

TEST_CASE("sampled bound estimates") {
    const auto th = parse_expr("tanh(u)", {"u"});
    CHECK(estimate_bound(th, "u", -5, 5, BoundKind::lipschitz, 2001).value == doctest::Approx(1.0).epsilon(0.01));
    const auto sq = parse_expr("u^2", {"u"});
    CHECK(estimate_bound(sq, "u", 0, 1, BoundKind::lipschitz, 2001).value == doctest::Approx(2.0).epsilon(0.01));
    // oracle: dense numpy central differences give m = 0.545845 at u = -0.4736
    const auto b = parse_expr("u*exp(sin(u)/(1+u^2))", {"u"});
    const auto m = estimate_bound(b, "u", -10, 10, BoundKind::derivative_min, 1000001);
    CHECK(m.value == doctest::Approx(0.545845).epsilon(1e-5));
    CHECK(m.argument == doctest::Approx(-0.4736).epsilon(1e-3));
    CHECK_FALSE(m.certified);
    CHECK_THROWS(estimate_bound(th, "u", 1, 1, BoundKind::sup, 10));
    CHECK_THROWS(estimate_bound(th, "u", 0, 1, BoundKind::sup, 1));
}

TEST_CASE("sup_over refines the grid maximum") {
    const auto [arg, val] = sup_over([](double t) { return 2.0 * std::fabs(std::sin(t)); }, 0.0, 6.0, 0.01);
    CHECK(val == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(std::fabs(std::sin(arg)) == doctest::Approx(1.0).epsilon(1e-9));
}

}
