#include "cgnn/history.hpp"

#include "doctest.h"

#include <cmath>
#include <sstream>

using namespace cgnn;
using memory::History;
using memory::HistoryError;
using memory::Segment;

namespace {

std::vector<expr::Expr> phi(std::initializer_list<const char*> texts) {
    std::vector<expr::Expr> out;
    for (const char* t : texts) out.push_back(expr::parse_expr(t, {"s"}));
    return out;
}

Segment linear(double a, double b, double xa, double xb) {
    const double slope = (xb - xa) / (b - a);
    return Segment{a, b, {xa}, {xb}, {slope}, {slope}};
}

}  // namespace

TEST_SUITE("memory") {

TEST_CASE("initial function is served for t <= t0") {
    History h(phi({"-exp(s)/2", "cos(s)/2"}), 0.0, 1.0);
    const auto x = h.sample(0.0);
    CHECK(x[0] == doctest::Approx(-0.5));
    CHECK(x[1] == doctest::Approx(0.5));
    CHECK(h.t_now() == 0.0);
    CHECK(h.segments().empty());

    History z(phi({"0"}), 3.0, 1.0);
    CHECK(z.sample(-100.0)[0] == 0.0);

    History f(phi({"sin(s)", "exp(s)-1"}), 0.0, 1.0);
    CHECK(f.sample(0.0) == std::vector<double>{0.0, 0.0});

    History shifted(phi({"s"}), 2.0, 100.0);
    CHECK(shifted.sample(1.5)[0] == doctest::Approx(-0.5));
}

TEST_CASE("initial function outside its bound is rejected") {
    CHECK_THROWS_AS(History(phi({"exp(-s)"}), 0.0, 10.0), HistoryError);
    try {
        History(phi({"exp(-s)"}), 0.0, 10.0);
    } catch (const HistoryError& e) {
        CHECK(std::string(e.what()).find("phi[1](-2.5)") != std::string::npos);
    }
}

TEST_CASE("knots are exact and cubics are reproduced") {
    History h(phi({"0", "0"}), 0.0, 1.0);
    h.append_segment(Segment{0.0, 0.5, {0.0, 0.0}, {1.0, 2.0}, {0.0, 0.0}, {0.0, 0.0}});
    const auto x = h.sample(0.5);
    CHECK(x[0] == 1.0);
    CHECK(x[1] == 2.0);

    History lin(phi({"s"}), 0.0, 100.0);
    lin.append_segment(linear(0.0, 1.0, 0.0, 1.0));
    CHECK(std::fabs(lin.sample(0.5)[0] - 0.5) < 1e-12);

    Segment cubic{0.0, 2.0, {0.0}, {8.0}, {0.0}, {12.0}};
    double out = 0.0;
    cubic.evaluate(1.5, std::span<double>(&out, 1));
    CHECK(out == doctest::Approx(3.375).epsilon(1e-14));
}

TEST_CASE("append checks contiguity") {
    History h(phi({"0"}), 0.0, 1.0);
    CHECK_NOTHROW(h.append_segment(linear(0.0, 0.1, 0.0, 0.0)));
    CHECK(h.t_now() == 0.1);
    CHECK_THROWS_AS(h.append_segment(linear(0.2, 0.3, 0.0, 0.0)), HistoryError);
    CHECK_THROWS_AS(h.append_segment(linear(0.05, 0.3, 0.0, 0.0)), HistoryError);
    CHECK_THROWS_AS(h.append_segment(linear(0.1, 0.1, 0.0, 0.0)), HistoryError);
    Segment wrong{0.1, 0.2, {0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}};
    CHECK_THROWS_AS(h.append_segment(wrong), HistoryError);
    CHECK_THROWS_AS(h.sample(0.2), HistoryError);
}

TEST_CASE("truncation respects the kernel horizon") {
    History h(phi({"0"}), 0.0, 1.0);
    for (int k = 0; k < 100; ++k) h.append_segment(linear(k, k + 1, k, k + 1));
    CHECK(h.t_now() == 100.0);
    const auto before = h.sample(86.0);
    CHECK_THROWS_AS(h.truncate_before(90.0, 14.0), HistoryError);
    CHECK_NOTHROW(h.truncate_before(86.0, 14.0));
    CHECK(h.sample(86.0) == before);
    CHECK(h.segments().front().t_left <= 86.0);
    CHECK(h.retained_span() <= 15.0);
    CHECK(h.is_clamped(10.0));
    CHECK(h.sample(10.0)[0] == h.segments().front().x_left[0]);
    CHECK(h.sample(-1.0)[0] == 0.0);
}

TEST_CASE("csv export") {
    History h(phi({"1"}), 0.0, 1.0);
    h.append_segment(linear(0.0, 0.5, 1.0, 2.0));
    std::ostringstream out;
    h.write_csv(out);
    CHECK(out.str() == "t,x1\n0,1\n0.5,2\n");
}

}
