#include "cgnn/config.hpp"
#include "cgnn/dde.hpp"

#include "doctest.h"
#include "oracles.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace cgnn;
using nlohmann::json;

namespace {

model::ModelSpec scalar(const std::string& b, const std::string& input, const std::string& phi,
                        std::vector<json> c = {}, std::vector<json> d = {}, double bound = 1.0) {
    auto doc = oracle::scalar_document(b, "0", input, phi, bound);
    if (!c.empty()) doc["coupling_c"] = c;
    if (!d.empty()) doc["coupling_d"] = d;
    return model::build_model(doc);
}

memory::History history_of(const model::ModelSpec& spec, std::size_t ic = 0, double t0 = 0.0) {
    return memory::History::from_initial(spec.initial.at(ic), t0);
}

double max_error_vs_exp(double h) {
    const auto spec = scalar("u", "0", "1");
    dde::IntegratorOptions opts;
    opts.fixed_step = h;
    const auto traj = dde::integrate(spec, spec.initial[0], 0.0, 1.0, opts);
    return std::fabs(traj.state(1.0)[0] - std::exp(-1.0));
}

}  // namespace

TEST_SUITE("dde_core") {

TEST_CASE("quadrature rules carry unit mass") {
    for (const auto& k : {model::KernelMeasure::exponential(1.0), model::KernelMeasure::gamma(2.0, 1.0),
                          model::KernelMeasure::exponential(0.25)}) {
        const auto rule = dde::build_rule(k, 1e-9);
        CHECK(rule.mass() == doctest::Approx(1.0 - k.tail(rule.cutoff)).epsilon(1e-12));
        CHECK(rule.cutoff == doctest::Approx(model::kernel_tail_cutoff(k, 1e-9)));
        for (const auto& node : rule.nodes) {
            CHECK(node.lag >= 0.0);
            CHECK(node.lag <= rule.cutoff);
        }
    }
    const auto atom = dde::build_rule(model::KernelMeasure::atom(2.0), 1e-9);
    REQUIRE(atom.nodes.size() == 1);
    CHECK(atom.nodes[0].lag == 2.0);
    CHECK(atom.nodes[0].weight == 1.0);
}

TEST_CASE("discrete delay functional") {
    const auto spec = scalar("u", "0", "0.5", {oracle::c_entry("1", "tanh(u1)", "1")});
    const auto h = history_of(spec);
    CHECK(dde::eval_U(spec, 0, 0.0, h) == doctest::Approx(oracle::tanh_half).epsilon(1e-13));

    const auto zero = scalar("u", "0", "0.5");
    CHECK(dde::eval_U(zero, 0, 0.0, history_of(zero)) == 0.0);

    const auto ex = model::load_model(CGNN_CONFIG_DIR "/example5.json");
    CHECK(dde::eval_U(ex, 0, 0.0, history_of(ex)) == doctest::Approx(oracle::U1_at_0).epsilon(1e-13));
}

TEST_CASE("distributed delay functional") {
    const json expk = {{"type", "exponential"}, {"rate", 1.0}};
    const auto c = scalar("u", "0", "0.7", {}, {oracle::d_entry("1", expk)});
    const auto plan = dde::QuadraturePlan::build(c, 1e-9);
    CHECK(std::fabs(dde::eval_V(c, 0, 0.0, history_of(c), plan) - 0.7) < 1e-8);

    const json atom = {{"type", "atom"}, {"location", 2.0}};
    const auto a = scalar("u", "0", "s+5", {}, {oracle::d_entry("1", atom)}, 100.0);
    const auto aplan = dde::QuadraturePlan::build(a, 1e-9);
    memory::History ramp = memory::History::from_initial(a.initial[0], 5.0);
    CHECK(std::fabs(dde::eval_V(a, 0, 5.0, ramp, aplan) - 3.0) < 1e-10);

    const auto e = scalar("u", "0", "exp(s)", {}, {oracle::d_entry("1", expk)});
    const auto eplan = dde::QuadraturePlan::build(e, 1e-9);
    CHECK(std::fabs(dde::eval_V(e, 0, 0.0, history_of(e), eplan) - 0.5) < 1e-6);

    const json gam = {{"type", "gamma"}, {"shape", 2.0}, {"rate", 1.0}};
    const auto g = scalar("u", "0", "exp(s)", {}, {oracle::d_entry("1", gam)});
    const auto gplan = dde::QuadraturePlan::build(g, 1e-12);
    CHECK(std::fabs(dde::eval_V(g, 0, 0.0, history_of(g), gplan) - 0.25) < 1e-8);
}

TEST_CASE("right-hand side") {
    const auto dec = scalar("u", "0", "1");
    const dde::QuadraturePlan none;
    CHECK(dde::rhs(dec, 0.0, history_of(dec), none)[0] == doctest::Approx(-1.0));

    const auto forced = scalar("0", "cos(t)", "0.3");
    CHECK(dde::rhs(forced, 0.0, history_of(forced), none)[0] == doctest::Approx(1.0));

    const auto ex = model::load_model(CGNN_CONFIG_DIR "/example5.json");
    const auto plan = dde::QuadraturePlan::build(ex, 1e-9);
    const auto h = history_of(ex);
    const double x1 = -0.5;
    CHECK(ex.amplification[0].a(0.0, x1) == doctest::Approx(oracle::a1_at_0).epsilon(1e-14));
    CHECK(ex.selfsignal[0].b(0.0, x1) == doctest::Approx(oracle::b1_at_0).epsilon(1e-14));
    const auto f = dde::rhs(ex, 0.0, h, plan);
    CHECK(f[0] == doctest::Approx(oracle::dx1_at_0).epsilon(1e-13));
    CHECK(f[1] == doctest::Approx(oracle::dx2_at_0).epsilon(1e-13));
}

TEST_CASE("integrator on analytic problems") {
    const auto spec = scalar("u", "0", "1");
    const auto traj = dde::integrate(spec, spec.initial[0], 0.0, 1.0);
    CHECK(std::fabs(traj.state(1.0)[0] - std::exp(-1.0)) <= 1e-6);
    CHECK(traj.t_end == 1.0);
    CHECK(traj.accepted > 0);

    const auto lag = scalar("0", "0", "1", {oracle::c_entry("-1", "u1", "1")});
    const auto lt = dde::integrate(lag, lag.initial[0], 0.0, 1.0);
    CHECK(std::fabs(lt.state(1.0)[0]) <= 1e-6);
    CHECK(std::fabs(lt.state(0.5)[0] - 0.5) <= 1e-6);

    // x(t) = 1 - t + (t - 1)^2 / 2 on [1, 2]
    const auto lt2 = dde::integrate(lag, lag.initial[0], 0.0, 2.0);
    CHECK(std::fabs(lt2.state(2.0)[0] + 0.5) <= 1e-6);
}

TEST_CASE("third-order convergence under step halving") {
    const double e1 = max_error_vs_exp(0.1);
    const double e2 = max_error_vs_exp(0.05);
    const double e3 = max_error_vs_exp(0.025);
    CHECK(e1 / e2 >= 6.0);
    CHECK(e1 / e2 <= 10.0);
    CHECK(e2 / e3 >= 6.0);
    CHECK(e2 / e3 <= 10.0);
}

TEST_CASE("example system agrees with an Euler reference") {
    const auto ex = model::load_model(CGNN_CONFIG_DIR "/example5.json");
    const auto traj = dde::integrate(ex, ex.initial[2], 0.0, 5.0);
    const auto euler = oracle::euler_example5(
        [](double s) { return std::array<double, 2>{std::sin(s), std::exp(s) - 1.0}; }, 5.0);
    double err = 0.0;
    for (int k = 0; k <= 500; ++k) {
        const double t = 0.01 * k;
        const auto x = traj.state(t);
        const auto y = euler.at(t);
        err = std::max({err, std::fabs(x[0] - y[0]), std::fabs(x[1] - y[1])});
    }
    CHECK(err <= 1e-3);
}

TEST_CASE("guards") {
    const auto div = model::load_model(CGNN_CONFIG_DIR "/divergent.json");
    try {
        dde::integrate(div, div.initial[0], 0.0, 40.0);
        FAIL("expected blow-up");
    } catch (const dde::IntegrationError& e) {
        CHECK(e.kind() == dde::IntegrationError::Kind::blow_up);
        CHECK(e.t() > 0.0);
        CHECK(e.t() < 40.0);
    }
    const auto spec = scalar("u", "0", "1");
    dde::IntegratorOptions bad;
    bad.rel_tol = -1.0;
    CHECK_THROWS_AS(dde::integrate(spec, spec.initial[0], 0.0, 1.0, bad), std::invalid_argument);
    CHECK_THROWS(dde::integrate(spec, spec.initial[0], 1.0, 1.0));
    dde::IntegratorOptions tiny;
    tiny.h_max = 1e-13;
    tiny.h_init = 1e-13;
    tiny.h_min = 1e-12;
    CHECK_THROWS(dde::integrate(spec, spec.initial[0], 0.0, 1.0, tiny));
}

TEST_CASE("fading memory keeps the solution unchanged") {
    const json expk = {{"type", "exponential"}, {"rate", 1.0}};
    const auto spec = scalar("2*u", "sin(t)", "cos(s)", {}, {oracle::d_entry("0.5", expk)});
    dde::IntegratorOptions with, without;
    without.fading_memory = false;
    const auto a = dde::integrate(spec, spec.initial[0], 0.0, 80.0, with);
    const auto b = dde::integrate(spec, spec.initial[0], 0.0, 80.0, without);
    CHECK(std::fabs(a.state(80.0)[0] - b.state(80.0)[0]) < 1e-8);
    CHECK(a.max_retained_span < b.max_retained_span);
    CHECK(a.state(1.0) == b.state(1.0));
}

TEST_CASE("trajectory export") {
    const auto spec = scalar("u", "0", "1");
    const auto traj = dde::integrate(spec, spec.initial[0], 0.0, 1.0);
    const auto dir = std::filesystem::temp_directory_path() / "cgnn_dde_test";
    std::filesystem::create_directories(dir);
    traj.write_csv(dir / "t.csv");
    std::ifstream in(dir / "t.csv");
    std::string header, first;
    std::getline(in, header);
    std::getline(in, first);
    CHECK(header == "t,x1");
    CHECK(first == "0,1");
    std::ostringstream rep;
    traj.write_report(rep);
    CHECK(rep.str().rfind("[run]", 0) == 0);
    CHECK(rep.str().find("accepted") != std::string::npos);
    std::filesystem::remove_all(dir);
}

}
