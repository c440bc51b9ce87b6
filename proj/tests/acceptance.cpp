// One PASS/FAIL line per acceptance criterion; exit status 0 iff all pass.

#include "cgnn/config.hpp"
#include "cgnn/criteria.hpp"
#include "cgnn/dde.hpp"
#include "cgnn/experiments.hpp"

#include "oracles.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

using namespace cgnn;
using nlohmann::json;

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

struct Outcome {
    bool pass = false;
    std::string detail;
};

model::ModelSpec example5() { return model::load_model(CGNN_CONFIG_DIR "/example5.json"); }
model::ModelSpec partner5() { return model::load_model(CGNN_CONFIG_DIR "/example5_asymptotic.json"); }

Outcome figure12() {
    const auto spec = example5();
    const auto start = std::chrono::steady_clock::now();
    const auto trajs = experiments::integrate_all(spec, spec.initial, 0.0, 40.0, {}, 1);
    double gap = 0.0;
    for (std::size_t a = 0; a < trajs.size(); ++a)
        for (std::size_t b = a + 1; b < trajs.size(); ++b)
            gap = std::max(gap, criteria::pair_convergence(trajs[a], trajs[b], 10.0).final_value());
    double defect = 0.0;
    for (const auto& tr : trajs) defect = std::max(defect, experiments::periodicity_defect(tr, two_pi, 30.0, 40.0 - two_pi));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {trajs.size() == 3 && gap <= 1e-2 && defect <= 1e-2 && secs <= 30.0,
            fmt::format("max pairwise gap on [30,40] {:.3g} (<= 1e-2), 2pi defect {:.3g} (<= 1e-2), {:.2f} s on one core (<= 30)",
                        gap, defect, secs)};
}

Outcome base_vs_partner() {
    const auto base = example5();
    const auto partner = partner5();
    const auto gap = criteria::asymptotic_gap(model::make_pair(base, partner));
    const auto ta = dde::integrate(base, base.initial[0], 0.0, 40.0);
    const auto tb = dde::integrate(partner, base.initial[0], 0.0, 40.0);
    const auto conv = criteria::pair_convergence(ta, tb, two_pi);
    return {gap.pass() && conv.converged(1e-2),
            fmt::format("coefficient gaps vanish: {}, final window gap {:.3g} (<= 1e-2)", gap.pass() ? "yes" : "no",
                        conv.final_value())};
}

Outcome self_attractivity() {
    const auto base = example5();
    const auto ta = dde::integrate(base, base.initial[0], 0.0, 40.0);
    const auto tb = dde::integrate(base, base.initial[1], 0.0, 40.0);
    const auto conv = criteria::pair_convergence(ta, tb, two_pi);
    const auto x = ta.state(40.0), y = tb.state(40.0);
    const double at40 = std::max(std::fabs(x[0] - y[0]), std::fabs(x[1] - y[1]));
    return {conv.converged(1e-2) && at40 <= 1e-2,
            fmt::format("gap at t=40 {:.3g}, final window gap {:.3g} (<= 1e-2)", at40, conv.final_value())};
}

Outcome h7_partner() {
    const auto curve = criteria::h7_limsup(partner5(), std::vector<double>{1.0, 1.0}, 200.0, 0.01);
    const double worst = *std::max_element(curve.limsup.begin(), curve.limsup.end());
    return {worst <= -1.0 && curve.negative(),
            fmt::format("limsup = ({:.6g}, {:.6g}) (<= -1.0; anchors {:.6g}, {:.6g})", curve.limsup[0], curve.limsup[1],
                        -4.0 * oracle::deriv_min_m + 1.0, oracle::h7_2_sup)};
}

model::ModelSpec scalar(const std::string& b, const std::string& phi, const std::vector<json>& d = {}) {
    auto doc = oracle::scalar_document(b, "0", "0", phi);
    if (!d.empty()) doc["coupling_d"] = d;
    return model::build_model(doc);
}

double exp_error(double h) {
    const auto spec = scalar("u", "1");
    dde::IntegratorOptions opts;
    opts.fixed_step = h;
    return std::fabs(dde::integrate(spec, spec.initial[0], 0.0, 1.0, opts).state(1.0)[0] - std::exp(-1.0));
}

Outcome integrator() {
    const auto ex = example5();
    const auto traj = dde::integrate(ex, ex.initial[2], 0.0, 5.0);
    const auto euler = oracle::euler_example5(
        [](double s) { return std::array<double, 2>{std::sin(s), std::exp(s) - 1.0}; }, 5.0, 1e-4);
    double err = 0.0;
    for (int k = 0; k <= 5000; ++k) {
        const double t = 1e-3 * k;
        const auto x = traj.state(t);
        const auto y = euler.at(t);
        err = std::max({err, std::fabs(x[0] - y[0]), std::fabs(x[1] - y[1])});
    }
    const auto spec = scalar("u", "1");
    const double decay = std::fabs(dde::integrate(spec, spec.initial[0], 0.0, 1.0).state(1.0)[0] - std::exp(-1.0));
    const double e1 = exp_error(0.1), e2 = exp_error(0.05), e3 = exp_error(0.025);
    const double r1 = e1 / e2, r2 = e2 / e3;
    const bool order = r1 >= 6.0 && r1 <= 10.0 && r2 >= 6.0 && r2 <= 10.0;
    return {err <= 1e-3 && decay <= 1e-6 && order,
            fmt::format("Euler sup diff {:.3g} (<= 1e-3), x'=-x error {:.3g} (<= 1e-6), halving ratios {:.3g}, {:.3g} (in [6,10])",
                        err, decay, r1, r2)};
}

Outcome quadrature() {
    const json expk = {{"type", "exponential"}, {"rate", 1.0}};
    const auto c = scalar("u", "0.7", {oracle::d_entry("1", expk)});
    const auto cplan = dde::QuadraturePlan::build(c, 1e-9);
    const double vc = dde::eval_V(c, 0, 0.0, memory::History::from_initial(c.initial[0], 0.0), cplan);

    auto edoc = oracle::scalar_document("u", "0", "0", "exp(s)");
    edoc["coupling_d"] = json::array({oracle::d_entry("1", expk)});
    const auto e = model::build_model(edoc);
    const auto eplan = dde::QuadraturePlan::build(e, 1e-9);
    const double ve = dde::eval_V(e, 0, 0.0, memory::History::from_initial(e.initial[0], 0.0), eplan);

    const double cut = model::kernel_tail_cutoff(model::KernelMeasure::exponential(1.0), 1e-6);
    const bool ok = std::fabs(vc - 0.7) <= 1e-8 && std::fabs(ve - 0.5) <= 1e-6 && std::fabs(cut - oracle::ln_1e6) <= 1e-3;
    return {ok, fmt::format("constant history error {:.3g} (<= 1e-8), e^t case error {:.3g} (<= 1e-6), cutoff {:.8g} vs ln(1e6) (+-1e-3)",
                            std::fabs(vc - 0.7), std::fabs(ve - 0.5), cut)};
}

Outcome invariances() {
    bool scale_ok = true;
    const auto ex = example5();
    const std::vector<double> d{1.0, 0.37};
    std::vector<double> d7{7.0, 7.0 * 0.37};
    for (int k = 0; k <= 2000; ++k) {
        const double t = 0.05 * k;
        const auto a = criteria::h7_value(ex, d, t);
        const auto b = criteria::h7_value(ex, d7, t);
        for (int i = 0; i < 2; ++i)
            if (std::fabs(a[i] - b[i]) > 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::fabs(a[i]))) scale_ok = false;
        if (criteria::h7_value(ex, std::vector<double>{1.0, 1.0}, t) != criteria::h7_value(ex, std::vector<double>{7.0, 7.0}, t))
            scale_ok = false;
    }

    std::vector<model::ModelSpec> corpus = {ex, partner5(), model::load_model(CGNN_CONFIG_DIR "/constant_2x2.json"),
                                            model::load_model(CGNN_CONFIG_DIR "/overcoupled_n1.json")};
    for (auto name : experiments::all_builtins()) corpus.push_back(model::build_model(experiments::builtin_document(name)));
    int returned = 0;
    bool sound = true;
    for (const auto& spec : corpus) {
        const auto w = criteria::find_weights(spec, 100.0, 0.01);
        if (!w.feasible) continue;
        ++returned;
        if (!criteria::h7_limsup(spec, w.d, 100.0, 0.01).negative()) sound = false;
    }
    const auto over = criteria::find_weights(model::load_model(CGNN_CONFIG_DIR "/overcoupled_n1.json"), 100.0, 0.01);
    return {scale_ok && sound && returned > 0 && !over.feasible,
            fmt::format("scaling invariant: {}, find_weights returned {} of {} and all negative: {}, n=1 overcoupled infeasible "
                        "(radius {:.3g}): {}",
                        scale_ok ? "yes" : "no", returned, corpus.size(), sound ? "yes" : "no", over.radius,
                        over.feasible ? "no" : "yes")};
}

Outcome falsification() {
    using criteria::Verdict;
    const std::vector<double> ones{1.0, 1.0};
    std::string detail;
    bool ok = true;
    auto expect_fail = [&](const char* label, const model::ModelSpec& spec, int h) {
        const auto rep = criteria::validate_hypotheses(spec, {}, ones);
        const auto& r = rep.at(h);
        const bool caught = r.verdict == Verdict::fail && r.witness.has_value();
        ok = ok && caught;
        detail += fmt::format("{}: {}; ", label, caught ? r.witness->describe() : std::string("not detected"));
    };
    auto h2 = example5();
    h2.amplification[0].a_hi = 2.5;
    expect_fail("H2", h2, 2);
    auto h5 = example5();
    for (auto& c : h5.coupling_c) c.gamma1 /= 2.0;
    expect_fail("H5", h5, 5);
    auto h4 = example5();
    h4.coupling_c[0].tau.tau = expr::parse_expr("t", model::params::t);
    expect_fail("H4", h4, 4);
    const bool clean = criteria::validate_hypotheses(example5(), {}, ones).all_pass();
    ok = ok && clean;
    detail += fmt::format("unmodified example: {}", clean ? "all pass" : "failure reported");
    return {ok, detail};
}

Outcome static_builtin() {
    bool refused = false;
    std::string why;
    try {
        experiments::BuiltinParams p;
        p.values["coupling"] = 0.5;
        experiments::builtin(experiments::BuiltinName::static_kernel, p);
    } catch (const experiments::BuiltinRefused& e) {
        refused = true;
        why = e.what();
    }
    const auto rep = experiments::run_recipe("static_periodic");
    const auto* defect = rep.verdict("periodicity_defect");
    double gap = 0.0;
    for (const auto& v : rep.verdicts)
        if (v.name.rfind("gap_", 0) == 0) gap = std::max(gap, v.value);
    const bool ok = refused && rep.pass() && defect && defect->value <= 1e-2;
    return {ok, fmt::format("coupling 0.5 refused: {}, defaults converge (gap {:.3g}), periodicity defect {:.3g} (<= 1e-2)",
                            refused ? "yes" : "no", gap, defect ? defect->value : -1.0)};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria_list = {
        {"three-solution reproduction", figure12},
        {"asymptotic partner convergence", base_vs_partner},
        {"self attractivity", self_attractivity},
        {"H7 limsup on the periodic partner", h7_partner},
        {"integrator vs oracles", integrator},
        {"distributed-delay quadrature", quadrature},
        {"criterion invariances", invariances},
        {"hypothesis falsification", falsification},
        {"static kernel builtin", static_builtin},
    };
    int failures = 0;
    int k = 0;
    for (const auto& [name, run] : criteria_list) {
        ++k;
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failures;
        fmt::print("criterion {}: {} [{}] {}\n", k, o.pass ? "PASS" : "FAIL", name, o.detail);
    }
    fmt::print("{} of {} criteria passed\n", k - failures, k);
    return failures == 0 ? 0 : 1;
}
