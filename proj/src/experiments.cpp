#include "cgnn/experiments.hpp"
#include "cgnn/bounds.hpp"
#include "cgnn/config.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <numbers>
#include <ostream>
#include <set>
#include <thread>

namespace cgnn::experiments {

using nlohmann::json;

const char* to_string(BuiltinName name) {
    switch (name) {
        case BuiltinName::example5: return "example5";
        case BuiltinName::example5_asymptotic: return "example5_asymptotic";
        case BuiltinName::static_kernel: return "static_kernel";
        case BuiltinName::highorder_periodic: return "highorder_periodic";
        case BuiltinName::loworder_almostperiodic: return "loworder_almostperiodic";
    }
    return "?";
}

const std::vector<BuiltinName>& all_builtins() {
    static const std::vector<BuiltinName> names = {BuiltinName::example5, BuiltinName::example5_asymptotic,
                                                   BuiltinName::static_kernel, BuiltinName::highorder_periodic,
                                                   BuiltinName::loworder_almostperiodic};
    return names;
}

std::optional<BuiltinName> parse_builtin(std::string_view name) {
    for (auto b : all_builtins())
        if (name == to_string(b)) return b;
    return std::nullopt;
}

double BuiltinParams::get(const std::string& key, double fallback) const {
    const auto it = values.find(key);
    return it == values.end() ? fallback : it->second;
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string num(double v) { return fmt::format("{}", v); }

void reject_unknown(const BuiltinParams& p, std::set<std::string> known, const char* family) {
    for (const auto& [k, _] : p.values)
        if (!known.count(k)) throw std::invalid_argument(fmt::format("{}: unknown parameter '{}'", family, k));
}

json initial_pair(int n) {
    json first = json::array(), second = json::array();
    for (int k = 0; k < n; ++k) {
        first.push_back(k % 2 == 0 ? "cos(s)/2" : "-exp(s)/2");
        second.push_back(k % 2 == 0 ? "sin(s)" : "exp(s)-1");
    }
    return json::array({{{"phi", first}, {"bound", 1.0}}, {{"phi", second}, {"bound", 1.0}}});
}

std::string amplitude_expr(double lo, double hi, const char* fn) {
    if (lo == hi) return num(lo);
    return fmt::format("{}+{}*{}(u)", num(0.5 * (lo + hi)), num(0.5 * (hi - lo)), fn);
}

void check_bounds(double a_lo, double a_hi, const char* family) {
    if (!(a_lo > 0.0) || !(a_hi >= a_lo)) throw std::invalid_argument(fmt::format("{}: need 0 < a_lo <= a_hi", family));
}

json example5_doc(bool partner) {
    const std::string tr = partner ? "" : "+exp(-t)";
    json doc;
    doc["name"] = partner ? "example5_asymptotic" : "example5";
    doc["dimensions"] = {{"n", 2}, {"P", 1}};
    doc["amplification"] = json::array({{{"expr", "sin(u)+2"}, {"a_lo", 1.0}, {"a_hi", 3.0}},
                                        {{"expr", "cos(u)+2"}, {"a_lo", 1.0}, {"a_hi", 3.0}}});
    const std::string k1 = partner ? "4" : "(4+exp(-t))";
    const std::string k2 = partner ? "(5+cos(t))" : "(5+cos(t)+exp(-t))";
    doc["selfsignal"] = json::array({{{"expr", k1 + "*u*exp(sin(u)/(1+u^2))"}, {"beta_expr", k1 + "*0.5458"}},
                                     {{"expr", k2 + "*u"}, {"beta_expr", k2}, {"beta_star_expr", k2}}});
    doc["outer"] = json::array({{{"F_expr", "u1"}, {"zeta", 1.0}, {"sigma", 0.0}},
                                {{"F_expr", "u1"}, {"zeta", 1.0}, {"sigma", 0.0}}});
    doc["input"] = json::array({{{"expr", "exp(sin(t))" + tr}}, {{"expr", "cos(t)" + tr}}});
    doc["coupling_c"] = json::array({
        {{"i", 1}, {"j", 2}, {"l", 1}, {"p", 1}, {"c_expr", "cos(t)/3" + tr}, {"h_expr", "tanh(u1)"},
         {"gamma1", 1.0}, {"gamma2", 0.0}, {"tau_expr", "abs(sin(t))"}, {"tau_tilde_expr", "0"}},
        {{"i", 2}, {"j", 1}, {"l", 1}, {"p", 1}, {"c_expr", "2*sin(t)/3" + tr}, {"h_expr", "tanh(u1)"},
         {"gamma1", 1.0}, {"gamma2", 0.0}, {"tau_expr", "abs(cos(t))"}, {"tau_tilde_expr", "0"}},
    });
    doc["initial"] = json::array({{{"phi", {"-exp(s)/2", "cos(s)/2"}}, {"bound", 1.0}},
                                  {{"phi", {"cos(s)/2", "-exp(s)/2"}}, {"bound", 1.0}},
                                  {{"phi", {"sin(s)", "exp(s)-1"}}, {"bound", 1.0}}});
    return doc;
}

json static_doc(const BuiltinParams& p) {
    reject_unknown(p, {"n", "coupling", "beta", "a_lo", "a_hi", "rate", "forcing"}, "static_kernel");
    const double nd = p.get("n", 2);
    if (nd < 1 || nd > 64 || nd != std::floor(nd)) throw std::invalid_argument("static_kernel: n must be an integer in [1,64]");
    const int n = static_cast<int>(nd);
    const double coupling = p.get("coupling", 0.4), beta = p.get("beta", 1.0);
    const double a_lo = p.get("a_lo", 1.0), a_hi = p.get("a_hi", 2.0);
    const double rate = p.get("rate", 1.0), forcing = p.get("forcing", 0.5);
    check_bounds(a_lo, a_hi, "static_kernel");
    if (!(beta > 0.0) || !(rate > 0.0)) throw std::invalid_argument("static_kernel: beta and rate must be positive");

    json doc;
    doc["name"] = "static_kernel";
    doc["dimensions"] = {{"n", n}, {"P", 1}};
    doc["amplification"] = json::array();
    doc["selfsignal"] = json::array();
    doc["outer"] = json::array();
    doc["input"] = json::array();
    doc["coupling_d"] = json::array();
    const json kernel = {{"type", "exponential"}, {"rate", rate}};
    for (int i = 0; i < n; ++i) {
        doc["amplification"].push_back({{"expr", amplitude_expr(a_lo, a_hi, "cos")}, {"a_lo", a_lo}, {"a_hi", a_hi}});
        doc["selfsignal"].push_back({{"expr", fmt::format("{}*u-{}*{}(t)", num(beta), num(forcing), i % 2 ? "cos" : "sin")},
                                     {"beta_expr", num(beta)},
                                     {"beta_star_expr", num(beta)}});
        doc["outer"].push_back({{"F_expr", "tanh(u2)"}, {"zeta", 0.0}, {"sigma", 1.0}});
        doc["input"].push_back({{"expr", "0"}});
        doc["coupling_d"].push_back({{"i", i + 1}, {"j", (i + 1) % n + 1}, {"l", 1}, {"p", 1},
                                     {"d_expr", fmt::format("{}*cos(t)", num(coupling))}, {"f_expr", "u1"},
                                     {"mu1", 1.0}, {"mu2", 0.0}, {"g_expr", "u"}, {"g_tilde_expr", "u"},
                                     {"xi", 1.0}, {"xi_tilde", 1.0}, {"kernel", kernel}, {"kernel_tilde", kernel}});
    }
    doc["initial"] = initial_pair(n);
    return doc;
}

json highorder_doc(const BuiltinParams& p, bool partner) {
    reject_unknown(p, {"beta", "a_lo", "a_hi", "rho", "c_amp", "d1", "d2", "transient"}, "highorder_periodic");
    const double beta = p.get("beta", 3.0), a_lo = p.get("a_lo", 1.0), a_hi = p.get("a_hi", 2.0);
    const double rho = p.get("rho", 1.0), c_amp = p.get("c_amp", 0.25), d1 = p.get("d1", 0.15), d2 = p.get("d2", 0.05);
    const double transient = p.get("transient", 1.0);
    check_bounds(a_lo, a_hi, "highorder_periodic");
    if (!(beta > 0.0) || !(rho > 0.0)) throw std::invalid_argument("highorder_periodic: beta and rho must be positive");
    const std::string tr = partner || transient == 0.0 ? "" : fmt::format("+{}*exp(-t)", num(transient));
    const int n = 2;
    const json kernel = {{"type", "gamma"}, {"shape", 2.0}, {"rate", 1.0}};
    const std::string act1 = fmt::format("tanh({}*u1)", num(rho));
    const std::string act2 = fmt::format("tanh({}*u2)", num(rho));

    json doc;
    doc["name"] = partner ? "highorder_periodic_limit" : "highorder_periodic";
    doc["dimensions"] = {{"n", n}, {"P", 2}};
    doc["amplification"] = json::array();
    doc["selfsignal"] = json::array();
    doc["outer"] = json::array();
    doc["input"] = json::array();
    doc["coupling_c"] = json::array();
    doc["coupling_d"] = json::array();
    for (int i = 0; i < n; ++i) {
        doc["amplification"].push_back({{"expr", amplitude_expr(a_lo, a_hi, "sin")}, {"a_lo", a_lo}, {"a_hi", a_hi}});
        doc["selfsignal"].push_back({{"expr", num(beta) + "*u"}, {"beta_expr", num(beta)}, {"beta_star_expr", num(beta)}});
        doc["outer"].push_back({{"F_expr", "u1+u2"}, {"zeta", 1.0}, {"sigma", 1.0}});
        doc["input"].push_back({{"expr", (i == 0 ? "cos(t)" : "sin(t)") + tr}});
        for (int j = 0; j < n; ++j) {
            doc["coupling_c"].push_back({{"i", i + 1}, {"j", j + 1}, {"l", 1}, {"p", 1},
                                         {"c_expr", fmt::format("{}*cos(t)", num(c_amp)) + tr}, {"h_expr", act1},
                                         {"gamma1", rho}, {"gamma2", 0.0}, {"tau_expr", "0"}, {"tau_tilde_expr", "0"}});
            doc["coupling_d"].push_back({{"i", i + 1}, {"j", j + 1}, {"l", 1}, {"p", 1},
                                         {"d_expr", fmt::format("{}*sin(t)", num(d1))}, {"f_expr", act1},
                                         {"mu1", rho}, {"mu2", 0.0}, {"g_expr", "u"}, {"g_tilde_expr", "u"},
                                         {"xi", 1.0}, {"xi_tilde", 1.0}, {"kernel", kernel}, {"kernel_tilde", kernel}});
            // f_j(rho u1) f_j(rho u2) with |tanh| <= 1: Lipschitz constants rho, rho
            doc["coupling_d"].push_back({{"i", i + 1}, {"j", j + 1}, {"l", j + 1}, {"p", 2},
                                         {"d_expr", fmt::format("{}*cos(t)", num(d2))}, {"f_expr", act1 + "*" + act2},
                                         {"mu1", rho}, {"mu2", rho}, {"g_expr", "u"}, {"g_tilde_expr", "u"},
                                         {"xi", 1.0}, {"xi_tilde", 1.0}, {"kernel", kernel}, {"kernel_tilde", kernel}});
        }
    }
    doc["initial"] = initial_pair(n);
    return doc;
}

json loworder_doc(const BuiltinParams& p, bool partner) {
    reject_unknown(p, {"beta", "a_lo", "a_hi", "c_amp", "d_amp", "p_amp", "transient"}, "loworder_almostperiodic");
    const double beta = p.get("beta", 4.0), a_lo = p.get("a_lo", 1.0), a_hi = p.get("a_hi", 2.0);
    const double c_amp = p.get("c_amp", 0.3), d_amp = p.get("d_amp", 0.2), p_amp = p.get("p_amp", 0.2);
    const double transient = p.get("transient", 1.0);
    check_bounds(a_lo, a_hi, "loworder_almostperiodic");
    if (!(beta > 0.0)) throw std::invalid_argument("loworder_almostperiodic: beta must be positive");
    const std::string tr = partner || transient == 0.0 ? "" : fmt::format("+{}*exp(-t)", num(transient));
    const std::string r2 = num(std::numbers::sqrt2);
    const std::string ap = fmt::format("(sin(t)+sin({}*t))/2", r2);
    const std::string ap2 = fmt::format("(cos(t)+cos({}*t))/2", r2);
    const int n = 2;
    const json kernel = {{"type", "exponential"}, {"rate", 1.0}};

    json doc;
    doc["name"] = partner ? "loworder_almostperiodic_limit" : "loworder_almostperiodic";
    doc["dimensions"] = {{"n", n}, {"P", 2}};
    doc["amplification"] = json::array();
    doc["selfsignal"] = json::array();
    doc["outer"] = json::array();
    doc["input"] = json::array();
    doc["coupling_c"] = json::array();
    doc["coupling_d"] = json::array();
    for (int i = 0; i < n; ++i) {
        doc["amplification"].push_back({{"expr", amplitude_expr(a_lo, a_hi, "cos")}, {"a_lo", a_lo}, {"a_hi", a_hi}});
        doc["selfsignal"].push_back({{"expr", num(beta) + "*u"}, {"beta_expr", num(beta)}, {"beta_star_expr", num(beta)}});
        doc["outer"].push_back({{"F_expr", "u1+u2"}, {"zeta", 1.0}, {"sigma", 1.0}});
        doc["input"].push_back({{"expr", (i == 0 ? ap : ap2) + tr}});
        for (int j = 0; j < n; ++j) {
            doc["coupling_c"].push_back({{"i", i + 1}, {"j", j + 1}, {"l", 1}, {"p", 1},
                                         {"c_expr", num(c_amp) + "*" + ap + tr}, {"h_expr", "tanh(u1)"},
                                         {"gamma1", 1.0}, {"gamma2", 0.0}, {"tau_expr", "0"}, {"tau_tilde_expr", "0"}});
            doc["coupling_c"].push_back({{"i", i + 1}, {"j", j + 1}, {"l", 1}, {"p", 2},
                                         {"c_expr", num(d_amp) + "*" + ap + tr}, {"h_expr", "tanh(u1)"},
                                         {"gamma1", 1.0}, {"gamma2", 0.0},
                                         {"tau_expr", fmt::format("1+0.5*sin({}*t)", r2)}, {"tau_tilde_expr", "0"}});
            doc["coupling_d"].push_back({{"i", i + 1}, {"j", j + 1}, {"l", 1}, {"p", 1},
                                         {"d_expr", num(p_amp) + "*" + ap + tr}, {"f_expr", "u1"},
                                         {"mu1", 1.0}, {"mu2", 0.0}, {"g_expr", "tanh(u)"}, {"g_tilde_expr", "u"},
                                         {"xi", 1.0}, {"xi_tilde", 1.0}, {"kernel", kernel}, {"kernel_tilde", kernel}});
        }
    }
    doc["initial"] = initial_pair(n);
    return doc;
}

double max_h7_over(const model::ModelSpec& spec, double t_lo, double t_hi, double step) {
    const std::vector<double> ones(static_cast<std::size_t>(spec.n), 1.0);
    double worst = -std::numeric_limits<double>::infinity();
    const auto count = static_cast<long>(std::floor((t_hi - t_lo) / step + 1e-9));
    for (long k = 0; k <= count; ++k) {
        const auto v = criteria::h7_value(spec, ones, t_lo + static_cast<double>(k) * step);
        worst = std::max(worst, *std::max_element(v.begin(), v.end()));
    }
    return worst;
}

}  // namespace

json builtin_document(BuiltinName name, const BuiltinParams& params) {
    switch (name) {
        case BuiltinName::example5:
        case BuiltinName::example5_asymptotic:
            if (!params.values.empty()) throw std::invalid_argument("example5 takes no parameters");
            return example5_doc(name == BuiltinName::example5_asymptotic);
        case BuiltinName::static_kernel: return static_doc(params);
        case BuiltinName::highorder_periodic: return highorder_doc(params, false);
        case BuiltinName::loworder_almostperiodic: return loworder_doc(params, false);
    }
    throw std::invalid_argument("unknown builtin");
}

BuiltinModel builtin(BuiltinName name, const BuiltinParams& params) {
    BuiltinModel out;
    switch (name) {
        case BuiltinName::example5:
        case BuiltinName::example5_asymptotic: {
            if (!params.values.empty()) throw std::invalid_argument("example5 takes no parameters");
            auto pair = model::make_pair(model::build_model(example5_doc(false)), model::build_model(example5_doc(true)));
            if (name == BuiltinName::example5) {
                out.base = std::move(pair.base);
                out.partner = std::move(pair.partner);
            } else {
                out.base = std::move(pair.partner);
            }
            out.period = kTwoPi;
            return out;
        }
        case BuiltinName::static_kernel: {
            out.base = model::build_model(static_doc(params));
            out.period = kTwoPi;
            const double worst = max_h7_over(out.base, 0.0, kTwoPi, 1e-3);
            if (!(worst < 0.0))
                throw BuiltinRefused(fmt::format(
                    "static_kernel: a_lo*beta*d_i > a_hi*sum sigma|c_ij|d_j fails with d=1 (max excess {:.6g} over one period)",
                    worst));
            return out;
        }
        case BuiltinName::highorder_periodic: {
            out.base = model::build_model(highorder_doc(params, false));
            out.partner = model::build_model(highorder_doc(params, true));
            model::make_pair(out.base, *out.partner);
            out.period = kTwoPi;
            auto unit = *out.partner;
            for (auto& a : unit.amplification) a.a_lo = a.a_hi = 1.0;
            const double existence = max_h7_over(unit, 0.0, kTwoPi, 1e-3);
            const double attract = max_h7_over(*out.partner, 0.0, kTwoPi, 1e-3);
            if (!(existence < 0.0) || !(attract < 0.0))
                throw BuiltinRefused(fmt::format(
                    "highorder_periodic: periodic-existence margin {:.6g} / attractivity margin {:.6g} must both be negative",
                    existence, attract));
            return out;
        }
        case BuiltinName::loworder_almostperiodic: {
            out.base = model::build_model(loworder_doc(params, false));
            out.partner = model::build_model(loworder_doc(params, true));
            model::make_pair(out.base, *out.partner);
            const double beta = params.get("beta", 4.0), a_lo = params.get("a_lo", 1.0), a_hi = params.get("a_hi", 2.0);
            const double amp = params.get("c_amp", 0.3) + params.get("d_amp", 0.2) + params.get("p_amp", 0.2);
            // sup |(sin t + sin(sqrt2 t))/2| = 1, all Lipschitz constants 1, d = 1
            const double lhs = a_lo * beta, rhs = out.base.n * a_hi * amp;
            if (!(lhs > rhs))
                throw BuiltinRefused(fmt::format(
                    "loworder_almostperiodic: a_lo*beta = {:.6g} must exceed sum_j a_hi*(c+ + d+ + p+) = {:.6g}", lhs, rhs));
            return out;
        }
    }
    throw std::invalid_argument("unknown builtin");
}

double periodicity_defect(const criteria::StateFn& x, double omega, double t_a, double t_b, double dt) {
    if (!(omega > 0.0)) throw std::invalid_argument("periodicity_defect: omega must be positive");
    if (!(t_b >= t_a)) throw std::invalid_argument("periodicity_defect: empty window");
    auto D = [&](double t) {
        const auto a = x(t), b = x(t + omega);
        double m = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(b[i] - a[i]));
        return m;
    };
    if (t_b == t_a) return D(t_a);
    return expr::sup_over(D, t_a, t_b, dt).second;
}

double periodicity_defect(const dde::Trajectory& traj, double omega, double t_a, double t_b, double dt) {
    if (t_a < traj.t0 || t_b + omega > traj.t_end + 1e-12)
        throw std::invalid_argument(fmt::format("periodicity_defect: window [{:g},{:g}] + {:g} exceeds trajectory [{:g},{:g}]",
                                                t_a, t_b, omega, traj.t0, traj.t_end));
    return periodicity_defect([&](double t) { return traj.state(std::min(t, traj.t_end)); }, omega, t_a, t_b, dt);
}

int thread_cap() {
    if (const char* env = std::getenv("CGNN_LAB_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<dde::Trajectory> integrate_all(const model::ModelSpec& spec, const std::vector<model::InitialCondition>& ics,
                                           double t0, double t_end, const dde::IntegratorOptions& opts, int threads) {
    const std::size_t cap = static_cast<std::size_t>(threads > 0 ? threads : thread_cap());
    std::vector<dde::Trajectory> out(ics.size());
    std::vector<std::exception_ptr> errors(ics.size());
    for (std::size_t start = 0; start < ics.size(); start += cap) {
        const std::size_t stop = std::min(ics.size(), start + cap);
        if (stop - start == 1) {
            out[start] = dde::integrate(spec, ics[start], t0, t_end, opts);
            continue;
        }
        std::vector<std::thread> pool;
        for (std::size_t k = start; k < stop; ++k)
            pool.emplace_back([&, k] {
                try {
                    out[k] = dde::integrate(spec, ics[k], t0, t_end, opts);
                } catch (...) {
                    errors[k] = std::current_exception();
                }
            });
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

bool ExperimentReport::pass() const {
    return !verdicts.empty() && std::all_of(verdicts.begin(), verdicts.end(), [](const auto& v) { return v.pass; });
}

const RecipeVerdict* ExperimentReport::verdict(const std::string& name) const {
    for (const auto& v : verdicts)
        if (v.name == name) return &v;
    return nullptr;
}

void ExperimentReport::write(std::ostream& out) const {
    out << "[recipe]\n";
    out << "name = " << recipe << "\n";
    for (std::size_t k = 0; k < models.size(); ++k) out << "model_" << (k + 1) << " = " << models[k] << "\n";
    out << "verdict = " << (pass() ? "pass" : "fail") << "\n";
    out << fmt::format("wall_seconds = {:.3f}\n", wall_seconds);
    for (const auto& t : trajectories) {
        out << "\n[trajectory." << t.label << "]\n";
        out << "accepted_steps = " << t.accepted << "\n";
        out << "rejected_steps = " << t.rejected << "\n";
        out << fmt::format("max_abs_state = {:.10g}\n", t.max_abs);
        out << fmt::format("wall_seconds = {:.3f}\n", t.wall_seconds);
    }
    for (const auto& v : verdicts) {
        out << "\n[verdict." << v.name << "]\n";
        out << fmt::format("value = {:.10g}\n", v.value);
        out << fmt::format("tolerance = {:.10g}\n", v.tolerance);
        out << "pass = " << (v.pass ? "true" : "false") << "\n";
    }
}

const std::vector<std::string>& recipe_names() {
    static const std::vector<std::string> names = {"figure12_reproduction", "self_attractivity", "static_periodic",
                                                   "almostperiodic_convergence"};
    return names;
}

namespace {

struct RecipeSetup {
    model::ModelSpec spec;
    std::vector<model::InitialCondition> ics;
    double period = 0.0;  // > 0: periodicity defect is checked
    double window = kTwoPi;
    double criterion_t_max = 200.0;
    double criterion_step = 0.01;
    double criterion_tail = 0.5;
    double criterion_tol = 0.0;  // verdict: max limsup < 0 and <= tol when tol < 0
    bool check_bound = false;
    bool check_runtime = false;
};

void write_outputs(const std::filesystem::path& dir, const ExperimentReport& rep, const std::vector<dde::Trajectory>& trajs) {
    std::filesystem::create_directories(dir);
    for (std::size_t k = 0; k < trajs.size(); ++k) trajs[k].write_csv(dir / fmt::format("trajectory_{}.csv", k + 1));
    {
        std::ofstream out(dir / "convergence.csv");
        out << "t";
        for (const auto& l : rep.convergence_labels) out << ",g_" << l;
        out << "\n";
        const auto& grid = rep.convergence.front().grid;
        for (std::size_t k = 0; k < grid.size(); ++k) {
            out << fmt::format("{:.10g}", grid[k]);
            for (const auto& c : rep.convergence) out << fmt::format(",{:.15g}", c.g[k]);
            out << "\n";
        }
    }
    if (rep.criterion) {
        std::ofstream out(dir / "criterion.csv");
        rep.criterion->write_csv(out);
    }
    if (!rep.defect_grid.empty()) {
        std::ofstream out(dir / "periodicity.csv");
        out << "t,defect\n";
        for (std::size_t k = 0; k < rep.defect_grid.size(); ++k)
            out << fmt::format("{:.10g},{:.15g}\n", rep.defect_grid[k], rep.defect_curve[k]);
    }
    std::ofstream out(dir / "report.txt");
    rep.write(out);
}

ExperimentReport execute(const std::string& name, RecipeSetup setup, const RecipeOptions& opts) {
    const auto start = std::chrono::steady_clock::now();
    ExperimentReport rep;
    rep.recipe = name;
    rep.models.push_back(setup.spec.name);

    const double t0 = 0.0, t_end = opts.t_end;
    const auto trajs = integrate_all(setup.spec, setup.ics, t0, t_end, opts.integrator, opts.threads);
    for (std::size_t k = 0; k < trajs.size(); ++k)
        rep.trajectories.push_back({fmt::format("{}", k + 1), trajs[k].accepted, trajs[k].rejected, trajs[k].max_abs,
                                    trajs[k].wall_seconds});

    for (std::size_t a = 0; a < trajs.size(); ++a)
        for (std::size_t b = a + 1; b < trajs.size(); ++b) {
            rep.convergence_labels.push_back(fmt::format("{}_{}", a + 1, b + 1));
            rep.convergence.push_back(criteria::pair_convergence(trajs[a], trajs[b], setup.window));
            const double g = rep.convergence.back().final_value();
            rep.verdicts.push_back({fmt::format("gap_{}_{}", a + 1, b + 1), g, 1e-2, g <= 1e-2});
        }

    if (setup.period > 0.0) {
        const double ta = t_end - 10.0, tb = t_end - setup.period;
        double worst = 0.0;
        for (const auto& tr : trajs) worst = std::max(worst, periodicity_defect(tr, setup.period, ta, tb));
        rep.verdicts.push_back({"periodicity_defect", worst, 1e-2, worst <= 1e-2});
        for (double t = ta; t <= tb + 1e-12; t += 0.01) {
            const auto x = trajs.front().state(t), y = trajs.front().state(t + setup.period);
            double m = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::fabs(y[i] - x[i]));
            rep.defect_grid.push_back(t);
            rep.defect_curve.push_back(m);
        }
    }

    if (setup.check_bound) {
        double worst = 0.0;
        for (const auto& tr : trajs) worst = std::max(worst, tr.max_abs);
        rep.verdicts.push_back({"max_abs_state", worst, 10.0, worst <= 10.0});
    }

    const std::vector<double> ones(static_cast<std::size_t>(setup.spec.n), 1.0);
    rep.criterion = criteria::h7_limsup(setup.spec, ones, setup.criterion_t_max, setup.criterion_step, setup.criterion_tail);
    const double lim = *std::max_element(rep.criterion->limsup.begin(), rep.criterion->limsup.end());
    rep.verdicts.push_back({"h7_limsup", lim, setup.criterion_tol, lim < 0.0 && lim <= setup.criterion_tol});

    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (setup.check_runtime) rep.verdicts.push_back({"wall_seconds", rep.wall_seconds, 30.0, rep.wall_seconds <= 30.0});
    if (!opts.out_dir.empty()) write_outputs(opts.out_dir, rep, trajs);
    return rep;
}

}  // namespace

ExperimentReport run_recipe(std::string_view name, const RecipeOptions& opts) {
    opts.integrator.validate();
    if (!(opts.t_end >= 30.0)) throw std::invalid_argument("run_recipe: t_end must be at least 30");
    RecipeSetup setup;
    if (name == "figure12_reproduction") {
        auto m = builtin(BuiltinName::example5);
        setup.spec = m.base;
        setup.ics = m.base.initial;
        setup.period = m.period;
        setup.window = 10.0;
        setup.criterion_tol = -1.0;
        setup.check_bound = true;
        setup.check_runtime = true;
    } else if (name == "self_attractivity") {
        auto m = builtin(BuiltinName::example5);
        setup.spec = m.base;
        setup.ics = {m.base.initial[0], m.base.initial[1]};
    } else if (name == "static_periodic") {
        auto m = builtin(BuiltinName::static_kernel);
        setup.spec = m.base;
        setup.ics = m.base.initial;
        setup.period = m.period;
        setup.criterion_t_max = m.period;
        setup.criterion_step = 1e-3;
        setup.criterion_tail = 1.0;
    } else if (name == "almostperiodic_convergence") {
        auto m = builtin(BuiltinName::loworder_almostperiodic);
        setup.spec = m.base;
        setup.ics = m.base.initial;
    } else {
        throw std::invalid_argument(fmt::format("unknown recipe '{}'", name));
    }
    return execute(std::string(name), std::move(setup), opts);
}

}  // namespace cgnn::experiments
