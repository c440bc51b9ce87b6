// cgnn-lab: simulate, check, compare and reproduce experiments for
// Cohen-Grossberg networks with unbounded delays.
//
// Exit codes
//   simulate: 0 ok, 1 config/usage error, 2 blow-up guard or integration failure
//   check:    0 all hypotheses pass and limsup negative, 1 config error, 3 criterion failure
//   compare:  0 asymptotic pair and converged, 1 config error, 2 integration failure,
//             3 not converged, 4 pair not asymptotic
//   recipe:   0 all verdicts pass, 1 unknown recipe or error, 2 integration failure, 3 verdict failure
//   builtin:  0 ok, 1 unknown builtin or refused parameters

#include "cgnn/config.hpp"
#include "cgnn/criteria.hpp"
#include "cgnn/dde.hpp"
#include "cgnn/experiments.hpp"

#include "CLI11.hpp"

#include <fmt/format.h>

#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

using namespace cgnn;

namespace {

struct TolOpts {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double h_max = 0.25;
    double eps_tail = 1e-9;
    double guard = 1e6;

    dde::IntegratorOptions build() const {
        dde::IntegratorOptions o;
        o.rel_tol = rel_tol;
        o.abs_tol = abs_tol;
        o.h_max = h_max;
        o.h_init = std::min(o.h_init, h_max);
        o.eps_tail = eps_tail;
        o.guard_bound = guard;
        return o;
    }
};

void add_tolerances(CLI::App* cmd, TolOpts& t) {
    cmd->add_option("--rtol", t.rel_tol, "relative tolerance")->capture_default_str();
    cmd->add_option("--atol", t.abs_tol, "absolute tolerance")->capture_default_str();
    cmd->add_option("--h-max", t.h_max, "largest step")->capture_default_str();
    cmd->add_option("--eps-tail", t.eps_tail, "kernel tail budget")->capture_default_str();
    cmd->add_option("--guard", t.guard, "blow-up bound on |x|")->capture_default_str();
}

std::vector<double> parse_weights(const std::string& text) {
    std::vector<double> d;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        const double v = std::stod(item, &used);
        if (used != item.size()) throw std::invalid_argument("bad weight '" + item + "'");
        d.push_back(v);
    }
    return d;
}

const model::InitialCondition& pick_ic(const model::ModelSpec& spec, int ic) {
    if (ic < 1 || ic > static_cast<int>(spec.initial.size()))
        throw model::ModelError("initial", fmt::format("no initial condition {} (config has {})", ic, spec.initial.size()));
    return spec.initial[static_cast<std::size_t>(ic - 1)];
}

std::string join(const std::vector<double>& v) {
    std::string s;
    for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + fmt::format("{:.6g}", v[k]);
    return s;
}

int cmd_simulate(const std::string& path, double t0, double t_end, int ic, const std::string& out, const TolOpts& tol) {
    model::ModelSpec spec;
    try {
        spec = model::load_model(path);
        pick_ic(spec, ic);
        tol.build().validate();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    try {
        const auto traj = dde::integrate(spec, pick_ic(spec, ic), t0, t_end, tol.build());
        std::filesystem::create_directories(out);
        traj.write_csv(std::filesystem::path(out) / "trajectory.csv");
        std::ofstream report(std::filesystem::path(out) / "run_report.txt");
        report << "[model]\nname = " << spec.name << "\nic = " << ic << "\n\n";
        traj.write_report(report);
        const auto x = traj.state(t_end);
        std::cout << fmt::format("{}: integrated [{:g}, {:g}] in {} steps ({} rejected), max|x| = {:.6g}\n", spec.name, t0,
                                 t_end, traj.accepted, traj.rejected, traj.max_abs);
        std::cout << "x(t_end) = (" << join(x) << ")\n";
        std::cout << "wrote " << (std::filesystem::path(out) / "trajectory.csv").string() << "\n";
        return 0;
    } catch (const dde::IntegrationError& e) {
        std::cerr << "integration failed: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_check(const std::string& path, double t_max, double step, const std::string& d_text, bool find_d) {
    model::ModelSpec spec;
    std::optional<std::vector<double>> d;
    try {
        spec = model::load_model(path);
        if (!d_text.empty()) {
            d = parse_weights(d_text);
            if (static_cast<int>(d->size()) != spec.n)
                throw std::invalid_argument(fmt::format("--d has {} entries, model has n = {}", d->size(), spec.n));
            for (double v : *d)
                if (!(v > 0.0)) throw std::invalid_argument("--d entries must be positive");
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    if (!d) {
        const auto found = criteria::find_weights(spec, t_max, step);
        if (!found.feasible) {
            std::cout << fmt::format("weights: infeasible, spectral radius {:.6g}\n", found.radius);
            return 3;
        }
        d = found.d;
        std::cout << "weights: d = (" << join(*d) << "), spectral radius " << fmt::format("{:.6g}", found.radius) << "\n";
    } else if (find_d) {
        std::cerr << "error: --d and --find-d are exclusive\n";
        return 1;
    }

    criteria::SamplingWindows win;
    win.t_max = t_max;
    win.u_max = spec.window.u_max;
    const auto report = criteria::validate_hypotheses(spec, win, d);
    report.write(std::cout);

    const auto curve = criteria::h7_limsup(spec, *d, t_max, step);
    std::cout << "\n[criterion]\n";
    std::cout << "d = " << join(*d) << "\n";
    for (std::size_t i = 0; i < curve.limsup.size(); ++i)
        std::cout << fmt::format("limsup_{} = {:.6g}\n", i + 1, curve.limsup[i]);
    std::cout << "verdict = " << (curve.negative() ? "negative" : "not-negative") << "\n";
    return report.all_pass() && curve.negative() ? 0 : 3;
}

int cmd_compare(const std::string& path_a, const std::string& path_b, int ic, double t_end, double window, double tol_gap,
                const std::string& out, const TolOpts& tol) {
    model::ModelSpec a, b;
    try {
        a = model::load_model(path_a);
        b = model::load_model(path_b);
        pick_ic(a, ic);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    criteria::GapCurve gap;
    try {
        gap = criteria::asymptotic_gap(model::make_pair(a, b));
    } catch (const model::StructuralMismatch& e) {
        std::cerr << "not an asymptotic pair: " << e.what() << "\n";
        return 4;
    }
    std::cout << "[asymptotic_gap]\n";
    for (const auto& s : gap.series)
        std::cout << fmt::format("{} = {:.6g} ({})\n", s.quantity, s.tail_max, s.decays ? "decays" : "persists");
    if (!gap.pass()) {
        std::cerr << "not an asymptotic pair: some differences do not vanish\n";
        return 4;
    }
    try {
        const auto& phi = pick_ic(a, ic);
        const auto ta = dde::integrate(a, phi, 0.0, t_end, tol.build());
        const auto tb = dde::integrate(b, phi, 0.0, t_end, tol.build());
        const auto conv = criteria::pair_convergence(ta, tb, window);
        if (!out.empty()) {
            std::filesystem::create_directories(out);
            std::ofstream csv(std::filesystem::path(out) / "convergence.csv");
            conv.write_csv(csv);
        }
        std::cout << "\n[convergence]\n";
        std::cout << fmt::format("window = {:.6g}\nfinal_gap = {:.6g}\ntolerance = {:.6g}\n", window, conv.final_value(), tol_gap);
        std::cout << "verdict = " << (conv.converged(tol_gap) ? "converged" : "not-converged") << "\n";
        return conv.converged(tol_gap) ? 0 : 3;
    } catch (const dde::IntegrationError& e) {
        std::cerr << "integration failed: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_recipe(const std::string& name, const std::string& out, double t_end) {
    experiments::RecipeOptions opts;
    opts.out_dir = out;
    opts.t_end = t_end;
    try {
        const auto rep = experiments::run_recipe(name, opts);
        rep.write(std::cout);
        return rep.pass() ? 0 : 3;
    } catch (const dde::IntegrationError& e) {
        std::cerr << "integration failed: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_builtin(const std::string& name, const std::vector<std::string>& params, const std::string& out) {
    try {
        const auto which = experiments::parse_builtin(name);
        if (!which) throw std::invalid_argument("unknown builtin '" + name + "'");
        experiments::BuiltinParams p;
        for (const auto& kv : params) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw std::invalid_argument("expected key=value, got '" + kv + "'");
            p.values[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
        }
        experiments::builtin(*which, p);  // refuses non-certified parameters
        const auto doc = experiments::builtin_document(*which, p);
        if (out.empty()) {
            std::cout << doc.dump(2) << "\n";
        } else {
            std::ofstream f(out);
            f << doc.dump(2) << "\n";
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulation and verification lab for Cohen-Grossberg networks with unbounded delays"};
    app.require_subcommand(1);

    std::string config, config_b, out, d_text, name;
    double t0 = 0.0, t_end = 40.0, t_max = 200.0, step = 0.01, window = 2.0 * std::numbers::pi, tol_gap = 1e-2;
    int ic = 1;
    bool find_d = false;
    std::vector<std::string> params;
    TolOpts tol;

    auto* sim = app.add_subcommand("simulate", "integrate one initial condition");
    sim->add_option("config", config, "model config (JSON)")->required();
    sim->add_option("--t0", t0, "start time")->capture_default_str();
    sim->add_option("--t-end", t_end, "end time")->capture_default_str();
    sim->add_option("--ic", ic, "initial condition index (1-based)")->capture_default_str();
    sim->add_option("--out", out, "output directory")->required();
    add_tolerances(sim, tol);

    auto* chk = app.add_subcommand("check", "sample hypotheses and evaluate the limsup criterion");
    chk->add_option("config", config, "model config (JSON)")->required();
    chk->add_option("--t-max", t_max, "criterion horizon")->capture_default_str();
    chk->add_option("--grid-step", step, "criterion grid step")->capture_default_str();
    auto* d_opt = chk->add_option("--d", d_text, "weights, e.g. 1,1");
    chk->add_flag("--find-d", find_d, "search for weights")->excludes(d_opt);

    auto* cmp = app.add_subcommand("compare", "check an asymptotic pair and the convergence of its solutions");
    cmp->add_option("config_a", config, "base model")->required();
    cmp->add_option("config_b", config_b, "partner model")->required();
    cmp->add_option("--ic", ic, "initial condition index of the base config")->capture_default_str();
    cmp->add_option("--t-end", t_end, "end time")->capture_default_str();
    cmp->add_option("--window", window, "sliding sup window")->capture_default_str();
    cmp->add_option("--tol", tol_gap, "final gap tolerance")->capture_default_str();
    cmp->add_option("--out", out, "write convergence.csv here");
    add_tolerances(cmp, tol);

    auto* rec = app.add_subcommand("recipe", "run a scripted experiment");
    rec->add_option("name", name, "figure12_reproduction | self_attractivity | static_periodic | almostperiodic_convergence")
        ->required();
    rec->add_option("--out", out, "output directory");
    rec->add_option("--t-end", t_end, "end time")->capture_default_str();

    auto* bi = app.add_subcommand("builtin", "print the config document of a built-in model");
    bi->add_option("name", name, "example5 | example5_asymptotic | static_kernel | highorder_periodic | loworder_almostperiodic")
        ->required();
    bi->add_option("--param", params, "key=value overrides");
    bi->add_option("--out", out, "write to file instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    if (sim->parsed()) return cmd_simulate(config, t0, t_end, ic, out, tol);
    if (chk->parsed()) return cmd_check(config, t_max, step, d_text, find_d);
    if (cmp->parsed()) return cmd_compare(config, config_b, ic, t_end, window, tol_gap, out, tol);
    if (rec->parsed()) return cmd_recipe(name, out, t_end);
    if (bi->parsed()) return cmd_builtin(name, params, out);
    return 1;
}
