#include "cgnn/config.hpp"

#include <fmt/format.h>

#include <fstream>
#include <sstream>

namespace cgnn::model {

using nlohmann::json;

namespace {

const json& member(const json& j, const char* key, const std::string& section) {
    if (!j.is_object()) throw ModelError(section, "expected an object");
    const auto it = j.find(key);
    if (it == j.end()) throw ModelError(section, std::string("missing key '") + key + "'");
    return *it;
}

double number(const json& j, const char* key, const std::string& section) {
    const json& v = member(j, key, section);
    if (!v.is_number()) throw ModelError(section + "." + key, "expected a number");
    return v.get<double>();
}

double number_or(const json& j, const char* key, double fallback, const std::string& section) {
    if (!j.contains(key)) return fallback;
    return number(j, key, section);
}

int integer(const json& j, const char* key, const std::string& section) {
    const json& v = member(j, key, section);
    if (!v.is_number_integer()) throw ModelError(section + "." + key, "expected an integer");
    return v.get<int>();
}

expr::Expr expression(const json& v, const std::vector<std::string>& params, const std::string& section) {
    if (!v.is_string()) throw ModelError(section, "expected an expression string");
    try {
        return expr::parse_expr(v.get<std::string>(), params);
    } catch (const expr::ParseError& e) {
        throw ModelError(section, e.what());
    }
}

expr::Expr expression(const json& j, const char* key, const std::vector<std::string>& params,
                      const std::string& section) {
    return expression(member(j, key, section), params, section + "." + key);
}

expr::Expr expression_or(const json& j, const char* key, const char* fallback, const std::vector<std::string>& params,
                         const std::string& section) {
    if (!j.contains(key)) return expr::parse_expr(fallback, params);
    return expression(j, key, params, section);
}

const json& array(const json& j, const char* key, const std::string& section, bool required = true) {
    static const json empty = json::array();
    if (!j.contains(key)) {
        if (required) throw ModelError(section, std::string("missing section '") + key + "'");
        return empty;
    }
    const json& v = j.at(key);
    if (!v.is_array()) throw ModelError(key, "expected an array");
    return v;
}

DelaySpec delay(const json& j, const char* key, const char* flag, const std::string& section) {
    DelaySpec d;
    d.tau = expression_or(j, key, "0", model::params::t, section);
    if (j.contains(flag)) {
        if (!j.at(flag).is_boolean()) throw ModelError(section + "." + flag, "expected a boolean");
        d.unbounded_growth = j.at(flag).get<bool>();
    }
    return d;
}

}  // namespace

KernelMeasure kernel_from_json(const json& j, const std::string& section) {
    if (!j.is_object()) throw ModelError(section, "expected a kernel object");
    const json& type = member(j, "type", section);
    if (!type.is_string()) throw ModelError(section + ".type", "expected a string");
    const auto name = type.get<std::string>();
    if (name == "exponential") return KernelMeasure::exponential(number(j, "rate", section));
    if (name == "gamma") return KernelMeasure::gamma(number(j, "shape", section), number(j, "rate", section));
    if (name == "atom") return KernelMeasure::atom(number(j, "location", section), number_or(j, "mass", 1.0, section));
    if (name == "density")
        return KernelMeasure::density(expression(j, "expr", model::params::u, section), number(j, "support", section));
    if (name == "mixture") {
        std::vector<MixtureComponent> components;
        const json& list = member(j, "components", section);
        if (!list.is_array()) throw ModelError(section + ".components", "expected an array");
        for (std::size_t k = 0; k < list.size(); ++k) {
            const auto sec = fmt::format("{}.components[{}]", section, k);
            components.push_back({number(list[k], "weight", sec), kernel_from_json(member(list[k], "kernel", sec), sec + ".kernel")});
        }
        return KernelMeasure::mixture(std::move(components));
    }
    throw ModelError(section + ".type", "unknown kernel type '" + name + "'");
}

json kernel_to_json(const KernelMeasure& k) {
    json out;
    std::visit(
        [&](const auto& rep) {
            using T = std::decay_t<decltype(rep)>;
            if constexpr (std::is_same_v<T, ExponentialKernel>) {
                out = {{"type", "exponential"}, {"rate", rep.rate}};
            } else if constexpr (std::is_same_v<T, GammaKernel>) {
                out = {{"type", "gamma"}, {"shape", rep.shape}, {"rate", rep.rate}};
            } else if constexpr (std::is_same_v<T, AtomKernel>) {
                out = {{"type", "atom"}, {"location", rep.location}, {"mass", rep.mass}};
            } else if constexpr (std::is_same_v<T, DensityKernel>) {
                out = {{"type", "density"}, {"expr", rep.density.source()}, {"support", rep.support}};
            } else {
                json list = json::array();
                for (const auto& c : rep.components) list.push_back({{"weight", c.weight}, {"kernel", kernel_to_json(c.kernel)}});
                out = {{"type", "mixture"}, {"components", list}};
            }
        },
        k.rep());
    return out;
}

ModelSpec build_model(const json& doc) {
    if (!doc.is_object()) throw ModelError("document", "expected a JSON object");
    ModelSpec spec;
    if (doc.contains("name")) {
        if (!doc.at("name").is_string()) throw ModelError("name", "expected a string");
        spec.name = doc.at("name").get<std::string>();
    }

    const json& dims = member(doc, "dimensions", "document");
    spec.n = integer(dims, "n", "dimensions");
    spec.P = integer(dims, "P", "dimensions");
    if (spec.n < 1 || spec.P < 1) throw ModelError("dimensions", "n and P must be >= 1");

    if (doc.contains("checks")) {
        const json& c = doc.at("checks");
        spec.window.t_max = number_or(c, "t_max", spec.window.t_max, "checks");
        spec.window.u_max = number_or(c, "u_max", spec.window.u_max, "checks");
    }

    const json& amp = array(doc, "amplification", "document");
    for (std::size_t i = 0; i < amp.size(); ++i) {
        const auto sec = fmt::format("amplification[{}]", i);
        AmplificationSpec a;
        a.a = expression(amp[i], "expr", model::params::tu, sec);
        a.a_lo = number(amp[i], "a_lo", sec);
        a.a_hi = number(amp[i], "a_hi", sec);
        a.A = expression_or(amp[i], "A_expr", "0", model::params::t, sec);
        spec.amplification.push_back(std::move(a));
    }

    const json& self = array(doc, "selfsignal", "document");
    for (std::size_t i = 0; i < self.size(); ++i) {
        const auto sec = fmt::format("selfsignal[{}]", i);
        SelfSignalSpec s;
        s.b = expression(self[i], "expr", model::params::tu, sec);
        s.beta = expression(self[i], "beta_expr", model::params::t, sec);
        if (self[i].contains("beta_star_expr") && !self[i].at("beta_star_expr").is_null())
            s.beta_star = expression(self[i], "beta_star_expr", model::params::t, sec);
        spec.selfsignal.push_back(std::move(s));
    }

    const json& outer = array(doc, "outer", "document");
    for (std::size_t i = 0; i < outer.size(); ++i) {
        const auto sec = fmt::format("outer[{}]", i);
        OuterSpec o;
        o.F = expression(outer[i], "F_expr", model::params::u1u2, sec);
        o.zeta = number(outer[i], "zeta", sec);
        o.sigma = number(outer[i], "sigma", sec);
        spec.outer.push_back(std::move(o));
    }

    const json& input = array(doc, "input", "document");
    for (std::size_t i = 0; i < input.size(); ++i)
        spec.input.push_back(expression(input[i], "expr", model::params::t, fmt::format("input[{}]", i)));

    const json& cc = array(doc, "coupling_c", "document", false);
    for (std::size_t k = 0; k < cc.size(); ++k) {
        const auto sec = fmt::format("coupling_c[{}]", k);
        const json& e = cc[k];
        CouplingC c;
        c.i = integer(e, "i", sec) - 1;
        c.j = integer(e, "j", sec) - 1;
        c.l = integer(e, "l", sec) - 1;
        c.p = integer(e, "p", sec) - 1;
        c.c = expression(e, "c_expr", model::params::t, sec);
        c.h = expression(e, "h_expr", model::params::u1u2, sec);
        c.gamma1 = number(e, "gamma1", sec);
        c.gamma2 = number(e, "gamma2", sec);
        c.tau = delay(e, "tau_expr", "tau_unbounded", sec);
        c.tau_tilde = delay(e, "tau_tilde_expr", "tau_tilde_unbounded", sec);
        spec.coupling_c.push_back(std::move(c));
    }

    const json& cd = array(doc, "coupling_d", "document", false);
    for (std::size_t k = 0; k < cd.size(); ++k) {
        const auto sec = fmt::format("coupling_d[{}]", k);
        const json& e = cd[k];
        CouplingD d;
        d.i = integer(e, "i", sec) - 1;
        d.j = integer(e, "j", sec) - 1;
        d.l = integer(e, "l", sec) - 1;
        d.p = integer(e, "p", sec) - 1;
        d.d = expression(e, "d_expr", model::params::t, sec);
        d.f = expression(e, "f_expr", model::params::u1u2, sec);
        d.mu1 = number(e, "mu1", sec);
        d.mu2 = number(e, "mu2", sec);
        d.g = expression(e, "g_expr", model::params::u, sec);
        d.g_tilde = expression(e, "g_tilde_expr", model::params::u, sec);
        d.xi = number(e, "xi", sec);
        d.xi_tilde = number(e, "xi_tilde", sec);
        d.kernel = kernel_from_json(member(e, "kernel", sec), sec + ".kernel");
        d.kernel_tilde = kernel_from_json(member(e, "kernel_tilde", sec), sec + ".kernel_tilde");
        spec.coupling_d.push_back(std::move(d));
    }

    const json& init = array(doc, "initial", "document", false);
    for (std::size_t k = 0; k < init.size(); ++k) {
        const auto sec = fmt::format("initial[{}]", k);
        InitialCondition ic;
        const json& phi = member(init[k], "phi", sec);
        if (!phi.is_array()) throw ModelError(sec + ".phi", "expected an array of expressions");
        for (std::size_t c = 0; c < phi.size(); ++c)
            ic.phi.push_back(expression(phi[c], model::params::s, fmt::format("{}.phi[{}]", sec, c)));
        ic.bound = number(init[k], "bound", sec);
        spec.initial.push_back(std::move(ic));
    }

    spec.validate();
    return spec;
}

json to_document(const ModelSpec& spec) {
    json doc;
    if (!spec.name.empty()) doc["name"] = spec.name;
    doc["dimensions"] = {{"n", spec.n}, {"P", spec.P}};
    doc["checks"] = {{"t_max", spec.window.t_max}, {"u_max", spec.window.u_max}};

    json amp = json::array();
    for (const auto& a : spec.amplification)
        amp.push_back({{"expr", a.a.source()}, {"a_lo", a.a_lo}, {"a_hi", a.a_hi}, {"A_expr", a.A.source()}});
    doc["amplification"] = amp;

    json self = json::array();
    for (const auto& s : spec.selfsignal) {
        json e = {{"expr", s.b.source()}, {"beta_expr", s.beta.source()}};
        if (s.beta_star) e["beta_star_expr"] = s.beta_star->source();
        self.push_back(e);
    }
    doc["selfsignal"] = self;

    json outer = json::array();
    for (const auto& o : spec.outer) outer.push_back({{"F_expr", o.F.source()}, {"zeta", o.zeta}, {"sigma", o.sigma}});
    doc["outer"] = outer;

    json input = json::array();
    for (const auto& e : spec.input) input.push_back({{"expr", e.source()}});
    doc["input"] = input;

    json cc = json::array();
    for (const auto& c : spec.coupling_c) {
        json e = {{"i", c.i + 1},           {"j", c.j + 1},          {"l", c.l + 1},
                  {"p", c.p + 1},           {"c_expr", c.c.source()}, {"h_expr", c.h.source()},
                  {"gamma1", c.gamma1},     {"gamma2", c.gamma2},    {"tau_expr", c.tau.tau.source()},
                  {"tau_tilde_expr", c.tau_tilde.tau.source()}};
        if (!c.tau.unbounded_growth) e["tau_unbounded"] = false;
        if (!c.tau_tilde.unbounded_growth) e["tau_tilde_unbounded"] = false;
        cc.push_back(e);
    }
    doc["coupling_c"] = cc;

    json cd = json::array();
    for (const auto& d : spec.coupling_d) {
        cd.push_back({{"i", d.i + 1},
                      {"j", d.j + 1},
                      {"l", d.l + 1},
                      {"p", d.p + 1},
                      {"d_expr", d.d.source()},
                      {"f_expr", d.f.source()},
                      {"mu1", d.mu1},
                      {"mu2", d.mu2},
                      {"g_expr", d.g.source()},
                      {"g_tilde_expr", d.g_tilde.source()},
                      {"xi", d.xi},
                      {"xi_tilde", d.xi_tilde},
                      {"kernel", kernel_to_json(d.kernel)},
                      {"kernel_tilde", kernel_to_json(d.kernel_tilde)}});
    }
    doc["coupling_d"] = cd;

    json init = json::array();
    for (const auto& ic : spec.initial) {
        json phi = json::array();
        for (const auto& e : ic.phi) phi.push_back(e.source());
        init.push_back({{"phi", phi}, {"bound", ic.bound}});
    }
    doc["initial"] = init;
    return doc;
}

ModelSpec load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ModelError("file", "cannot open " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ModelError("file", path.string() + ": " + e.what());
    }
    return build_model(doc);
}

void save_model(const ModelSpec& spec, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << to_document(spec).dump(2) << "\n";
}

}  // namespace cgnn::model
