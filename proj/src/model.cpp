#include "cgnn/model.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace cgnn::model {

double delay_eval(const DelaySpec& d, double t) {
    const double v = d.tau(t);
    if (v < 0.0) throw ModelError("delay", fmt::format("tau({:g}) = {:g} < 0", t, v));
    return v;
}

namespace {

void require_params(const expr::Expr& e, const std::vector<std::string>& expected, const std::string& section) {
    if (e.params() != expected) {
        std::string want;
        for (const auto& p : expected) want += (want.empty() ? "" : ",") + p;
        throw ModelError(section, "expression '" + e.source() + "' must be over (" + want + ")");
    }
}

void require_nonnegative(double v, const std::string& section) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ModelError(section, fmt::format("declared constant {:g} must be >= 0", v));
}

void check_index(int v, int limit, const std::string& section) {
    if (v < 0 || v >= limit) throw ModelError(section, fmt::format("index {} outside [1, {}]", v + 1, limit));
}

void check_delay(const DelaySpec& d, double t_max, const std::string& section) {
    require_params(d.tau, params::t, section);
    const int steps = std::max(1, static_cast<int>(std::ceil(t_max / 0.05)));
    for (int k = 0; k <= steps; ++k) {
        const double t = t_max * k / steps;
        const double v = d.tau(t);
        if (v < 0.0) throw ModelError(section, fmt::format("tau({:g}) = {:g} < 0", t, v));
    }
}

std::string canonical(const expr::Expr& e) { return e.to_string(); }

std::string canonical(const DelaySpec& d) {
    return canonical(d.tau) + (d.unbounded_growth ? "|unbounded" : "|bounded");
}

std::string shared_c(const CouplingC& c) {
    return fmt::format("{}|{:.17g}|{:.17g}", canonical(c.h), c.gamma1, c.gamma2);
}

std::string shared_d(const CouplingD& d) {
    return fmt::format("{}|{:.17g}|{:.17g}|{}|{}|{:.17g}|{:.17g}|{}|{}", canonical(d.f), d.mu1, d.mu2, canonical(d.g),
                       canonical(d.g_tilde), d.xi, d.xi_tilde, d.kernel.describe(), d.kernel_tilde.describe());
}

std::string full_c(const CouplingC& c) {
    return fmt::format("{}/{}/{}/{}|{}|{}|{}|{}", c.i, c.j, c.l, c.p, canonical(c.c), shared_c(c), canonical(c.tau),
                       canonical(c.tau_tilde));
}

std::string full_d(const CouplingD& d) {
    return fmt::format("{}/{}/{}/{}|{}|{}", d.i, d.j, d.l, d.p, canonical(d.d), shared_d(d));
}

std::string amplification_key(const AmplificationSpec& a) {
    return fmt::format("{}|{:.17g}|{:.17g}|{}", canonical(a.a), a.a_lo, a.a_hi, canonical(a.A));
}

std::string outer_key(const OuterSpec& o) { return fmt::format("{}|{:.17g}|{:.17g}", canonical(o.F), o.zeta, o.sigma); }

}  // namespace

std::optional<std::string> check_phi_bound(const InitialCondition& ic, double horizon) {
    const int steps = std::max(1, static_cast<int>(std::ceil(horizon / 0.25)));
    for (int k = 0; k <= steps; ++k) {
        const double s = -horizon * k / steps;
        for (std::size_t c = 0; c < ic.phi.size(); ++c) {
            double v = 0.0;
            try {
                v = ic.phi[c](s);
            } catch (const expr::EvalError& err) {
                return fmt::format("phi[{}] not finite at s={:g} ({})", c + 1, s, err.what());
            }
            if (std::fabs(v) > ic.bound)
                return fmt::format("phi[{}]({:g}) = {:g} exceeds declared bound {:g}", c + 1, s, v, ic.bound);
        }
    }
    return std::nullopt;
}

void ModelSpec::validate() const {
    if (n < 1) throw ModelError("dimensions", "n must be >= 1");
    if (P < 1) throw ModelError("dimensions", "P must be >= 1");
    const auto un = static_cast<std::size_t>(n);
    if (amplification.size() != un) throw ModelError("amplification", fmt::format("expected {} entries", n));
    if (selfsignal.size() != un) throw ModelError("selfsignal", fmt::format("expected {} entries", n));
    if (outer.size() != un) throw ModelError("outer", fmt::format("expected {} entries", n));
    if (input.size() != un) throw ModelError("input", fmt::format("expected {} entries", n));

    for (std::size_t i = 0; i < un; ++i) {
        const auto sec = fmt::format("amplification[{}]", i);
        const auto& a = amplification[i];
        require_params(a.a, params::tu, sec + ".expr");
        require_params(a.A, params::t, sec + ".A_expr");
        if (!(a.a_lo > 0.0)) throw ModelError(sec + ".a_lo", "must be > 0");
        if (!(a.a_hi >= a.a_lo)) throw ModelError(sec + ".a_hi", "must be >= a_lo");

        const auto ssec = fmt::format("selfsignal[{}]", i);
        require_params(selfsignal[i].b, params::tu, ssec + ".expr");
        require_params(selfsignal[i].beta, params::t, ssec + ".beta_expr");
        if (selfsignal[i].beta_star) require_params(*selfsignal[i].beta_star, params::t, ssec + ".beta_star_expr");

        const auto osec = fmt::format("outer[{}]", i);
        require_params(outer[i].F, params::u1u2, osec + ".F_expr");
        require_nonnegative(outer[i].zeta, osec + ".zeta");
        require_nonnegative(outer[i].sigma, osec + ".sigma");

        require_params(input[i], params::t, fmt::format("input[{}].expr", i));
    }

    std::set<std::array<int, 4>> seen;
    for (std::size_t k = 0; k < coupling_c.size(); ++k) {
        const auto sec = fmt::format("coupling_c[{}]", k);
        const auto& c = coupling_c[k];
        check_index(c.i, n, sec + ".i");
        check_index(c.j, n, sec + ".j");
        check_index(c.l, n, sec + ".l");
        check_index(c.p, P, sec + ".p");
        if (!seen.insert(c.key()).second) throw ModelError(sec, "duplicate (i,j,l,p) entry");
        require_params(c.c, params::t, sec + ".c_expr");
        require_params(c.h, params::u1u2, sec + ".h_expr");
        require_nonnegative(c.gamma1, sec + ".gamma1");
        require_nonnegative(c.gamma2, sec + ".gamma2");
        check_delay(c.tau, window.t_max, sec + ".tau_expr");
        check_delay(c.tau_tilde, window.t_max, sec + ".tau_tilde_expr");
    }

    seen.clear();
    for (std::size_t k = 0; k < coupling_d.size(); ++k) {
        const auto sec = fmt::format("coupling_d[{}]", k);
        const auto& d = coupling_d[k];
        check_index(d.i, n, sec + ".i");
        check_index(d.j, n, sec + ".j");
        check_index(d.l, n, sec + ".l");
        check_index(d.p, P, sec + ".p");
        if (!seen.insert(d.key()).second) throw ModelError(sec, "duplicate (i,j,l,p) entry");
        require_params(d.d, params::t, sec + ".d_expr");
        require_params(d.f, params::u1u2, sec + ".f_expr");
        require_params(d.g, params::u, sec + ".g_expr");
        require_params(d.g_tilde, params::u, sec + ".g_tilde_expr");
        require_nonnegative(d.mu1, sec + ".mu1");
        require_nonnegative(d.mu2, sec + ".mu2");
        require_nonnegative(d.xi, sec + ".xi");
        require_nonnegative(d.xi_tilde, sec + ".xi_tilde");
        try {
            d.kernel.validate();
        } catch (const std::invalid_argument& e) {
            throw ModelError(sec + ".kernel", e.what());
        }
        try {
            d.kernel_tilde.validate();
        } catch (const std::invalid_argument& e) {
            throw ModelError(sec + ".kernel_tilde", e.what());
        }
    }

    for (std::size_t k = 0; k < initial.size(); ++k) {
        const auto sec = fmt::format("initial[{}]", k);
        const auto& ic = initial[k];
        if (ic.phi.size() != un) throw ModelError(sec, fmt::format("expected {} phi expressions", n));
        for (const auto& e : ic.phi) require_params(e, params::s, sec + ".phi");
        if (!(ic.bound > 0.0)) throw ModelError(sec + ".bound", "must be > 0");
        if (auto witness = check_phi_bound(ic, std::max(window.t_max, kernel_horizon(1e-9))))
            throw ModelError(sec, *witness);
    }
    if (!(window.t_max > 0.0) || !(window.u_max > 0.0)) throw ModelError("checks", "windows must be positive");
}

double ModelSpec::kernel_horizon(double eps_tail) const {
    double horizon = 0.0;
    for (const auto& d : coupling_d) {
        horizon = std::max(horizon, kernel_tail_cutoff(d.kernel, eps_tail));
        horizon = std::max(horizon, kernel_tail_cutoff(d.kernel_tilde, eps_tail));
    }
    return horizon;
}

bool structurally_equal(const ModelSpec& a, const ModelSpec& b) {
    if (a.n != b.n || a.P != b.P) return false;
    if (a.amplification.size() != b.amplification.size() || a.selfsignal.size() != b.selfsignal.size() ||
        a.outer.size() != b.outer.size() || a.input.size() != b.input.size() ||
        a.coupling_c.size() != b.coupling_c.size() || a.coupling_d.size() != b.coupling_d.size() ||
        a.initial.size() != b.initial.size())
        return false;
    for (std::size_t i = 0; i < a.amplification.size(); ++i) {
        if (amplification_key(a.amplification[i]) != amplification_key(b.amplification[i])) return false;
        const auto& sa = a.selfsignal[i];
        const auto& sb = b.selfsignal[i];
        if (canonical(sa.b) != canonical(sb.b) || canonical(sa.beta) != canonical(sb.beta)) return false;
        if (sa.beta_star.has_value() != sb.beta_star.has_value()) return false;
        if (sa.beta_star && canonical(*sa.beta_star) != canonical(*sb.beta_star)) return false;
        if (outer_key(a.outer[i]) != outer_key(b.outer[i])) return false;
        if (canonical(a.input[i]) != canonical(b.input[i])) return false;
    }
    for (std::size_t k = 0; k < a.coupling_c.size(); ++k)
        if (full_c(a.coupling_c[k]) != full_c(b.coupling_c[k])) return false;
    for (std::size_t k = 0; k < a.coupling_d.size(); ++k)
        if (full_d(a.coupling_d[k]) != full_d(b.coupling_d[k])) return false;
    for (std::size_t k = 0; k < a.initial.size(); ++k) {
        if (a.initial[k].bound != b.initial[k].bound) return false;
        for (std::size_t c = 0; c < a.initial[k].phi.size(); ++c)
            if (canonical(a.initial[k].phi[c]) != canonical(b.initial[k].phi[c])) return false;
    }
    return a.window.t_max == b.window.t_max && a.window.u_max == b.window.u_max;
}

AsymptoticPair make_pair(ModelSpec base, ModelSpec partner) {
    if (base.n != partner.n || base.P != partner.P)
        throw StructuralMismatch(fmt::format("dimensions differ: (n={}, P={}) vs (n={}, P={})", base.n, base.P,
                                             partner.n, partner.P));
    for (int i = 0; i < base.n; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        if (amplification_key(base.amplification[ui]) != amplification_key(partner.amplification[ui]))
            throw StructuralMismatch(fmt::format("amplification[{}] differs", i + 1));
        if (outer_key(base.outer[ui]) != outer_key(partner.outer[ui]))
            throw StructuralMismatch(fmt::format("outer[{}] differs", i + 1));
    }
    std::map<std::array<int, 4>, const CouplingC*> cmap;
    for (const auto& c : base.coupling_c) cmap[c.key()] = &c;
    for (const auto& c : partner.coupling_c) {
        const auto it = cmap.find(c.key());
        if (it != cmap.end() && shared_c(*it->second) != shared_c(c))
            throw StructuralMismatch(fmt::format("coupling_c ({},{},{},{}) activation differs", c.i + 1, c.j + 1,
                                                 c.l + 1, c.p + 1));
    }
    std::map<std::array<int, 4>, const CouplingD*> dmap;
    for (const auto& d : base.coupling_d) dmap[d.key()] = &d;
    for (const auto& d : partner.coupling_d) {
        const auto it = dmap.find(d.key());
        if (it != dmap.end() && shared_d(*it->second) != shared_d(d))
            throw StructuralMismatch(fmt::format("coupling_d ({},{},{},{}) activation or kernel differs", d.i + 1,
                                                 d.j + 1, d.l + 1, d.p + 1));
    }
    return AsymptoticPair{std::move(base), std::move(partner)};
}

}  // namespace cgnn::model
