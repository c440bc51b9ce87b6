#include "cgnn/criteria.hpp"
#include "cgnn/bounds.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <random>
#include <set>

namespace cgnn::criteria {

using model::ModelSpec;

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::pass_sampled: return "pass-sampled";
        case Verdict::fail: return "fail";
        case Verdict::not_applicable: return "not-applicable";
    }
    return "?";
}

std::string Witness::describe() const {
    std::string s = fmt::format("{} at {}: observed {:.10g}, declared {:.10g}", indices, point, observed, declared);
    if (!detail.empty()) s += " (" + detail + ")";
    return s;
}

bool HypothesisReport::all_pass() const {
    return std::none_of(results.begin(), results.end(), [](const auto& r) { return r.verdict == Verdict::fail; });
}

void HypothesisReport::write(std::ostream& out) const {
    for (const auto& r : results) {
        out << "[" << r.name << "]\n";
        out << "verdict = " << to_string(r.verdict) << "\n";
        if (r.witness) out << "witness = " << r.witness->describe() << "\n";
        if (!r.caveat.empty()) out << "caveat = " << r.caveat << "\n";
    }
}

namespace {

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) v[static_cast<std::size_t>(k)] = (k + 1 == n) ? b : a + (b - a) * k / (n - 1);
    return v;
}

std::string idx(int i) { return fmt::format("i={}", i + 1); }
std::string idx4(const std::array<int, 4>& k) {
    return fmt::format("i={},j={},l={},p={}", k[0] + 1, k[1] + 1, k[2] + 1, k[3] + 1);
}

// Keeps the largest violation seen.
struct Worst {
    std::optional<Witness> witness;
    double excess = 0.0;

    void offer(double ex, const std::function<Witness()>& make) {
        if (ex > excess || (!witness && ex > 0.0) || (std::isnan(ex) && !witness)) {
            excess = std::isnan(ex) ? std::numeric_limits<double>::infinity() : ex;
            witness = make();
        }
    }
};

HypothesisResult finish(std::string name, Worst&& w, std::string caveat = {}) {
    HypothesisResult r;
    r.name = std::move(name);
    r.verdict = w.witness ? Verdict::fail : Verdict::pass_sampled;
    r.witness = std::move(w.witness);
    r.caveat = std::move(caveat);
    return r;
}

double safe(const std::function<double()>& f) {
    try {
        return f();
    } catch (const expr::EvalError&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

// H1: sup on the window plus far-field probes.
void check_bounded(Worst& w, const std::string& what, const std::function<double(double)>& f,
                   const std::vector<double>& tg) {
    double window_sup = 0.0;
    for (double t : tg) {
        const double v = safe([&] { return f(t); });
        if (!std::isfinite(v)) {
            w.offer(std::numeric_limits<double>::infinity(),
                    [&] { return Witness{what, fmt::format("t={:.6g}", t), v, 0.0, "non-finite"}; });
            return;
        }
        window_sup = std::max(window_sup, std::fabs(v));
    }
    const double limit = 10.0 * (1.0 + window_sup);
    for (int k = 1; k <= 10; ++k) {
        const double t = tg.back() * std::ldexp(1.0, k);
        const double v = safe([&] { return f(t); });
        const double ex = std::isfinite(v) ? std::fabs(v) - limit : std::numeric_limits<double>::infinity();
        w.offer(ex, [&] {
            return Witness{what, fmt::format("t={:.6g}", t), v, limit, "far-field value exceeds 10*(1+window sup)"};
        });
    }
}

HypothesisResult check_H1(const ModelSpec& spec, const SamplingWindows& win) {
    const auto tg = linspace(0.0, win.t_max, win.t_samples);
    Worst w;
    for (const auto& c : spec.coupling_c)
        check_bounded(w, "c " + idx4(c.key()), [&](double t) { return c.c(t); }, tg);
    for (const auto& d : spec.coupling_d)
        check_bounded(w, "d " + idx4(d.key()), [&](double t) { return d.d(t); }, tg);
    for (int i = 0; i < spec.n; ++i) {
        check_bounded(w, "I " + idx(i), [&](double t) { return spec.input[i](t); }, tg);
        for (double u : {-win.u_max, 0.0, win.u_max})
            check_bounded(w, fmt::format("b(.,{:g}) {}", u, idx(i)), [&](double t) { return spec.selfsignal[i].b(t, u); },
                          tg);
    }
    return finish("H1", std::move(w), "boundedness sampled on the window and at far-field probes");
}

HypothesisResult check_H2(const ModelSpec& spec, const SamplingWindows& win) {
    const auto tg = linspace(0.0, win.t_max, win.t_samples);
    const auto ug = linspace(-win.u_max, win.u_max, win.u_samples);
    const double du = ug[1] - ug[0];
    constexpr double kDt = 1e-5, kTol = 1e-6;
    Worst w;
    for (int i = 0; i < spec.n; ++i) {
        const auto& A = spec.amplification[i];
        for (double t : tg) {
            double worst_hi = -1.0, worst_lo = -1.0, u_hi = 0.0, u_lo = 0.0;
            for (double u : ug) {
                const double a = safe([&] { return A.a(t, u); });
                if (!std::isfinite(a)) {
                    w.offer(std::numeric_limits<double>::infinity(),
                            [&] { return Witness{"a " + idx(i), fmt::format("t={:.6g}, u={:.6g}", t, u), a, A.a_hi, "non-finite"}; });
                    continue;
                }
                if (a - A.a_hi > worst_hi) worst_hi = a - A.a_hi, u_hi = u;
                if (A.a_lo - a > worst_lo) worst_lo = A.a_lo - a, u_lo = u;
                const double tc = std::max(t, kDt);
                const double dadt = (A.a(tc + kDt, u) - A.a(tc - kDt, u)) / (2.0 * kDt);
                const double lhs = A.A(tc) * a * a;
                w.offer(lhs - dadt - kTol, [&] {
                    return Witness{"a " + idx(i), fmt::format("t={:.6g}, u={:.6g}", tc, u), lhs, dadt,
                                   "A*a^2 > da/dt (observed A*a^2, declared-side da/dt)"};
                });
            }
            if (worst_hi > 0.0) {
                const auto [uu, vv] = expr::sup_over([&](double u) { return A.a(t, u); }, u_hi - du, u_hi + du, du / 8);
                w.offer(vv - A.a_hi, [&] {
                    return Witness{"a " + idx(i), fmt::format("t={:.6g}, u={:.6g}", t, uu), vv, A.a_hi, "a exceeds a_hi"};
                });
            }
            if (worst_lo > 0.0) {
                const auto [uu, vv] = expr::sup_over([&](double u) { return -A.a(t, u); }, u_lo - du, u_lo + du, du / 8);
                w.offer(A.a_lo + vv, [&] {
                    return Witness{"a " + idx(i), fmt::format("t={:.6g}, u={:.6g}", t, uu), -vv, A.a_lo, "a below a_lo"};
                });
            }
        }
    }
    return finish("H2", std::move(w));
}

HypothesisResult check_H3(const ModelSpec& spec, const SamplingWindows& win) {
    const auto tg = linspace(0.0, win.t_max, win.t_samples);
    const auto ug = linspace(-win.u_max, win.u_max, win.u_samples);
    Worst w;
    for (int i = 0; i < spec.n; ++i) {
        const auto& S = spec.selfsignal[i];
        for (double t : tg) {
            const double beta = safe([&] { return S.beta(t); });
            w.offer(-beta, [&] { return Witness{"beta " + idx(i), fmt::format("t={:.6g}", t), beta, 0.0, "beta must be >= 0"}; });
            double prev = safe([&] { return S.b(t, ug[0]); });
            for (std::size_t k = 1; k < ug.size(); ++k) {
                const double cur = safe([&] { return S.b(t, ug[k]); });
                const double slope = (cur - prev) / (ug[k] - ug[k - 1]);
                const double tol = 1e-9 * std::max(1.0, std::fabs(beta));
                w.offer(beta - tol - slope, [&] {
                    return Witness{"b " + idx(i), fmt::format("t={:.6g}, u={:.6g}, v={:.6g}", t, ug[k - 1], ug[k]), slope,
                                   beta, "divided difference below beta"};
                });
                prev = cur;
            }
        }
    }
    return finish("H3", std::move(w));
}

HypothesisResult check_H4(const ModelSpec& spec, const SamplingWindows& win) {
    const double T = win.t_max;
    const auto head = linspace(0.0, T / 4.0, std::max(2, win.t_samples / 4));
    const auto tail = linspace(T / 2.0, T, std::max(2, win.t_samples / 2));
    Worst w;
    bool any = false;
    auto check = [&](const model::DelaySpec& d, const std::string& what) {
        any = true;
        if (!d.unbounded_growth) {
            w.offer(std::numeric_limits<double>::infinity(),
                    [&] { return Witness{what, "declaration", 0.0, 0.0, "t - tau(t) declared not to diverge"}; });
            return;
        }
        double C = 0.0;
        for (double t : head) C = std::max(C, t / 2.0 - (t - safe([&] { return d.tau(t); })));
        for (double t : tail) {
            const double growth = t - safe([&] { return d.tau(t); });
            w.offer(t / 2.0 - C - growth, [&] {
                return Witness{what, fmt::format("t={:.6g}", t), growth, t / 2.0 - C, "t - tau(t) below t/2 - C"};
            });
        }
    };
    for (const auto& c : spec.coupling_c) {
        check(c.tau, "tau " + idx4(c.key()));
        check(c.tau_tilde, "tau~ " + idx4(c.key()));
    }
    if (!any) {
        HypothesisResult r;
        r.name = "H4";
        r.verdict = Verdict::not_applicable;
        r.caveat = "no discrete delays";
        return r;
    }
    return finish("H4", std::move(w), "t - tau(t) -> inf is not falsifiable by finite sampling (non-certified)");
}

// |f(u1,u2) - f(v1,v2)| <= L1|u1-v1| + L2|u2-v2|, via partial slopes and random pairs.
void check_lipschitz2(Worst& w, const std::string& what, const expr::Expr& f, double L1, double L2,
                      const SamplingWindows& win, std::uint32_t seed) {
    const auto ug = linspace(-win.u_max, win.u_max, win.u_samples);
    const auto fixed = linspace(-win.u_max, win.u_max, 9);
    auto tol = [](double L) { return 1e-9 * std::max(1.0, L); };
    for (int arg = 0; arg < 2; ++arg) {
        const double L = arg == 0 ? L1 : L2;
        for (double other : fixed) {
            auto at = [&](double v) { return arg == 0 ? f(v, other) : f(other, v); };
            double prev = safe([&] { return at(ug[0]); });
            for (std::size_t k = 1; k < ug.size(); ++k) {
                const double cur = safe([&] { return at(ug[k]); });
                const double slope = std::fabs(cur - prev) / (ug[k] - ug[k - 1]);
                w.offer(slope - L - tol(L), [&] {
                    return Witness{what,
                                   arg == 0 ? fmt::format("u1 in [{:.6g},{:.6g}], u2={:.6g}", ug[k - 1], ug[k], other)
                                            : fmt::format("u1={:.6g}, u2 in [{:.6g},{:.6g}]", other, ug[k - 1], ug[k]),
                                   slope, L, arg == 0 ? "slope in u1 exceeds declared constant" : "slope in u2 exceeds declared constant"};
                });
                prev = cur;
            }
        }
    }
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> U(-win.u_max, win.u_max);
    for (int k = 0; k < 2000; ++k) {
        const double u1 = U(rng), u2 = U(rng), v1 = U(rng), v2 = U(rng);
        const double lhs = safe([&] { return std::fabs(f(u1, u2) - f(v1, v2)); });
        const double rhs = L1 * std::fabs(u1 - v1) + L2 * std::fabs(u2 - v2);
        w.offer(lhs - rhs - tol(std::max(L1, L2)) * (1.0 + rhs), [&] {
            return Witness{what, fmt::format("u=({:.6g},{:.6g}), v=({:.6g},{:.6g})", u1, u2, v1, v2), lhs, rhs,
                           "pair violates the Lipschitz bound"};
        });
    }
}

void check_lipschitz1(Worst& w, const std::string& what, const expr::Expr& g, double L, const SamplingWindows& win) {
    const auto ug = linspace(-win.u_max, win.u_max, win.u_samples);
    double prev = safe([&] { return g(ug[0]); });
    for (std::size_t k = 1; k < ug.size(); ++k) {
        const double cur = safe([&] { return g(ug[k]); });
        const double slope = std::fabs(cur - prev) / (ug[k] - ug[k - 1]);
        w.offer(slope - L - 1e-9 * std::max(1.0, L), [&] {
            return Witness{what, fmt::format("u in [{:.6g},{:.6g}]", ug[k - 1], ug[k]), slope, L,
                           "slope exceeds declared constant"};
        });
        prev = cur;
    }
}

HypothesisResult check_H5(const ModelSpec& spec, const SamplingWindows& win) {
    Worst w;
    std::uint32_t seed = 5;
    for (const auto& c : spec.coupling_c) check_lipschitz2(w, "h " + idx4(c.key()), c.h, c.gamma1, c.gamma2, win, seed++);
    for (const auto& d : spec.coupling_d) check_lipschitz2(w, "f " + idx4(d.key()), d.f, d.mu1, d.mu2, win, seed++);
    if (spec.coupling_c.empty() && spec.coupling_d.empty()) {
        HypothesisResult r;
        r.name = "H5";
        r.verdict = Verdict::not_applicable;
        r.caveat = "no coupling terms";
        return r;
    }
    return finish("H5", std::move(w));
}

HypothesisResult check_H6(const ModelSpec& spec, const SamplingWindows& win) {
    Worst w;
    std::uint32_t seed = 6000;
    for (int i = 0; i < spec.n; ++i)
        check_lipschitz2(w, "F " + idx(i), spec.outer[i].F, spec.outer[i].zeta, spec.outer[i].sigma, win, seed++);
    for (const auto& d : spec.coupling_d) {
        check_lipschitz1(w, "g " + idx4(d.key()), d.g, d.xi, win);
        check_lipschitz1(w, "g~ " + idx4(d.key()), d.g_tilde, d.xi_tilde, win);
    }
    return finish("H6", std::move(w));
}

HypothesisResult check_H7(const ModelSpec& spec, const SamplingWindows& win, const std::optional<std::vector<double>>& d) {
    HypothesisResult r;
    r.name = "H7";
    constexpr double kStep = 0.01;
    std::vector<double> weights;
    if (d) {
        weights = *d;
    } else {
        const auto found = find_weights(spec, win.t_max, kStep);
        if (!found.feasible) {
            r.verdict = Verdict::fail;
            r.witness = Witness{"weights", "search", found.radius, 1.0, "no d > 0: spectral radius >= 1"};
            return r;
        }
        weights = found.d;
    }
    const auto curve = h7_limsup(spec, weights, win.t_max, kStep);
    int worst = 0;
    for (int i = 1; i < spec.n; ++i)
        if (curve.limsup[i] > curve.limsup[worst]) worst = i;
    std::string dtext;
    for (std::size_t k = 0; k < weights.size(); ++k) dtext += (k ? "," : "") + fmt::format("{:.6g}", weights[k]);
    if (curve.negative()) {
        r.verdict = Verdict::pass_sampled;
        r.caveat = fmt::format("d=({}), max limsup estimate {:.6g}; grid-relative tail max", dtext, curve.limsup[worst]);
    } else {
        r.verdict = Verdict::fail;
        r.witness = Witness{idx(worst), fmt::format("tail of [0,{:g}] with d=({})", win.t_max, dtext),
                            curve.limsup[worst], 0.0, "limsup estimate not negative"};
    }
    return r;
}

}  // namespace

HypothesisReport validate_hypotheses(const ModelSpec& spec, const SamplingWindows& windows,
                                     std::optional<std::vector<double>> d) {
    HypothesisReport rep;
    rep.results[0] = check_H1(spec, windows);
    rep.results[1] = check_H2(spec, windows);
    rep.results[2] = check_H3(spec, windows);
    rep.results[3] = check_H4(spec, windows);
    rep.results[4] = check_H5(spec, windows);
    rep.results[5] = check_H6(spec, windows);
    rep.results[6] = check_H7(spec, windows, d);
    return rep;
}

std::vector<double> h7_value(const ModelSpec& spec, std::span<const double> d, double t) {
    if (static_cast<int>(d.size()) != spec.n) throw std::invalid_argument("h7_value: weight vector size mismatch");
    for (double v : d)
        if (!(v > 0.0)) throw std::invalid_argument("h7_value: weights must be positive");
    std::vector<double> out(spec.n);
    for (int i = 0; i < spec.n; ++i)
        out[i] = -spec.amplification[i].a_lo * (spec.selfsignal[i].beta(t) + spec.amplification[i].A(t));
    auto ahi = [&](int j) { return spec.amplification[j].a_hi; };
    for (const auto& c : spec.coupling_c) {
        const double coeff = spec.outer[c.i].zeta * std::fabs(c.c(t));
        out[c.i] += coeff * (ahi(c.j) * (d[c.j] / d[c.i]) * c.gamma1 + ahi(c.l) * (d[c.l] / d[c.i]) * c.gamma2);
    }
    for (const auto& e : spec.coupling_d) {
        const double coeff = spec.outer[e.i].sigma * std::fabs(e.d(t));
        out[e.i] += coeff * (ahi(e.j) * (d[e.j] / d[e.i]) * e.xi * e.mu1 + ahi(e.l) * (d[e.l] / d[e.i]) * e.xi_tilde * e.mu2);
    }
    return out;
}

bool CriterionCurve::negative() const {
    return !limsup.empty() && std::all_of(limsup.begin(), limsup.end(), [](double v) { return v < 0.0; });
}

void CriterionCurve::write_csv(std::ostream& out) const {
    out << "t";
    for (std::size_t i = 0; i < values.size(); ++i) out << ",value_" << (i + 1);
    out << "\n";
    for (std::size_t k = 0; k < grid.size(); ++k) {
        out << fmt::format("{:.10g}", grid[k]);
        for (const auto& v : values) out << fmt::format(",{:.15g}", v[k]);
        out << "\n";
    }
}

namespace {
std::vector<double> uniform_grid(double t_max, double step) {
    if (!(step > 0.0) || !(t_max > 0.0)) throw std::invalid_argument("grid: t_max and step must be positive");
    const auto count = static_cast<std::size_t>(std::floor(t_max / step + 1e-9)) + 1;
    std::vector<double> g(count);
    for (std::size_t k = 0; k < count; ++k) g[k] = static_cast<double>(k) * step;
    return g;
}

std::size_t tail_start(std::size_t count, double tail_fraction) {
    if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) throw std::invalid_argument("tail_fraction must be in (0,1]");
    const auto keep = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(tail_fraction * static_cast<double>(count))));
    return count - std::min(keep, count);
}
}  // namespace

CriterionCurve h7_limsup(const ModelSpec& spec, std::span<const double> d, double t_max, double grid_step,
                         double tail_fraction) {
    CriterionCurve curve;
    curve.grid = uniform_grid(t_max, grid_step);
    curve.d.assign(d.begin(), d.end());
    curve.values.assign(spec.n, std::vector<double>(curve.grid.size()));
    for (std::size_t k = 0; k < curve.grid.size(); ++k) {
        const auto v = h7_value(spec, d, curve.grid[k]);
        for (int i = 0; i < spec.n; ++i) curve.values[i][k] = v[i];
    }
    const std::size_t from = tail_start(curve.grid.size(), tail_fraction);
    for (int i = 0; i < spec.n; ++i)
        curve.limsup.push_back(*std::max_element(curve.values[i].begin() + static_cast<std::ptrdiff_t>(from), curve.values[i].end()));
    return curve;
}

WeightResult weights_from_matrix(const std::vector<double>& beta_lo, const std::vector<std::vector<double>>& K,
                                 double margin) {
    const std::size_t n = beta_lo.size();
    WeightResult r;
    r.beta_lo = beta_lo;
    r.K = K;
    if (K.size() != n) throw std::invalid_argument("weights: matrix size mismatch");
    for (const auto& row : K)
        if (row.size() != n) throw std::invalid_argument("weights: matrix size mismatch");
    for (double b : beta_lo)
        if (!(b > 0.0)) {
            r.radius = std::numeric_limits<double>::infinity();
            return r;
        }

    std::vector<std::vector<double>> D(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) D[i][j] = std::max(0.0, K[i][j]) / beta_lo[i];

    // Power iteration on D + I; the Collatz-Wielandt max ratio bounds the Perron root from above.
    std::vector<double> v(n, 1.0), w(n);
    double upper = 0.0;
    for (int it = 0; it < 20000; ++it) {
        upper = 0.0;
        double lower = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            w[i] = v[i];
            for (std::size_t j = 0; j < n; ++j) w[i] += D[i][j] * v[j];
            upper = std::max(upper, w[i] / v[i]);
            lower = std::min(lower, w[i] / v[i]);
        }
        const double top = *std::max_element(w.begin(), w.end());
        for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / top;
        if (upper - lower <= 1e-13 * upper) break;
    }
    r.radius = upper - 1.0;
    if (!(r.radius < 1.0 - 1e-9)) return r;

    // d = (I - D)^{-1} 1 by Gaussian elimination with partial pivoting.
    std::vector<std::vector<double>> M(n, std::vector<double>(n + 1));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) M[i][j] = (i == j ? 1.0 : 0.0) - D[i][j];
        M[i][n] = 1.0;
    }
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t rr = c + 1; rr < n; ++rr)
            if (std::fabs(M[rr][c]) > std::fabs(M[piv][c])) piv = rr;
        std::swap(M[c], M[piv]);
        if (M[c][c] == 0.0) return r;
        for (std::size_t rr = c + 1; rr < n; ++rr) {
            const double f = M[rr][c] / M[c][c];
            for (std::size_t k = c; k <= n; ++k) M[rr][k] -= f * M[c][k];
        }
    }
    std::vector<double> d(n);
    for (std::size_t c = n; c-- > 0;) {
        double s = M[c][n];
        for (std::size_t k = c + 1; k < n; ++k) s -= M[c][k] * d[k];
        d[c] = s / M[c][c];
    }
    const double dmax = *std::max_element(d.begin(), d.end());
    for (double& x : d) x /= dmax;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(d[i] > 0.0)) return r;
        double slack = beta_lo[i] * d[i];
        for (std::size_t j = 0; j < n; ++j) slack -= std::max(0.0, K[i][j]) * d[j];
        if (slack < margin * d[i]) return r;
    }
    r.d = std::move(d);
    r.feasible = true;
    return r;
}

WeightResult find_weights(const ModelSpec& spec, double t_max, double grid_step) {
    const auto grid = uniform_grid(t_max, grid_step);
    const std::size_t from = tail_start(grid.size(), 0.5);
    const auto n = static_cast<std::size_t>(spec.n);
    std::vector<double> beta_lo(n, std::numeric_limits<double>::infinity());
    std::vector<std::vector<double>> K(n, std::vector<double>(n, 0.0));
    std::vector<std::vector<double>> Kt(n, std::vector<double>(n));
    auto ahi = [&](int j) { return spec.amplification[j].a_hi; };
    for (std::size_t k = from; k < grid.size(); ++k) {
        const double t = grid[k];
        for (auto& row : Kt) std::fill(row.begin(), row.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i)
            beta_lo[i] = std::min(beta_lo[i], spec.amplification[i].a_lo *
                                                  (spec.selfsignal[i].beta(t) + spec.amplification[i].A(t)));
        for (const auto& c : spec.coupling_c) {
            const double coeff = spec.outer[c.i].zeta * std::fabs(c.c(t));
            Kt[c.i][c.j] += coeff * ahi(c.j) * c.gamma1;
            Kt[c.i][c.l] += coeff * ahi(c.l) * c.gamma2;
        }
        for (const auto& e : spec.coupling_d) {
            const double coeff = spec.outer[e.i].sigma * std::fabs(e.d(t));
            Kt[e.i][e.j] += coeff * ahi(e.j) * e.xi * e.mu1;
            Kt[e.i][e.l] += coeff * ahi(e.l) * e.xi_tilde * e.mu2;
        }
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) K[i][j] = std::max(K[i][j], Kt[i][j]);
    }
    return weights_from_matrix(beta_lo, K);
}

std::vector<Probe> default_probes() {
    return {{"w=0", [](double) { return 0.0; }},
            {"w=1", [](double) { return 1.0; }},
            {"w=sin(t)", [](double t) { return std::sin(t); }}};
}

std::vector<double> TimeGrid::points() const {
    if (!(t_hi > t_lo) || !(step > 0.0)) throw std::invalid_argument("time grid: need t_hi > t_lo and step > 0");
    const auto count = static_cast<std::size_t>(std::floor((t_hi - t_lo) / step + 1e-9)) + 1;
    std::vector<double> g(count);
    for (std::size_t k = 0; k < count; ++k) g[k] = t_lo + static_cast<double>(k) * step;
    return g;
}

bool GapCurve::pass() const {
    return std::all_of(series.begin(), series.end(), [](const GapSeries& s) { return s.decays; });
}

const GapSeries* GapCurve::find(const std::string& quantity) const {
    for (const auto& s : series)
        if (s.quantity == quantity) return &s;
    return nullptr;
}

GapCurve asymptotic_gap(const model::AsymptoticPair& pair, const std::vector<Probe>& probes, const TimeGrid& grid) {
    const auto& A = pair.base;
    const auto& B = pair.partner;
    model::make_pair(A, B);  // throws StructuralMismatch

    GapCurve out;
    out.grid = grid.points();
    const std::size_t N = out.grid.size();
    const std::size_t head_end = std::max<std::size_t>(1, N / 5);
    const std::size_t tail_begin = N - head_end;

    auto add = [&](std::string name, const std::function<double(double)>& diff) {
        GapSeries s;
        s.quantity = std::move(name);
        s.values.resize(N);
        for (std::size_t k = 0; k < N; ++k) s.values[k] = std::fabs(diff(out.grid[k]));
        s.head_max = *std::max_element(s.values.begin(), s.values.begin() + static_cast<std::ptrdiff_t>(head_end));
        s.tail_max = *std::max_element(s.values.begin() + static_cast<std::ptrdiff_t>(tail_begin), s.values.end());
        s.decays = s.tail_max <= std::max(1e-6, 100.0 * DBL_EPSILON * s.head_max);
        out.series.push_back(std::move(s));
    };

    for (int i = 0; i < A.n; ++i) {
        add(fmt::format("beta[{}]", i + 1), [&](double t) { return A.selfsignal[i].beta(t) - B.selfsignal[i].beta(t); });
        for (const auto& p : probes)
            add(fmt::format("b[{}]({})", i + 1, p.name), [&](double t) {
                const double w = p.w(t);
                return A.selfsignal[i].b(t, w) - B.selfsignal[i].b(t, w);
            });
    }

    using Key = std::array<int, 4>;
    auto name4 = [](const char* q, const Key& k) {
        return fmt::format("{}[{},{},{},{}]", q, k[0] + 1, k[1] + 1, k[2] + 1, k[3] + 1);
    };
    std::map<Key, const model::CouplingC*> ca, cb;
    for (const auto& c : A.coupling_c) ca[c.key()] = &c;
    for (const auto& c : B.coupling_c) cb[c.key()] = &c;
    std::set<Key> ckeys;
    for (const auto& [k, _] : ca) ckeys.insert(k);
    for (const auto& [k, _] : cb) ckeys.insert(k);
    for (const auto& k : ckeys) {
        const auto* a = ca.count(k) ? ca[k] : nullptr;
        const auto* b = cb.count(k) ? cb[k] : nullptr;
        add(name4("c", k), [&](double t) { return (a ? a->c(t) : 0.0) - (b ? b->c(t) : 0.0); });
        if (a && b) {
            add(name4("tau", k), [&](double t) { return a->tau.tau(t) - b->tau.tau(t); });
            add(name4("tau~", k), [&](double t) { return a->tau_tilde.tau(t) - b->tau_tilde.tau(t); });
        }
    }
    std::map<Key, const model::CouplingD*> da, db;
    for (const auto& d : A.coupling_d) da[d.key()] = &d;
    for (const auto& d : B.coupling_d) db[d.key()] = &d;
    std::set<Key> dkeys;
    for (const auto& [k, _] : da) dkeys.insert(k);
    for (const auto& [k, _] : db) dkeys.insert(k);
    for (const auto& k : dkeys) {
        const auto* a = da.count(k) ? da[k] : nullptr;
        const auto* b = db.count(k) ? db[k] : nullptr;
        add(name4("d", k), [&](double t) { return (a ? a->d(t) : 0.0) - (b ? b->d(t) : 0.0); });
    }
    for (int i = 0; i < A.n; ++i)
        add(fmt::format("I[{}]", i + 1), [&](double t) { return A.input[i](t) - B.input[i](t); });
    return out;
}

void ConvergenceCurve::write_csv(std::ostream& out) const {
    out << "t,g\n";
    for (std::size_t k = 0; k < grid.size(); ++k) out << fmt::format("{:.10g},{:.15g}\n", grid[k], g[k]);
}

ConvergenceCurve pair_convergence(const StateFn& a, const StateFn& b, double t_lo, double t_hi, double window, double dt) {
    if (!(window > 0.0) || !(dt > 0.0)) throw std::invalid_argument("pair_convergence: window and dt must be positive");
    if (!(t_hi - t_lo >= 3.0 * window))
        throw std::invalid_argument(fmt::format("pair_convergence: shared range [{:g},{:g}] shorter than 3 windows", t_lo, t_hi));
    const auto count = static_cast<std::size_t>(std::floor((t_hi - t_lo) / dt + 1e-9)) + 1;
    std::vector<double> diff(count);
    for (std::size_t k = 0; k < count; ++k) {
        const double t = (k + 1 == count) ? t_hi : t_lo + static_cast<double>(k) * dt;
        const auto xa = a(t), xb = b(t);
        if (xa.size() != xb.size()) throw std::invalid_argument("pair_convergence: dimension mismatch");
        double m = 0.0;
        for (std::size_t i = 0; i < xa.size(); ++i) m = std::max(m, std::fabs(xa[i] - xb[i]));
        diff[k] = m;
    }
    const auto span = static_cast<std::size_t>(std::llround(window / dt));
    ConvergenceCurve c;
    c.window = window;
    for (std::size_t k = 0; k + span < count; ++k) {
        c.grid.push_back(t_lo + static_cast<double>(k) * dt);
        c.g.push_back(*std::max_element(diff.begin() + static_cast<std::ptrdiff_t>(k),
                                        diff.begin() + static_cast<std::ptrdiff_t>(k + span + 1)));
    }
    return c;
}

ConvergenceCurve pair_convergence(const dde::Trajectory& a, const dde::Trajectory& b, double window, double dt) {
    const double lo = std::max(a.t0, b.t0), hi = std::min(a.t_end, b.t_end);
    if (!(hi > lo)) throw std::invalid_argument("pair_convergence: trajectories have disjoint time ranges");
    return pair_convergence([&](double t) { return a.state(t); }, [&](double t) { return b.state(t); }, lo, hi, window, dt);
}

}  // namespace cgnn::criteria
