#include "cgnn/kernel.hpp"

#include "cgnn/gauss_legendre.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cgnn::model {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kInf = std::numeric_limits<double>::infinity();

// integral of a user density over [u_lo, u_hi] intersected with [0, support]
double density_integral(const DensityKernel& k, double u_lo, double u_hi) {
    const double a = std::max(0.0, u_lo);
    const double b = std::min(k.support, u_hi);
    if (!(b > a)) return 0.0;
    const int panels = std::max(1, static_cast<int>(std::ceil(b - a)));
    return numeric::integrate_panels([&](double u) { return k.density(u); }, a, b, panels, 16);
}

// continuous part only, mass in lag window [u_lo, u_hi]
double continuous_mass(const KernelMeasure& k, double u_lo, double u_hi) {
    u_lo = std::max(0.0, u_lo);
    if (!(u_hi > u_lo)) return 0.0;
    return std::visit(overloaded{
                          [&](const ExponentialKernel& e) {
                              const double hi = std::isinf(u_hi) ? 0.0 : std::exp(-e.rate * u_hi);
                              return std::exp(-e.rate * u_lo) - hi;
                          },
                          [&](const GammaKernel& g) {
                              const double hi =
                                  std::isinf(u_hi) ? 0.0 : boost::math::gamma_q(g.shape, g.rate * u_hi);
                              return boost::math::gamma_q(g.shape, g.rate * u_lo) - hi;
                          },
                          [&](const AtomKernel&) { return 0.0; },
                          [&](const DensityKernel& d) { return density_integral(d, u_lo, u_hi); },
                          [&](const MixtureKernel& m) {
                              double total = 0.0;
                              for (const auto& c : m.components) total += c.weight * continuous_mass(c.kernel, u_lo, u_hi);
                              return total;
                          },
                      },
                      k.rep());
}

}  // namespace

KernelMeasure KernelMeasure::mixture(std::vector<MixtureComponent> components) {
    return KernelMeasure(MixtureKernel{std::move(components)});
}

std::vector<AtomKernel> KernelMeasure::atoms() const {
    std::vector<AtomKernel> out;
    std::visit(overloaded{
                   [&](const AtomKernel& a) { out.push_back(a); },
                   [&](const MixtureKernel& m) {
                       for (const auto& c : m.components)
                           for (auto a : c.kernel.atoms()) {
                               a.mass *= c.weight;
                               out.push_back(a);
                           }
                   },
                   [&](const auto&) {},
               },
               rep_);
    return out;
}

double KernelMeasure::eta(double s) const {
    if (s > 0.0) throw std::invalid_argument("kernel eta: s must be <= 0");
    if (std::isinf(s)) return 0.0;
    const double u = -s;
    double total = continuous_mass(*this, u, kInf);
    for (const auto& a : atoms())
        if (a.location >= u) total += a.mass;
    return total;
}

double KernelMeasure::tail(double lag) const {
    double total = continuous_mass(*this, lag, kInf);
    for (const auto& a : atoms())
        if (a.location > lag) total += a.mass;
    return total;
}

double KernelMeasure::lag_mass(double u_lo, double u_hi) const {
    double total = continuous_mass(*this, u_lo, u_hi);
    for (const auto& a : atoms())
        if (a.location > u_lo && a.location <= u_hi) total += a.mass;
    return total;
}

double KernelMeasure::density_at(double u) const {
    if (u < 0.0) return 0.0;
    return std::visit(overloaded{
                          [&](const ExponentialKernel& e) { return e.rate * std::exp(-e.rate * u); },
                          [&](const GammaKernel& g) { return boost::math::gamma_p_derivative(g.shape, g.rate * u) * g.rate; },
                          [&](const AtomKernel&) { return 0.0; },
                          [&](const DensityKernel& d) { return u <= d.support ? d.density(u) : 0.0; },
                          [&](const MixtureKernel& m) {
                              double total = 0.0;
                              for (const auto& c : m.components) total += c.weight * c.kernel.density_at(u);
                              return total;
                          },
                      },
                      rep_);
}

double KernelMeasure::support_end() const {
    return std::visit(overloaded{
                          [&](const ExponentialKernel&) { return kInf; },
                          [&](const GammaKernel&) { return kInf; },
                          [&](const AtomKernel& a) { return a.location; },
                          [&](const DensityKernel& d) { return d.support; },
                          [&](const MixtureKernel& m) {
                              double end = 0.0;
                              for (const auto& c : m.components) end = std::max(end, c.kernel.support_end());
                              return end;
                          },
                      },
                      rep_);
}

void KernelMeasure::validate() const {
    std::visit(overloaded{
                   [&](const ExponentialKernel& e) {
                       if (!(e.rate > 0.0)) throw std::invalid_argument("exponential kernel: rate must be > 0");
                   },
                   [&](const GammaKernel& g) {
                       if (!(g.shape >= 1.0)) throw std::invalid_argument("gamma kernel: shape must be >= 1");
                       if (!(g.rate > 0.0)) throw std::invalid_argument("gamma kernel: rate must be > 0");
                   },
                   [&](const AtomKernel& a) {
                       if (!(a.location >= 0.0)) throw std::invalid_argument("atom kernel: location must be >= 0");
                       if (!(a.mass > 0.0)) throw std::invalid_argument("atom kernel: mass must be > 0");
                   },
                   [&](const DensityKernel& d) {
                       if (!(d.support > 0.0) || std::isinf(d.support))
                           throw std::invalid_argument("density kernel: support must be finite and > 0");
                       const int checks = 64 * static_cast<int>(std::ceil(d.support));
                       for (int k = 0; k <= checks; ++k) {
                           const double u = d.support * k / checks;
                           if (d.density(u) < 0.0)
                               throw std::invalid_argument(fmt::format("density kernel: K({:g}) < 0", u));
                       }
                   },
                   [&](const MixtureKernel& m) {
                       if (m.components.empty()) throw std::invalid_argument("mixture kernel: no components");
                       double sum = 0.0;
                       for (const auto& c : m.components) {
                           if (!(c.weight > 0.0)) throw std::invalid_argument("mixture kernel: weights must be > 0");
                           sum += c.weight;
                           c.kernel.validate();
                       }
                       if (std::fabs(sum - 1.0) > 1e-12)
                           throw std::invalid_argument(fmt::format("mixture kernel: weights sum to {:.17g} != 1", sum));
                   },
               },
               rep_);
    const double total = eta(0.0);
    if (std::fabs(total - 1.0) > 1e-12)
        throw std::invalid_argument(fmt::format("kernel mass {:.12g} != 1", total));
}

bool KernelMeasure::has_exponential_moment(double mu) const {
    return std::visit(overloaded{
                          [&](const ExponentialKernel& e) { return mu < e.rate; },
                          [&](const GammaKernel& g) { return mu < g.rate; },
                          [&](const AtomKernel&) { return true; },
                          [&](const DensityKernel&) { return true; },
                          [&](const MixtureKernel& m) {
                              return std::all_of(m.components.begin(), m.components.end(),
                                                 [&](const auto& c) { return c.kernel.has_exponential_moment(mu); });
                          },
                      },
                      rep_);
}

std::string KernelMeasure::describe() const {
    return std::visit(overloaded{
                          [&](const ExponentialKernel& e) { return fmt::format("exponential(rate={:.17g})", e.rate); },
                          [&](const GammaKernel& g) {
                              return fmt::format("gamma(shape={:.17g},rate={:.17g})", g.shape, g.rate);
                          },
                          [&](const AtomKernel& a) {
                              return fmt::format("atom(location={:.17g},mass={:.17g})", a.location, a.mass);
                          },
                          [&](const DensityKernel& d) {
                              return fmt::format("density(K={},support={:.17g})", d.density.to_string(), d.support);
                          },
                          [&](const MixtureKernel& m) {
                              std::string s = "mixture(";
                              for (std::size_t k = 0; k < m.components.size(); ++k) {
                                  if (k) s += ",";
                                  s += fmt::format("{:.17g}*{}", m.components[k].weight, m.components[k].kernel.describe());
                              }
                              return s + ")";
                          },
                      },
                      rep_);
}

double kernel_mass(const KernelMeasure& k, double s_lo, double s_hi) {
    if (!(s_lo <= s_hi) || s_hi > 0.0) throw std::invalid_argument("kernel_mass: need s_lo <= s_hi <= 0");
    return k.eta(s_hi) - k.eta(s_lo);
}

double kernel_tail_cutoff(const KernelMeasure& k, double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("kernel_tail_cutoff: eps must lie in (0, 1)");
    if (const auto* e = std::get_if<ExponentialKernel>(&k.rep())) return std::log(1.0 / eps) / e->rate;

    auto ok = [&](double lag) { return k.tail(lag) <= eps; };
    if (ok(0.0)) return 0.0;
    double hi = 1.0;
    while (!ok(hi)) {
        hi *= 2.0;
        if (hi > 1e12) throw std::runtime_error("kernel_tail_cutoff: tail does not decay");
    }
    double lo = 0.0;
    for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (ok(mid))
            hi = mid;
        else
            lo = mid;
    }
    for (const auto& a : k.atoms())
        if (std::fabs(a.location - hi) <= 1e-9 * std::max(1.0, a.location) && ok(a.location)) return a.location;
    return hi;
}

}  // namespace cgnn::model
