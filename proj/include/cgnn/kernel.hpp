#pragma once

#include "cgnn/expr.hpp"

#include <string>
#include <variant>
#include <vector>

namespace cgnn::model {

/// Density lambda * exp(-lambda u) on u >= 0.
struct ExponentialKernel {
    double rate = 1.0;
};

/// Density lambda^k u^(k-1) exp(-lambda u) / Gamma(k) on u >= 0, k >= 1.
struct GammaKernel {
    double shape = 1.0;
    double rate = 1.0;
};

/// Point mass at s = -location.
struct AtomKernel {
    double location = 0.0;
    double mass = 1.0;
};

/// User density K(u) on [0, support], zero beyond.
struct DensityKernel {
    expr::Expr density;
    double support = 0.0;
};

class KernelMeasure;

struct MixtureComponent;

struct MixtureKernel {
    std::vector<MixtureComponent> components;
};

/// A non-decreasing measure eta on (-inf, 0], stored through its density or
/// atoms in the lag variable u = -s >= 0.
///
/// eta(s) is the mass of (-inf, s]; a density K gives eta(s) = int_{-s}^inf K(u) du
/// and an atom at location a jumps at s = -a.
class KernelMeasure {
public:
    using Rep = std::variant<ExponentialKernel, GammaKernel, AtomKernel, DensityKernel, MixtureKernel>;

    KernelMeasure() : rep_(ExponentialKernel{}) {}
    KernelMeasure(Rep rep) : rep_(std::move(rep)) {}

    static KernelMeasure exponential(double rate) { return KernelMeasure(ExponentialKernel{rate}); }
    static KernelMeasure gamma(double shape, double rate) { return KernelMeasure(GammaKernel{shape, rate}); }
    static KernelMeasure atom(double location, double mass = 1.0) { return KernelMeasure(AtomKernel{location, mass}); }
    static KernelMeasure density(expr::Expr k, double support) {
        return KernelMeasure(DensityKernel{std::move(k), support});
    }
    static KernelMeasure mixture(std::vector<MixtureComponent> components);

    const Rep& rep() const noexcept { return rep_; }

    /// eta(s) for s <= 0; eta(-inf) = 0.
    double eta(double s) const;

    /// Mass of (-inf, -T): the part of the measure strictly beyond lag T.
    double tail(double lag) const;

    /// Mass on [0, u] in the lag variable for the absolutely continuous part,
    /// plus atoms with location in (u_lo, u_hi]. Used for panel rescaling.
    double lag_mass(double u_lo, double u_hi) const;

    /// Density value in the lag variable (0 for atoms).
    double density_at(double u) const;

    /// Positions of atoms (lag) with their absolute masses.
    std::vector<AtomKernel> atoms() const;

    /// Upper end of the support when finite, otherwise infinity.
    double support_end() const;

    /// Throws std::invalid_argument naming the defect when the parameters
    /// are out of range, mixture weights do not sum to 1, or total mass != 1.
    void validate() const;

    /// Analytic check of int e^{mu u} K(u) du < inf for closed-form families;
    /// finite-support densities and atoms always qualify.
    bool has_exponential_moment(double mu) const;

    std::string describe() const;

    friend bool operator==(const KernelMeasure& a, const KernelMeasure& b) { return a.describe() == b.describe(); }

private:
    Rep rep_;
};

struct MixtureComponent {
    double weight = 0.0;
    KernelMeasure kernel;
};

/// eta(s_hi) - eta(s_lo); s_lo may be -infinity. Requires s_lo <= s_hi <= 0.
double kernel_mass(const KernelMeasure& k, double s_lo, double s_hi);

/// Smallest T >= 0 with mass of (-inf, -T) <= eps.
double kernel_tail_cutoff(const KernelMeasure& k, double eps);

}  // namespace cgnn::model
