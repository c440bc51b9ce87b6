#pragma once

#include "cgnn/expr.hpp"
#include "cgnn/kernel.hpp"

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cgnn::model {

/// Invalid model description. section() names the offending config section,
/// e.g. "coupling_d[0].kernel".
class ModelError : public std::runtime_error {
public:
    ModelError(std::string section, const std::string& what)
        : std::runtime_error(section + ": " + what), section_(std::move(section)) {}

    const std::string& section() const noexcept { return section_; }

private:
    std::string section_;
};

/// A discrete delay tau(t) >= 0.
struct DelaySpec {
    expr::Expr tau = expr::Expr::constant(0.0, {"t"});
    bool unbounded_growth = true;  // declared claim t - tau(t) -> +inf

    bool is_zero() const { return tau.is_constant() && tau(0.0) == 0.0; }
};

/// tau(t); throws ModelError when the sampled value is negative.
double delay_eval(const DelaySpec& d, double t);

/// a_i(t, u) with declared bounds a_lo <= a <= a_hi and the function A_i(t)
/// of the derivative condition A a^2 <= da/dt.
struct AmplificationSpec {
    expr::Expr a;
    double a_lo = 1.0;
    double a_hi = 1.0;
    expr::Expr A = expr::Expr::constant(0.0, {"t"});
};

/// b_i(t, u) with declared slope lower bound beta_i(t).
struct SelfSignalSpec {
    expr::Expr b;
    expr::Expr beta;
    std::optional<expr::Expr> beta_star;
};

/// F_i(u1, u2) with Lipschitz constants zeta (in u1) and sigma (in u2).
struct OuterSpec {
    expr::Expr F;
    double zeta = 1.0;
    double sigma = 0.0;
};

/// One nonzero term c_ijlp(t) h_ijlp(x_j(t - tau), x_l(t - tau~)). Indices are 0-based.
struct CouplingC {
    int i = 0, j = 0, l = 0, p = 0;
    expr::Expr c;
    expr::Expr h;
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    DelaySpec tau;
    DelaySpec tau_tilde;

    std::array<int, 4> key() const { return {i, j, l, p}; }
};

/// One nonzero term d_ijlp(t) f_ijlp(int g(x_j) d eta, int g~(x_l) d eta~).
struct CouplingD {
    int i = 0, j = 0, l = 0, p = 0;
    expr::Expr d;
    expr::Expr f;
    double mu1 = 0.0;
    double mu2 = 0.0;
    expr::Expr g;
    expr::Expr g_tilde;
    double xi = 0.0;
    double xi_tilde = 0.0;
    KernelMeasure kernel;
    KernelMeasure kernel_tilde;

    std::array<int, 4> key() const { return {i, j, l, p}; }
};

/// Bounded initial function phi(s), s <= 0, one expression per component.
struct InitialCondition {
    std::vector<expr::Expr> phi;
    double bound = 1.0;
};

/// Samples phi on s in [-horizon, 0] (step 0.25); returns a witness message
/// when a component leaves [-bound, bound] or is not finite.
std::optional<std::string> check_phi_bound(const InitialCondition& ic, double horizon);

/// Sampling windows used by the hypothesis checks.
struct CheckWindow {
    double t_max = 50.0;
    double u_max = 10.0;
};

/// Full description of a non-autonomous Cohen-Grossberg network with
/// discrete and distributed delays. Absent coupling entries are zero.
struct ModelSpec {
    std::string name;
    int n = 1;
    int P = 1;
    std::vector<AmplificationSpec> amplification;
    std::vector<SelfSignalSpec> selfsignal;
    std::vector<OuterSpec> outer;
    std::vector<expr::Expr> input;
    std::vector<CouplingC> coupling_c;
    std::vector<CouplingD> coupling_d;
    std::vector<InitialCondition> initial;
    CheckWindow window;

    /// Throws ModelError on structural defects (see build_model).
    void validate() const;

    /// Largest tail cutoff over all kernels for the given budget.
    double kernel_horizon(double eps_tail) const;
};

/// Structural identity of two specs (same expressions, constants, kernels).
bool structurally_equal(const ModelSpec& a, const ModelSpec& b);

/// A system and an asymptotic partner. Only b, beta, c, d, tau, tau~ and I may
/// differ; everything else must be structurally identical.
struct AsymptoticPair {
    ModelSpec base;
    ModelSpec partner;
};

/// Thrown by make_pair when the shared components differ.
class StructuralMismatch : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

AsymptoticPair make_pair(ModelSpec base, ModelSpec partner);

/// Parameter lists used for each expression slot.
namespace params {
inline const std::vector<std::string> t = {"t"};
inline const std::vector<std::string> tu = {"t", "u"};
inline const std::vector<std::string> u = {"u"};
inline const std::vector<std::string> u1u2 = {"u1", "u2"};
inline const std::vector<std::string> s = {"s"};
}  // namespace params

}  // namespace cgnn::model
