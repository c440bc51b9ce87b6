#pragma once

#include "cgnn/history.hpp"
#include "cgnn/model.hpp"

#include <array>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

namespace cgnn::dde {

struct QuadratureNode {
    double lag = 0.0;  // u = -s >= 0
    double weight = 0.0;
};

/// Discretization of one kernel on [-cutoff, 0].
struct KernelRule {
    double cutoff = 0.0;
    std::vector<QuadratureNode> nodes;

    double mass() const;
};

/// Gauss-Legendre panels (8 nodes, width <= 1) for the density part, with
/// panel weights rescaled to the exact panel mass; atoms within the cutoff
/// are kept exactly.
KernelRule build_rule(const model::KernelMeasure& kernel, double eps_tail);

/// Rules for both kernels of every coupling_d entry.
class QuadraturePlan {
public:
    QuadraturePlan() = default;
    static QuadraturePlan build(const model::ModelSpec& spec, double eps_tail);

    /// which = 0 for eta, 1 for eta~.
    const KernelRule& rule(std::size_t entry, int which) const { return rules_.at(entry)[which]; }
    std::size_t size() const noexcept { return rules_.size(); }
    double horizon() const noexcept { return horizon_; }
    double eps_tail() const noexcept { return eps_tail_; }

private:
    std::vector<std::array<KernelRule, 2>> rules_;
    double horizon_ = 0.0;
    double eps_tail_ = 0.0;
};

/// Where lagged states come from during one right-hand-side evaluation.
/// A lag of exactly zero reads x_now.
struct LagContext {
    const memory::StateSource& past;
    double t;
    std::span<const double> x_now;
};

double eval_U(const model::ModelSpec& spec, int i, const LagContext& ctx);
double eval_V(const model::ModelSpec& spec, int i, const LagContext& ctx, const QuadraturePlan& plan);
void rhs(const model::ModelSpec& spec, const LagContext& ctx, const QuadraturePlan& plan, std::span<double> out);

/// Convenience forms reading x(t) from the history; t <= h.t_now().
double eval_U(const model::ModelSpec& spec, int i, double t, const memory::History& h);
double eval_V(const model::ModelSpec& spec, int i, double t, const memory::History& h, const QuadraturePlan& plan);
std::vector<double> rhs(const model::ModelSpec& spec, double t, const memory::History& h, const QuadraturePlan& plan);

struct IntegratorOptions {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double h_init = 1e-3;
    double h_min = 1e-12;
    double h_max = 0.25;
    double eps_tail = 1e-9;
    double guard_bound = 1e6;
    double fixed_step = 0.0;  // > 0 disables error control
    bool fading_memory = true;

    /// Throws std::invalid_argument.
    void validate() const;
};

class IntegrationError : public std::runtime_error {
public:
    enum class Kind { blow_up, step_underflow, non_finite };

    IntegrationError(Kind kind, double t, const std::string& what)
        : std::runtime_error(what), kind_(kind), t_(t) {}

    Kind kind() const noexcept { return kind_; }
    double t() const noexcept { return t_; }

private:
    Kind kind_;
    double t_;
};

struct Trajectory {
    std::shared_ptr<const memory::History> history;
    double t0 = 0.0;
    double t_end = 0.0;
    long accepted = 0;
    long rejected = 0;
    long in_step_lags = 0;
    long clamped_queries = 0;
    double max_abs = 0.0;
    double max_retained_span = 0.0;
    double wall_seconds = 0.0;

    int dimension() const { return history->dimension(); }
    std::vector<double> state(double t) const { return history->sample(t); }

    void write_csv(const std::filesystem::path& path) const;
    /// key = value lines under a [run] section.
    void write_report(std::ostream& out) const;
};

Trajectory integrate(const model::ModelSpec& spec, const model::InitialCondition& phi, double t0, double t_end,
                     const IntegratorOptions& opts = {});

}  // namespace cgnn::dde
