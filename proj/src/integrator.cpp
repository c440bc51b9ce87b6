#include "cgnn/dde.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>

namespace cgnn::dde {

void IntegratorOptions::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(fmt::format("integrator: {} must be positive", name));
    };
    positive(rel_tol, "rel_tol");
    positive(abs_tol, "abs_tol");
    positive(h_init, "h_init");
    positive(h_min, "h_min");
    positive(h_max, "h_max");
    positive(eps_tail, "eps_tail");
    positive(guard_bound, "guard_bound");
    if (!(h_min <= h_init && h_init <= h_max)) throw std::invalid_argument("integrator: need h_min <= h_init <= h_max");
    if (fixed_step < 0.0 || !std::isfinite(fixed_step)) throw std::invalid_argument("integrator: fixed_step must be >= 0");
}

void Trajectory::write_csv(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    history->write_csv(out);
}

void Trajectory::write_report(std::ostream& out) const {
    out << "[run]\n";
    out << fmt::format("t0 = {:.15g}\n", t0);
    out << fmt::format("t_end = {:.15g}\n", t_end);
    out << fmt::format("accepted_steps = {}\n", accepted);
    out << fmt::format("rejected_steps = {}\n", rejected);
    out << fmt::format("in_step_lags = {}\n", in_step_lags);
    out << fmt::format("clamped_queries = {}\n", clamped_queries);
    out << fmt::format("max_abs_state = {:.15g}\n", max_abs);
    out << fmt::format("max_retained_span = {:.15g}\n", max_retained_span);
    out << fmt::format("wall_seconds = {:.6f}\n", wall_seconds);
}

namespace {

// Lag source during one step: the stored history up to t_n, and inside
// (t_n, t_n + h] either a linear predictor or a trial Hermite segment.
class StepView final : public memory::StateSource {
public:
    StepView(const memory::History& past, double t_n, std::span<const double> x_n, std::span<const double> k1)
        : past_(past), t_n_(t_n), x_n_(x_n), k1_(k1) {}

    void use_segment(const memory::Segment* seg) { seg_ = seg; }
    bool hit() const noexcept { return hit_; }
    long clamped() const noexcept { return clamped_; }
    long in_step() const noexcept { return in_step_; }

    int dimension() const override { return past_.dimension(); }

    void sample(double t, std::span<double> out) const override {
        if (t <= t_n_) {
            if (past_.is_clamped(t)) ++clamped_;
            past_.sample(t, out);
            return;
        }
        hit_ = true;
        ++in_step_;
        if (seg_) {
            seg_->evaluate(t, out);
            return;
        }
        const double dt = t - t_n_;
        for (std::size_t k = 0; k < out.size(); ++k) out[k] = x_n_[k] + dt * k1_[k];
    }

private:
    const memory::History& past_;
    double t_n_;
    std::span<const double> x_n_, k1_;
    const memory::Segment* seg_ = nullptr;
    mutable bool hit_ = false;
    mutable long clamped_ = 0;
    mutable long in_step_ = 0;
};

struct Attempt {
    std::vector<double> x_new, k4, err;
};

// Bogacki-Shampine 3(2) with FSAL.
Attempt bs3_step(const model::ModelSpec& spec, const QuadraturePlan& plan, const StepView& view, double t, double h,
                 std::span<const double> x, std::span<const double> k1) {
    const std::size_t n = x.size();
    std::vector<double> y(n), k2(n), k3(n);
    Attempt a{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};

    for (std::size_t k = 0; k < n; ++k) y[k] = x[k] + 0.5 * h * k1[k];
    rhs(spec, LagContext{view, t + 0.5 * h, y}, plan, k2);
    for (std::size_t k = 0; k < n; ++k) y[k] = x[k] + 0.75 * h * k2[k];
    rhs(spec, LagContext{view, t + 0.75 * h, y}, plan, k3);
    for (std::size_t k = 0; k < n; ++k)
        a.x_new[k] = x[k] + h * (2.0 / 9.0 * k1[k] + 1.0 / 3.0 * k2[k] + 4.0 / 9.0 * k3[k]);
    rhs(spec, LagContext{view, t + h, a.x_new}, plan, a.k4);
    for (std::size_t k = 0; k < n; ++k) {
        const double low = x[k] + h * (7.0 / 24.0 * k1[k] + 0.25 * k2[k] + 1.0 / 3.0 * k3[k] + 0.125 * a.k4[k]);
        a.err[k] = a.x_new[k] - low;
    }
    return a;
}

double error_norm(const Attempt& a, std::span<const double> x, const IntegratorOptions& opts) {
    double worst = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double scale = opts.abs_tol + opts.rel_tol * std::max(std::fabs(x[k]), std::fabs(a.x_new[k]));
        worst = std::max(worst, std::fabs(a.err[k]) / scale);
    }
    return worst;
}

double max_delay_at(const model::ModelSpec& spec, double t) {
    double m = 0.0;
    for (const auto& c : spec.coupling_c) {
        if (!c.tau.is_zero()) m = std::max(m, model::delay_eval(c.tau, t));
        if (!c.tau_tilde.is_zero()) m = std::max(m, model::delay_eval(c.tau_tilde, t));
    }
    return m;
}

}  // namespace

Trajectory integrate(const model::ModelSpec& spec, const model::InitialCondition& phi, double t0, double t_end,
                     const IntegratorOptions& opts) {
    opts.validate();
    if (!(t_end > t0)) throw std::invalid_argument("integrate: t_end must exceed t0");
    if (static_cast<int>(phi.phi.size()) != spec.n) throw std::invalid_argument("integrate: initial function dimension mismatch");

    const auto start = std::chrono::steady_clock::now();
    const QuadraturePlan plan = QuadraturePlan::build(spec, opts.eps_tail);
    const double horizon = plan.horizon();

    auto log = std::make_shared<memory::History>(phi.phi, t0, phi.bound, std::max(spec.window.t_max, horizon));
    std::optional<memory::History> work;
    if (opts.fading_memory) work.emplace(*log);
    const memory::History& past = work ? *work : *log;

    Trajectory traj;
    traj.t0 = t0;
    traj.t_end = t_end;

    std::vector<double> x = log->sample(t0);
    for (double v : x) traj.max_abs = std::max(traj.max_abs, std::fabs(v));
    std::vector<double> k1(spec.n);

    auto guarded_rhs = [&](auto&& fn, double t_fail) {
        try {
            fn();
        } catch (const expr::EvalError& e) {
            throw IntegrationError(IntegrationError::Kind::non_finite, t_fail,
                                   fmt::format("non-finite value near t = {:.10g}: {}", t_fail, e.what()));
        }
    };

    guarded_rhs([&] { rhs(spec, LagContext{past, t0, x}, plan, k1); }, t0);

    double t = t0;
    double h = opts.fixed_step > 0.0 ? opts.fixed_step : opts.h_init;
    double max_delay_seen = max_delay_at(spec, t0);

    while (t < t_end) {
        bool last = false;
        double step = opts.fixed_step > 0.0 ? opts.fixed_step : std::min(h, opts.h_max);
        if (t + step >= t_end || t_end - (t + step) < 1e-12 * std::max(1.0, std::fabs(t_end))) {
            step = t_end - t;
            last = true;
        }
        const double t_next = last ? t_end : t + step;

        StepView view(past, t, x, k1);
        Attempt att;
        memory::Segment seg;
        guarded_rhs(
            [&] {
                att = bs3_step(spec, plan, view, t, step, x, k1);
                if (view.hit()) {
                    memory::Segment trial{t, t_next, x, att.x_new, k1, att.k4};
                    view.use_segment(&trial);
                    att = bs3_step(spec, plan, view, t, step, x, k1);
                }
            },
            t_next);

        const double err = opts.fixed_step > 0.0 ? 0.0 : error_norm(att, x, opts);
        if (!std::isfinite(err) && opts.fixed_step <= 0.0)
            throw IntegrationError(IntegrationError::Kind::non_finite, t_next,
                                   fmt::format("non-finite error estimate near t = {:.10g}", t_next));

        if (err <= 1.0) {
            traj.in_step_lags += view.in_step();
            traj.clamped_queries += view.clamped();
            seg = memory::Segment{t, t_next, x, att.x_new, k1, att.k4};
            if (work) work->append_segment(seg);
            log->append_segment(std::move(seg));
            ++traj.accepted;
            t = t_next;
            x = std::move(att.x_new);
            k1 = std::move(att.k4);
            for (double v : x) {
                if (!std::isfinite(v) || std::fabs(v) > opts.guard_bound)
                    throw IntegrationError(IntegrationError::Kind::blow_up, t,
                                           fmt::format("blow-up guard: |x| exceeded {:g} at t = {:.10g}", opts.guard_bound, t));
                traj.max_abs = std::max(traj.max_abs, std::fabs(v));
            }
            if (work) {
                max_delay_seen = std::max(max_delay_seen, max_delay_at(spec, t));
                const double keep = 2.0 * (horizon + max_delay_seen) + 1.0;
                if (t - work->t0() > keep && t - keep > work->truncation_floor() + 1.0)
                    work->truncate_before(t - keep, horizon);
                traj.max_retained_span = std::max(traj.max_retained_span, work->retained_span());
            } else {
                traj.max_retained_span = log->retained_span();
            }
            if (opts.fixed_step <= 0.0) {
                const double factor = err > 0.0 ? 0.9 * std::pow(err, -1.0 / 3.0) : 5.0;
                h = std::min(opts.h_max, step * std::clamp(factor, 0.2, 5.0));
            }
        } else {
            ++traj.rejected;
            h = step * std::clamp(0.9 * std::pow(err, -1.0 / 3.0), 0.2, 1.0);
            if (h < opts.h_min)
                throw IntegrationError(IntegrationError::Kind::step_underflow, t,
                                       fmt::format("step size underflow ({:g} < {:g}) at t = {:.10g}", h, opts.h_min, t));
        }
    }

    traj.history = std::move(log);
    traj.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return traj;
}

}  // namespace cgnn::dde
