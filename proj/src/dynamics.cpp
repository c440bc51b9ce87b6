#include "cgnn/dde.hpp"

#include <cmath>
#include <string>

namespace cgnn::dde {

namespace {

double lagged(const LagContext& ctx, int j, double lag, std::vector<double>& buf) {
    if (lag == 0.0) return ctx.x_now[j];
    ctx.past.sample(ctx.t - lag, buf);
    return buf[j];
}

double delay_at(const model::DelaySpec& d, double t) { return d.is_zero() ? 0.0 : model::delay_eval(d, t); }

double term_U(const model::CouplingC& e, const LagContext& ctx, std::vector<double>& buf) {
    const double xj = lagged(ctx, e.j, delay_at(e.tau, ctx.t), buf);
    const double xl = e.h.depends_on("u2") ? lagged(ctx, e.l, delay_at(e.tau_tilde, ctx.t), buf) : 0.0;
    return e.c(ctx.t) * e.h(xj, xl);
}

double integral(const KernelRule& rule, const expr::Expr& g, int j, const LagContext& ctx, std::vector<double>& buf) {
    double total = 0.0;
    for (const auto& q : rule.nodes) total += q.weight * g(lagged(ctx, j, q.lag, buf));
    return total;
}

double term_V(const model::CouplingD& e, std::size_t k, const LagContext& ctx, const QuadraturePlan& plan,
              std::vector<double>& buf) {
    const double v1 = e.f.depends_on("u1") ? integral(plan.rule(k, 0), e.g, e.j, ctx, buf) : 0.0;
    const double v2 = e.f.depends_on("u2") ? integral(plan.rule(k, 1), e.g_tilde, e.l, ctx, buf) : 0.0;
    return e.d(ctx.t) * e.f(v1, v2);
}

void check_plan(const model::ModelSpec& spec, const QuadraturePlan& plan) {
    if (plan.size() != spec.coupling_d.size())
        throw std::invalid_argument("quadrature plan does not match the model's coupling_d entries");
}

}  // namespace

double eval_U(const model::ModelSpec& spec, int i, const LagContext& ctx) {
    std::vector<double> buf(spec.n);
    double total = 0.0;
    for (const auto& e : spec.coupling_c)
        if (e.i == i) total += term_U(e, ctx, buf);
    return total;
}

double eval_V(const model::ModelSpec& spec, int i, const LagContext& ctx, const QuadraturePlan& plan) {
    check_plan(spec, plan);
    std::vector<double> buf(spec.n);
    double total = 0.0;
    for (std::size_t k = 0; k < spec.coupling_d.size(); ++k)
        if (spec.coupling_d[k].i == i) total += term_V(spec.coupling_d[k], k, ctx, plan, buf);
    return total;
}

void rhs(const model::ModelSpec& spec, const LagContext& ctx, const QuadraturePlan& plan, std::span<double> out) {
    check_plan(spec, plan);
    const int n = spec.n;
    std::vector<double> buf(n), U(n, 0.0), V(n, 0.0);
    for (const auto& e : spec.coupling_c) U[e.i] += term_U(e, ctx, buf);
    for (std::size_t k = 0; k < spec.coupling_d.size(); ++k)
        V[spec.coupling_d[k].i] += term_V(spec.coupling_d[k], k, ctx, plan, buf);
    for (int i = 0; i < n; ++i) {
        const double x = ctx.x_now[i];
        const double a = spec.amplification[i].a(ctx.t, x);
        const double b = spec.selfsignal[i].b(ctx.t, x);
        const double F = spec.outer[i].F(U[i], V[i]);
        const double I = spec.input[i](ctx.t);
        out[i] = a * (-b + F + I);
        if (!std::isfinite(out[i]))
            throw expr::EvalError("non-finite right-hand side", "x" + std::to_string(i + 1) + "'");
    }
}

double eval_U(const model::ModelSpec& spec, int i, double t, const memory::History& h) {
    const auto x = h.sample(t);
    return eval_U(spec, i, LagContext{h, t, x});
}

double eval_V(const model::ModelSpec& spec, int i, double t, const memory::History& h, const QuadraturePlan& plan) {
    const auto x = h.sample(t);
    return eval_V(spec, i, LagContext{h, t, x}, plan);
}

std::vector<double> rhs(const model::ModelSpec& spec, double t, const memory::History& h, const QuadraturePlan& plan) {
    const auto x = h.sample(t);
    std::vector<double> out(spec.n);
    rhs(spec, LagContext{h, t, x}, plan, out);
    return out;
}

}  // namespace cgnn::dde
