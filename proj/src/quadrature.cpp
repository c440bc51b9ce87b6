#include "cgnn/dde.hpp"
#include "cgnn/gauss_legendre.hpp"

#include <algorithm>
#include <cmath>

namespace cgnn::dde {

namespace {
constexpr int kNodesPerPanel = 8;
}

double KernelRule::mass() const {
    double total = 0.0;
    for (const auto& q : nodes) total += q.weight;
    return total;
}

KernelRule build_rule(const model::KernelMeasure& kernel, double eps_tail) {
    KernelRule rule;
    rule.cutoff = model::kernel_tail_cutoff(kernel, eps_tail);
    const auto atoms = kernel.atoms();
    const double T = rule.cutoff;

    if (T > 0.0) {
        const auto& gl = numeric::gauss_legendre(kNodesPerPanel);
        const int panels = std::max(1, static_cast<int>(std::ceil(T - 1e-12)));
        const double width = T / panels;
        for (int p = 0; p < panels; ++p) {
            const double lo = p * width;
            const double hi = (p + 1 == panels) ? T : lo + width;
            double exact = kernel.lag_mass(lo, hi);
            for (const auto& a : atoms)
                if (a.location > lo && a.location <= hi) exact -= a.mass;
            if (exact <= 0.0) continue;
            const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
            std::vector<QuadratureNode> panel;
            double raw = 0.0;
            for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
                const double u = mid + half * gl.nodes[k];
                const double w = half * gl.weights[k] * kernel.density_at(u);
                panel.push_back({u, w});
                raw += w;
            }
            if (raw <= 0.0) continue;
            const double scale = exact / raw;
            for (auto& q : panel) {
                q.weight *= scale;
                rule.nodes.push_back(q);
            }
        }
    }
    for (const auto& a : atoms)
        if (a.location <= T && a.mass > 0.0) rule.nodes.push_back({a.location, a.mass});
    std::stable_sort(rule.nodes.begin(), rule.nodes.end(),
                     [](const QuadratureNode& a, const QuadratureNode& b) { return a.lag < b.lag; });
    return rule;
}

QuadraturePlan QuadraturePlan::build(const model::ModelSpec& spec, double eps_tail) {
    QuadraturePlan plan;
    plan.eps_tail_ = eps_tail;
    for (const auto& d : spec.coupling_d) {
        std::array<KernelRule, 2> pair{build_rule(d.kernel, eps_tail), build_rule(d.kernel_tilde, eps_tail)};
        plan.horizon_ = std::max({plan.horizon_, pair[0].cutoff, pair[1].cutoff});
        plan.rules_.push_back(std::move(pair));
    }
    return plan;
}

}  // namespace cgnn::dde
