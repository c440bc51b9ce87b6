#pragma once

#include <vector>

namespace cgnn::numeric {

struct GaussRule {
    std::vector<double> nodes;    // on [-1, 1], ascending
    std::vector<double> weights;  // sum to 2
};

/// n-point Gauss-Legendre rule by Newton iteration on P_n. Results are cached.
const GaussRule& gauss_legendre(int n);

/// Integral of f over [a, b] with `panels` equal panels of an n-point rule.
template <class F>
double integrate_panels(F&& f, double a, double b, int panels, int n = 16) {
    const GaussRule& rule = gauss_legendre(n);
    const double width = (b - a) / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double left = a + p * width;
        const double mid = left + 0.5 * width;
        double sum = 0.0;
        for (std::size_t k = 0; k < rule.nodes.size(); ++k) sum += rule.weights[k] * f(mid + 0.5 * width * rule.nodes[k]);
        total += 0.5 * width * sum;
    }
    return total;
}

}  // namespace cgnn::numeric
