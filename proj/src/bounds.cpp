#include "cgnn/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace cgnn::expr {

const char* to_string(BoundKind kind) {
    switch (kind) {
    case BoundKind::lipschitz: return "lipschitz";
    case BoundKind::derivative_min: return "derivative-min";
    case BoundKind::sup: return "sup";
    case BoundKind::inf: return "inf";
    }
    return "?";
}

BoundEstimate estimate_bound(const Expr& e, std::string_view var, double lo, double hi, BoundKind kind,
                             int samples, const std::map<std::string, double>& fixed) {
    if (samples < 2) throw std::invalid_argument("estimate_bound: samples must be >= 2");
    if (!(lo < hi)) throw std::invalid_argument("estimate_bound: interval must satisfy lo < hi");

    const auto& params = e.params();
    std::vector<double> args(params.size(), 0.0);
    std::size_t slot = params.size();
    for (std::size_t k = 0; k < params.size(); ++k) {
        if (params[k] == var) {
            slot = k;
            continue;
        }
        const auto it = fixed.find(params[k]);
        if (it == fixed.end()) throw std::invalid_argument("estimate_bound: unbound parameter '" + params[k] + "'");
        args[k] = it->second;
    }

    const double step = (hi - lo) / (samples - 1);
    std::vector<double> values(static_cast<std::size_t>(samples));
    auto at = [&](int k) { return k == samples - 1 ? hi : lo + k * step; };
    for (int k = 0; k < samples; ++k) {
        if (slot < args.size()) args[slot] = at(k);
        values[static_cast<std::size_t>(k)] = e(args);
    }

    BoundEstimate out;
    out.kind = kind;
    out.lo = lo;
    out.hi = hi;
    out.samples = samples;

    switch (kind) {
    case BoundKind::lipschitz: {
        double best = 0.0;
        for (int k = 0; k + 1 < samples; ++k) {
            const double dx = at(k + 1) - at(k);
            const double slope = std::fabs(values[k + 1] - values[k]) / dx;
            if (slope > best) {
                best = slope;
                out.argument = 0.5 * (at(k) + at(k + 1));
            }
        }
        out.value = best;
        break;
    }
    case BoundKind::derivative_min: {
        if (samples < 3) throw std::invalid_argument("estimate_bound: derivative-min needs >= 3 samples");
        double best = std::numeric_limits<double>::infinity();
        for (int k = 1; k + 1 < samples; ++k) {
            const double slope = (values[k + 1] - values[k - 1]) / (at(k + 1) - at(k - 1));
            if (slope < best) {
                best = slope;
                out.argument = at(k);
            }
        }
        out.value = best;
        break;
    }
    case BoundKind::sup: {
        const auto it = std::max_element(values.begin(), values.end());
        out.value = *it;
        out.argument = at(static_cast<int>(it - values.begin()));
        break;
    }
    case BoundKind::inf: {
        const auto it = std::min_element(values.begin(), values.end());
        out.value = *it;
        out.argument = at(static_cast<int>(it - values.begin()));
        break;
    }
    }
    return out;
}

std::pair<double, double> sup_over(const std::function<double(double)>& f, double a, double b, double dt) {
    if (b < a) throw std::invalid_argument("sup_over: empty interval");
    const int steps = std::max(1, static_cast<int>(std::ceil((b - a) / dt)));
    const double h = (b - a) / steps;
    double best_t = a;
    double best = f(a);
    for (int k = 1; k <= steps; ++k) {
        const double t = (k == steps) ? b : a + k * h;
        const double v = f(t);
        if (v > best) {
            best = v;
            best_t = t;
        }
    }
    // golden section on the bracket around the best sample
    double lo = std::max(a, best_t - h);
    double hi = std::min(b, best_t + h);
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - r * (hi - lo);
    double x2 = lo + r * (hi - lo);
    double f1 = f(x1);
    double f2 = f(x2);
    for (int it = 0; it < 60 && hi - lo > 1e-12 * (1.0 + std::fabs(best_t)); ++it) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        }
    }
    if (f1 > best) {
        best = f1;
        best_t = x1;
    }
    if (f2 > best) {
        best = f2;
        best_t = x2;
    }
    return {best_t, best};
}

}  // namespace cgnn::expr
