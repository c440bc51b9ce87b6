#pragma once

// Independent reference computations and frozen values for the tests.

#include "cgnn/config.hpp"

#include "json.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace oracle {

// mpmath, 30 digits
inline constexpr double U1_at_0 = 0.616156209680013;
inline constexpr double a1_at_0 = 1.520574461395797;
inline constexpr double b1_at_0 = -1.703611315219085;
inline constexpr double dx1_at_0 = 6.568528177528500;
inline constexpr double dx2_at_0 = -4.83978583801198;
inline constexpr double h7_2_at_half_pi = -2.584240847298476;
inline constexpr double ln_1e6 = 13.81551055796427;
inline constexpr double h7_2_sup = -2.76393202250021;
inline constexpr double tanh_half = 0.46211715726001;
// numpy, 2e6-point central differences on [-10, 10]
inline constexpr double deriv_min_m = 0.545844840;
// scipy brentq on (1 + T) e^{-T} = 1e-6
inline constexpr double gamma21_cutoff_1e6 = 16.6884;

struct EulerPath {
    double h = 0.0;
    std::vector<std::array<double, 2>> x;

    std::array<double, 2> at(double t) const {
        const double k = t / h;
        const auto i = static_cast<std::size_t>(std::floor(k));
        if (i + 1 >= x.size()) return x.back();
        const double w = k - static_cast<double>(i);
        return {x[i][0] + w * (x[i + 1][0] - x[i][0]), x[i][1] + w * (x[i + 1][1] - x[i][1])};
    }
};

// Forward Euler for the two-neuron example with its coefficients written out by
// hand; past values are linear interpolants of the Euler grid.
inline EulerPath euler_example5(const std::function<std::array<double, 2>(double)>& phi, double t_end,
                                double h = 1e-4) {
    EulerPath path{h, {}};
    const auto steps = static_cast<std::size_t>(std::llround(t_end / h));
    path.x.reserve(steps + 1);
    path.x.push_back(phi(0.0));
    auto lagged = [&](double s, int comp) {
        if (s <= 0.0) return phi(s)[comp];
        const double k = s / h;
        const auto i = static_cast<std::size_t>(std::floor(k));
        if (i + 1 >= path.x.size()) return path.x.back()[comp];
        const double w = k - static_cast<double>(i);
        return path.x[i][comp] + w * (path.x[i + 1][comp] - path.x[i][comp]);
    };
    for (std::size_t n = 0; n < steps; ++n) {
        const double t = static_cast<double>(n) * h;
        const auto [x1, x2] = path.x.back();
        const double et = std::exp(-t);
        const double y2 = lagged(t - std::fabs(std::sin(t)), 1);
        const double y1 = lagged(t - std::fabs(std::cos(t)), 0);
        const double f1 = (std::sin(x1) + 2.0) *
                          (-(4.0 + et) * x1 * std::exp(std::sin(x1) / (1.0 + x1 * x1)) +
                           (std::cos(t) / 3.0 + et) * std::tanh(y2) + std::exp(std::sin(t)) + et);
        const double f2 = (std::cos(x2) + 2.0) * (-(5.0 + std::cos(t) + et) * x2 +
                                                  (2.0 * std::sin(t) / 3.0 + et) * std::tanh(y1) + std::cos(t) + et);
        path.x.push_back({x1 + h * f1, x2 + h * f2});
    }
    return path;
}

// x' = a(x)[-b x + F(U, V) + I] with scalar pieces; handy for small documents.
inline nlohmann::json scalar_document(const std::string& b, const std::string& beta, const std::string& input,
                                      const std::string& phi, double bound = 1.0) {
    return {{"name", "scalar"},
            {"dimensions", {{"n", 1}, {"P", 1}}},
            {"amplification", {{{"expr", "1"}, {"a_lo", 1}, {"a_hi", 1}}}},
            {"selfsignal", {{{"expr", b}, {"beta_expr", beta}}}},
            {"outer", {{{"F_expr", "u1+u2"}, {"zeta", 1}, {"sigma", 1}}}},
            {"input", {{{"expr", input}}}},
            {"initial", {{{"phi", {phi}}, {"bound", bound}}}}};
}

inline nlohmann::json c_entry(const std::string& c, const std::string& h, const std::string& tau, double gamma1 = 1.0) {
    return {{"i", 1}, {"j", 1}, {"l", 1}, {"p", 1}, {"c_expr", c}, {"h_expr", h},
            {"gamma1", gamma1}, {"gamma2", 0}, {"tau_expr", tau}, {"tau_tilde_expr", "0"}};
}

inline nlohmann::json d_entry(const std::string& d, const nlohmann::json& kernel) {
    return {{"i", 1}, {"j", 1}, {"l", 1}, {"p", 1}, {"d_expr", d}, {"f_expr", "u1"},
            {"mu1", 1}, {"mu2", 0}, {"g_expr", "u"}, {"g_tilde_expr", "u"},
            {"xi", 1}, {"xi_tilde", 1}, {"kernel", kernel}, {"kernel_tilde", kernel}};
}

}  // namespace oracle
