#pragma once

#include "cgnn/expr.hpp"

#include <functional>
#include <map>
#include <string>
#include <string_view>

namespace cgnn::expr {

enum class BoundKind { lipschitz, derivative_min, sup, inf };

const char* to_string(BoundKind kind);

/// A sampled (never certified) bound of a scalar expression along one variable.
struct BoundEstimate {
    double value = 0.0;
    BoundKind kind = BoundKind::sup;
    double lo = 0.0;
    double hi = 0.0;
    int samples = 0;
    double argument = 0.0;  // where the extremum was observed
    bool certified = false;
};

/// Samples `e` along `var` on a uniform grid of `samples` points over
/// [lo, hi], holding every other parameter at `fixed`.
///
/// lipschitz:       max |e(x_k+1) - e(x_k)| / |x_k+1 - x_k| over adjacent grid points
///                  (equals the max over all sampled pairs).
/// derivative_min:  min central difference at interior grid points.
/// sup / inf:       max / min of sampled values.
///
/// Throws std::invalid_argument on samples < 2 or lo >= hi, and EvalError if
/// evaluation fails inside the interval.
BoundEstimate estimate_bound(const Expr& e, std::string_view var, double lo, double hi, BoundKind kind,
                             int samples, const std::map<std::string, double>& fixed = {});

/// Grid maximum of f on [a, b] with step <= dt, refined by golden-section
/// search around the best sample. Returns {argmax, max}.
std::pair<double, double> sup_over(const std::function<double(double)>& f, double a, double b, double dt);

}  // namespace cgnn::expr
