#pragma once

#include "cgnn/expr.hpp"
#include "cgnn/model.hpp"

#include <deque>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

namespace cgnn::memory {

/// Read access to a solution x(t) on (-inf, t_now].
class StateSource {
public:
    virtual ~StateSource() = default;
    virtual int dimension() const = 0;
    virtual void sample(double t, std::span<double> out) const = 0;
};

class HistoryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dense-output piece on [t_left, t_right]: states and derivatives at both ends.
struct Segment {
    double t_left = 0.0;
    double t_right = 0.0;
    std::vector<double> x_left, x_right;
    std::vector<double> dx_left, dx_right;

    /// Cubic Hermite interpolant; exact at both knots.
    void evaluate(double t, std::span<double> out) const;
};

/// Solution record: phi(t - t0) for t <= t0, Hermite segments on (t0, t_now].
///
/// After truncate_before(floor), queries in (t0, floor) return the state at
/// the oldest retained knot.
class History final : public StateSource {
public:
    /// Validates phi against `phi_bound` on s in [-check_horizon, 0].
    History(std::vector<expr::Expr> phi, double t0, double phi_bound, double check_horizon = 50.0);

    static History from_initial(const model::InitialCondition& ic, double t0, double check_horizon = 50.0) {
        return History(ic.phi, t0, ic.bound, check_horizon);
    }

    int dimension() const override { return static_cast<int>(phi_.size()); }
    double t0() const noexcept { return t0_; }
    double t_now() const noexcept { return segments_.empty() ? t0_ : segments_.back().t_right; }
    double truncation_floor() const noexcept { return floor_; }
    double phi_bound() const noexcept { return phi_bound_; }
    const std::deque<Segment>& segments() const noexcept { return segments_; }

    /// Throws HistoryError for t > t_now.
    void sample(double t, std::span<double> out) const override;
    std::vector<double> sample(double t) const;

    /// True when a query at t is answered by clamping to the oldest knot.
    bool is_clamped(double t) const noexcept { return t > t0_ && t < oldest_knot(); }

    /// Requires seg.t_left == t_now and seg.t_right > seg.t_left.
    void append_segment(Segment seg);

    /// Drops segments lying entirely before t_floor. Requires
    /// t_floor <= t_now - horizon.
    void truncate_before(double t_floor, double horizon);

    /// Span covered by retained segments.
    double retained_span() const noexcept {
        return segments_.empty() ? 0.0 : segments_.back().t_right - segments_.front().t_left;
    }

    /// CSV with header t,x1,...,xn and one row per knot (t0 first).
    void write_csv(std::ostream& out) const;

private:
    double oldest_knot() const noexcept { return segments_.empty() ? t0_ : segments_.front().t_left; }

    std::vector<expr::Expr> phi_;
    double t0_;
    double phi_bound_;
    double floor_;
    std::deque<Segment> segments_;
};

}  // namespace cgnn::memory
