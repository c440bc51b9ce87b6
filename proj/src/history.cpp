#include "cgnn/history.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace cgnn::memory {

void Segment::evaluate(double t, std::span<double> out) const {
    const double h = t_right - t_left;
    const double th = (t - t_left) / h;
    const double om = 1.0 - th;
    const double h00 = (1.0 + 2.0 * th) * om * om;
    const double h10 = th * om * om;
    const double h01 = th * th * (3.0 - 2.0 * th);
    const double h11 = th * th * (th - 1.0);
    for (std::size_t k = 0; k < out.size(); ++k)
        out[k] = h00 * x_left[k] + h10 * h * dx_left[k] + h01 * x_right[k] + h11 * h * dx_right[k];
}

History::History(std::vector<expr::Expr> phi, double t0, double phi_bound, double check_horizon)
    : phi_(std::move(phi)), t0_(t0), phi_bound_(phi_bound), floor_(-std::numeric_limits<double>::infinity()) {
    if (phi_.empty()) throw HistoryError("history: initial function has no components");
    for (const auto& e : phi_)
        if (e.params() != model::params::s)
            throw HistoryError("history: initial function '" + e.source() + "' must be over (s)");
    model::InitialCondition ic{phi_, phi_bound_};
    if (auto witness = model::check_phi_bound(ic, check_horizon)) throw HistoryError("history: " + *witness);
}

void History::sample(double t, std::span<double> out) const {
    if (t <= t0_) {
        const double s = t - t0_;
        for (std::size_t k = 0; k < phi_.size(); ++k) out[k] = phi_[k](s);
        return;
    }
    if (t > t_now()) throw HistoryError(fmt::format("history: query at t={:.17g} beyond t_now={:.17g}", t, t_now()));
    if (t < segments_.front().t_left) {
        std::copy(segments_.front().x_left.begin(), segments_.front().x_left.end(), out.begin());
        return;
    }
    // first segment whose right end reaches t
    const auto it = std::lower_bound(segments_.begin(), segments_.end(), t,
                                     [](const Segment& s, double v) { return s.t_right < v; });
    it->evaluate(t, out);
}

std::vector<double> History::sample(double t) const {
    std::vector<double> out(phi_.size());
    sample(t, out);
    return out;
}

void History::append_segment(Segment seg) {
    if (!(seg.t_right > seg.t_left)) throw HistoryError("history: segment must have positive width");
    const double now = t_now();
    if (seg.t_left > now) throw HistoryError(fmt::format("history: gap between t_now={:g} and segment start {:g}", now, seg.t_left));
    if (seg.t_left < now) throw HistoryError(fmt::format("history: segment start {:g} overlaps t_now={:g}", seg.t_left, now));
    const std::size_t n = phi_.size();
    if (seg.x_left.size() != n || seg.x_right.size() != n || seg.dx_left.size() != n || seg.dx_right.size() != n)
        throw HistoryError("history: segment dimension mismatch");
    segments_.push_back(std::move(seg));
}

void History::truncate_before(double t_floor, double horizon) {
    if (t_floor > t_now() - horizon)
        throw HistoryError(fmt::format("history: truncation floor {:g} inside active horizon (t_now={:g}, horizon={:g})",
                                       t_floor, t_now(), horizon));
    while (!segments_.empty() && segments_.front().t_right < t_floor) segments_.pop_front();
    floor_ = std::max(floor_, t_floor);
}

void History::write_csv(std::ostream& out) const {
    out << "t";
    for (std::size_t k = 0; k < phi_.size(); ++k) out << ",x" << (k + 1);
    out << "\n";
    auto row = [&](double t, std::span<const double> x) {
        out << fmt::format("{:.15g}", t);
        for (double v : x) out << fmt::format(",{:.15g}", v);
        out << "\n";
    };
    if (segments_.empty() || segments_.front().t_left == t0_) {
        const auto x0 = sample(t0_);
        row(t0_, x0);
    } else {
        row(segments_.front().t_left, segments_.front().x_left);
    }
    for (const auto& s : segments_) row(s.t_right, s.x_right);
}

}  // namespace cgnn::memory
