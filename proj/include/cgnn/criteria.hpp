#pragma once

#include "cgnn/dde.hpp"
#include "cgnn/model.hpp"

#include <array>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cgnn::criteria {

enum class Verdict { pass_sampled, fail, not_applicable };

const char* to_string(Verdict v);

/// Where a sampled check failed: indices, the point, observed vs declared value.
struct Witness {
    std::string indices;
    std::string point;
    double observed = 0.0;
    double declared = 0.0;
    std::string detail;

    std::string describe() const;
};

struct HypothesisResult {
    std::string name;
    Verdict verdict = Verdict::not_applicable;
    std::optional<Witness> witness;
    std::string caveat;
};

struct HypothesisReport {
    std::array<HypothesisResult, 7> results;

    /// 1-based: at(1) is H1.
    const HypothesisResult& at(int h) const { return results.at(h - 1); }
    /// True when nothing failed.
    bool all_pass() const;
    void write(std::ostream& out) const;
};

struct SamplingWindows {
    double t_max = 50.0;
    double u_max = 10.0;
    int t_samples = 201;
    int u_samples = 401;
};

/// Falsification sampling of H1-H7. H7 uses `d` when given, otherwise the
/// result of find_weights on the same window.
HypothesisReport validate_hypotheses(const model::ModelSpec& spec, const SamplingWindows& windows = {},
                                     std::optional<std::vector<double>> d = std::nullopt);

/// Bracketed H7 expression for every i at time t.
std::vector<double> h7_value(const model::ModelSpec& spec, std::span<const double> d, double t);

struct CriterionCurve {
    std::vector<double> grid;
    std::vector<std::vector<double>> values;  // values[i][k]
    std::vector<double> limsup;
    std::vector<double> d;

    bool negative() const;
    /// CSV t,value_1,...,value_n.
    void write_csv(std::ostream& out) const;
};

/// Uniform grid 0, step, ..., t_max; limsup_i is the max over the last
/// tail_fraction of the grid.
CriterionCurve h7_limsup(const model::ModelSpec& spec, std::span<const double> d, double t_max, double grid_step,
                         double tail_fraction = 0.5);

struct WeightResult {
    bool feasible = false;
    double radius = 0.0;
    std::vector<double> d;
    std::vector<double> beta_lo;
    std::vector<std::vector<double>> K;
};

/// Spectral feasibility for beta_lo_i d_i - sum_j K_ij d_j >= margin d_i.
WeightResult weights_from_matrix(const std::vector<double>& beta_lo, const std::vector<std::vector<double>>& K,
                                 double margin = 1e-6);

/// Aggregates K and beta_lo over the tail half of the grid of h7_limsup and
/// solves for d.
WeightResult find_weights(const model::ModelSpec& spec, double t_max, double grid_step);

struct Probe {
    std::string name;
    std::function<double(double)> w;
};

std::vector<Probe> default_probes();

struct TimeGrid {
    double t_lo = 0.0;
    double t_hi = 40.0;
    double step = 0.01;

    std::vector<double> points() const;
};

struct GapSeries {
    std::string quantity;
    std::vector<double> values;
    double head_max = 0.0;
    double tail_max = 0.0;
    bool decays = false;
};

struct GapCurve {
    std::vector<double> grid;
    std::vector<GapSeries> series;

    bool pass() const;
    const GapSeries* find(const std::string& quantity) const;
};

/// Difference curves |base - partner| for beta, b on each probe, c, d, tau,
/// tau~ and I. Entries missing on one side count as zero. Throws
/// model::StructuralMismatch when the pair is not comparable.
GapCurve asymptotic_gap(const model::AsymptoticPair& pair, const std::vector<Probe>& probes = default_probes(),
                        const TimeGrid& grid = {});

struct ConvergenceCurve {
    std::vector<double> grid;
    std::vector<double> g;
    double window = 0.0;

    double final_value() const { return g.empty() ? 0.0 : g.back(); }
    bool converged(double tol) const { return !g.empty() && final_value() <= tol; }
    void write_csv(std::ostream& out) const;
};

using StateFn = std::function<std::vector<double>(double)>;

/// g(t) = max over sample points in [t, t + window] of max_i |a_i - b_i|,
/// for t on a dt-grid of [t_lo, t_hi - window]. Requires t_hi - t_lo >= 3 window.
ConvergenceCurve pair_convergence(const StateFn& a, const StateFn& b, double t_lo, double t_hi, double window,
                                  double dt = 0.01);

/// Uses the shared time range of both trajectories.
ConvergenceCurve pair_convergence(const dde::Trajectory& a, const dde::Trajectory& b, double window, double dt = 0.01);

}  // namespace cgnn::criteria
