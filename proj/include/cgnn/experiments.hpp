#pragma once

#include "cgnn/criteria.hpp"
#include "cgnn/dde.hpp"
#include "cgnn/model.hpp"

#include "json.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cgnn::experiments {

enum class BuiltinName { example5, example5_asymptotic, static_kernel, highorder_periodic, loworder_almostperiodic };

const char* to_string(BuiltinName name);
std::optional<BuiltinName> parse_builtin(std::string_view name);
const std::vector<BuiltinName>& all_builtins();

/// Numeric overrides by name; unknown names are rejected by builtin().
struct BuiltinParams {
    std::map<std::string, double> values;

    double get(const std::string& key, double fallback) const;
};

/// The constructor would produce a model whose stability inequality fails.
class BuiltinRefused : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct BuiltinModel {
    model::ModelSpec base;
    std::optional<model::ModelSpec> partner;  // asymptotic system, when the family has one
    double period = 0.0;                      // of the partner (or base when periodic); 0 if none
};

/// example5 / example5_asymptotic: the two-neuron system with vanishing
/// e^{-t} terms and its 2pi-periodic partner (no parameters).
///
/// static_kernel: n (2), coupling (0.4), beta (1), a_lo (1), a_hi (2),
/// rate (1), forcing (0.5). Ring coupling c_{i,i+1} = coupling*cos t through
/// x' = a(x)[-b(t,x) + tanh(sum_j c_ij int x_j d eta)], exponential kernel.
///
/// highorder_periodic: beta (3), a_lo (1), a_hi (2), rho (1), c_amp (0.25),
/// d1 (0.15), d2 (0.05), transient (1); gamma(2,1) kernels, tanh activations.
///
/// loworder_almostperiodic: beta (4), a_lo (1), a_hi (2), c_amp (0.3),
/// d_amp (0.2), p_amp (0.2), transient (1); coefficients built from
/// (sin t + sin(sqrt(2) t))/2.
///
/// Throws BuiltinRefused when the family's inequality fails for the
/// requested parameters, std::invalid_argument on unknown or out-of-range
/// parameters.
BuiltinModel builtin(BuiltinName name, const BuiltinParams& params = {});

/// Config document for a builtin (the partner for example5_asymptotic).
nlohmann::json builtin_document(BuiltinName name, const BuiltinParams& params = {});

/// sup over [t_a, t_b] of max_i |x_i(t + omega) - x_i(t)|.
double periodicity_defect(const criteria::StateFn& x, double omega, double t_a, double t_b, double dt = 0.01);
/// Requires t_b + omega <= trajectory end and t_a >= its start.
double periodicity_defect(const dde::Trajectory& traj, double omega, double t_a, double t_b, double dt = 0.01);

struct RecipeOptions {
    std::filesystem::path out_dir;  // empty: nothing written
    dde::IntegratorOptions integrator;
    double t_end = 40.0;
    int threads = 0;  // 0: CGNN_LAB_THREADS or hardware concurrency
};

struct RecipeVerdict {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct TrajectoryInfo {
    std::string label;
    long accepted = 0;
    long rejected = 0;
    double max_abs = 0.0;
    double wall_seconds = 0.0;
};

struct ExperimentReport {
    std::string recipe;
    std::vector<std::string> models;
    std::vector<TrajectoryInfo> trajectories;
    std::vector<std::string> convergence_labels;
    std::vector<criteria::ConvergenceCurve> convergence;
    std::vector<double> defect_grid;
    std::vector<double> defect_curve;
    std::optional<criteria::CriterionCurve> criterion;
    std::vector<RecipeVerdict> verdicts;
    double wall_seconds = 0.0;

    bool pass() const;
    const RecipeVerdict* verdict(const std::string& name) const;
    void write(std::ostream& out) const;
};

const std::vector<std::string>& recipe_names();

/// Throws std::invalid_argument for an unknown recipe; integration errors
/// propagate.
ExperimentReport run_recipe(std::string_view name, const RecipeOptions& opts = {});

/// Integrates several initial conditions of one spec, in parallel up to the
/// thread cap.
std::vector<dde::Trajectory> integrate_all(const model::ModelSpec& spec, const std::vector<model::InitialCondition>& ics,
                                           double t0, double t_end, const dde::IntegratorOptions& opts, int threads = 0);

/// CGNN_LAB_THREADS when set and positive, otherwise hardware concurrency.
int thread_cap();

}  // namespace cgnn::experiments
