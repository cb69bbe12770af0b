#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "adapt/simulate.hpp"

namespace adapt {

enum class ModelKind { Standard, CoupledRamp, CoupledSigmoid };

std::string model_kind_name(ModelKind kind);
ModelKind model_kind_from_name(const std::string& name);

// Parameter names a kind needs, in canonical order:
//   standard         A, B
//   coupled-ramp     k, p_max, e_sat
//   coupled-sigmoid  k, p_max, a, b, c
std::vector<std::string> parameter_names(ModelKind kind);

// Builds a model from a complete name -> value map. Throws ValidationError
// on missing or unknown names or invalid values.
Model make_model(ModelKind kind, const std::map<std::string, double>& params);

struct FreeParam {
  std::string name;
  double lower = 0.0;
  double upper = 0.0;
};

// Observed trajectories plus the parameterization to recover. Free and
// fixed parameters together must cover the model kind exactly, and every
// bound must sit inside the parameter's legal range so that any clamped
// candidate is constructible.
struct FitProblem {
  std::vector<Trajectory> observed;
  ModelKind kind = ModelKind::CoupledRamp;
  std::vector<FreeParam> free;
  std::map<std::string, double> fixed;

  // Optional user-chosen start points, consumed before the low-discrepancy
  // sequence. Each must match free.size() and lie inside the bounds.
  std::vector<std::vector<double>> explicit_starts;

  void validate() const;
};

inline constexpr double kObjectiveSentinel = 1e300;

struct ObjectiveResult {
  double sse = 0.0;  // sum over trajectories and trials of (x_sim - x_obs)^2
  bool diverged = false;
};

// Simulates each observed protocol under the candidate parameters and
// accumulates squared x residuals. Divergent candidates yield the sentinel
// value with the flag set, never a throw. Per-trajectory partial sums are
// combined in value order, so the result is invariant under reordering of
// the observed trajectories.
ObjectiveResult objective(const FitProblem& problem,
                          std::span<const double> candidate);

struct StartOutcome {
  int index = 0;
  std::vector<double> start;
  std::vector<double> best;
  double objective = kObjectiveSentinel;
  int evaluations = 0;
  bool converged = false;
};

struct FitResult {
  std::vector<double> best_params;  // aligned with FitProblem::free
  double objective = kObjectiveSentinel;
  bool converged = false;
  bool no_improvement = false;  // every start ended at the sentinel
  long total_evaluations = 0;
  int best_start_index = -1;
  std::vector<StartOutcome> starts;
  std::vector<std::string> warnings;
};

// Multi-start bounded simplex descent. Start points come from the problem's
// explicit starts followed by a Halton sequence whose offset derives from
// the seed, so results are reproducible bit for bit given (seed, starts,
// max_evals_per_start) and the best objective over completed starts is
// non-increasing in the number of starts. Ties are broken toward the lowest
// start index. starts >= 1, max_evals_per_start >= 100.
FitResult fit(const FitProblem& problem, int starts, std::uint64_t seed,
              int max_evals_per_start = 2000);

struct ComparisonOptions {
  int starts = 16;
  int max_evals_per_start = 2000;
  ModelKind coupled_kind = ModelKind::CoupledRamp;
  // Box bounds used for the two fits.
  std::vector<FreeParam> standard_free = {{"A", 0.05, 0.995},
                                          {"B", 1e-4, 2.0}};
  std::vector<FreeParam> coupled_free = {{"k", 0.5, 100.0},
                                         {"p_max", 0.005, 0.95},
                                         {"e_sat", 0.5, 30.0}};
};

struct ComparisonReport {
  FitResult standard_fit;
  FitResult coupled_fit;
  double standard_objective = kObjectiveSentinel;
  double coupled_objective = kObjectiveSentinel;
  double objective_ratio = 0.0;  // standard / coupled; inf when coupled is 0
  int distinct_error_sizes = 0;
  std::vector<std::string> notes;
};

// Fits both model kinds to the same data and reports both objectives.
// Data must be non-empty; a single clamped error size is allowed but noted,
// since one geometric curve cannot separate the models.
ComparisonReport cross_model_comparison(std::span<const Trajectory> data,
                                        std::uint64_t seed,
                                        const ComparisonOptions& options = {});

}  // namespace adapt
