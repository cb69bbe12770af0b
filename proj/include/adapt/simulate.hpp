#pragma once

#include <optional>
#include <vector>

#include "adapt/models.hpp"
#include "adapt/protocol.hpp"

namespace adapt {

// One row of a simulated run. e and p are the error and the rate applied
// on the step out of this trial, so the row at n = 0 carries the first
// trial's context and the last row carries the values that would apply
// next.
struct TrialRecord {
  int trial = 0;
  double x = 0.0;
  double e = 0.0;
  double p = 0.0;
};

enum class StopReason {
  TrialCountReached,  // plain simulate: ran the requested number of trials
  Converged,          // step size fell below tolerance
  TrialLimit,         // n_max hit before convergence
};

struct Trajectory {
  std::vector<TrialRecord> records;    // n_trials + 1 rows, indices 0..n_trials
  Protocol protocol;                   // echo; n_trials matches records.size() - 1
  std::optional<Model> model;          // echo; empty for trajectories loaded from file
  StopReason stop = StopReason::TrialCountReached;

  bool converged() const { return stop == StopReason::Converged; }
  int n_trials() const { return static_cast<int>(records.size()) - 1; }
};

// |x| beyond this signals a divergent parameterization.
inline constexpr double kDivergenceBound = 1e12;

// Applies error_for_trial then the model's step, protocol.n_trials times,
// starting at protocol.x0. Deterministic; records every intermediate value.
// Throws NumericError if |x| exceeds kDivergenceBound.
Trajectory simulate(const Model& model, const Protocol& protocol);

// Runs until |x_{n+1} - x_n| < tol or n_max trials, whichever first.
// protocol.n_trials is ignored; the echoed protocol carries the number of
// trials actually run. Hitting n_max is flagged via StopReason, not an error.
Trajectory simulate_until_converged(const Model& model, const Protocol& protocol,
                                    double tol = 1e-9, int n_max = 10000);

}  // namespace adapt
