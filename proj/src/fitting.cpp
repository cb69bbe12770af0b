#include "adapt/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <set>

#include "adapt/nelder_mead.hpp"

namespace adapt {

std::string model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::Standard: return "standard";
    case ModelKind::CoupledRamp: return "coupled-ramp";
    case ModelKind::CoupledSigmoid: return "coupled-sigmoid";
  }
  throw ValidationError("unknown model kind");
}

ModelKind model_kind_from_name(const std::string& name) {
  if (name == "standard") return ModelKind::Standard;
  if (name == "coupled-ramp") return ModelKind::CoupledRamp;
  if (name == "coupled-sigmoid") return ModelKind::CoupledSigmoid;
  throw ValidationError("unknown model kind '" + name + "'");
}

std::vector<std::string> parameter_names(ModelKind kind) {
  switch (kind) {
    case ModelKind::Standard: return {"A", "B"};
    case ModelKind::CoupledRamp: return {"k", "p_max", "e_sat"};
    case ModelKind::CoupledSigmoid: return {"k", "p_max", "a", "b", "c"};
  }
  throw ValidationError("unknown model kind");
}

namespace {

// Canonical parameter order matches parameter_names(kind).
Model model_from_values(ModelKind kind, std::span<const double> v) {
  switch (kind) {
    case ModelKind::Standard:
      return StandardSsmParams(v[0], v[1]);
    case ModelKind::CoupledRamp:
      return CoupledModelParams(v[0], RateFunction::ramp(v[1], v[2]));
    case ModelKind::CoupledSigmoid:
      return CoupledModelParams(v[0],
                                RateFunction::shifted_sigmoid(v[2], v[3], v[4], v[1]));
  }
  throw ValidationError("unknown model kind");
}

struct LegalRange {
  double lo;
  double hi;  // open interval (lo, hi)
};

LegalRange legal_range(const std::string& name) {
  if (name == "A" || name == "p_max") return {0.0, 1.0};
  return {0.0, std::numeric_limits<double>::infinity()};
}

}  // namespace

Model make_model(ModelKind kind, const std::map<std::string, double>& params) {
  const std::vector<std::string> names = parameter_names(kind);
  if (params.size() != names.size()) {
    for (const auto& [name, value] : params) {
      if (std::find(names.begin(), names.end(), name) == names.end()) {
        throw ValidationError("unknown parameter '" + name + "' for model kind " +
                              model_kind_name(kind));
      }
    }
  }
  std::vector<double> values;
  values.reserve(names.size());
  for (const auto& name : names) {
    const auto it = params.find(name);
    if (it == params.end()) {
      throw ValidationError("missing parameter '" + name + "' for model kind " +
                            model_kind_name(kind));
    }
    values.push_back(it->second);
  }
  return model_from_values(kind, values);
}

void FitProblem::validate() const {
  if (observed.empty()) throw ValidationError("fit problem has no observed trajectories");
  const ProtocolKind family = observed.front().protocol.kind;
  for (const auto& traj : observed) {
    traj.protocol.validate();
    if (traj.protocol.kind != family) {
      throw ValidationError("observed trajectories must share one protocol family");
    }
    if (traj.records.size() < 2) {
      throw ValidationError("observed trajectories need at least 2 records");
    }
    if (static_cast<int>(traj.records.size()) != traj.protocol.n_trials + 1) {
      throw ValidationError("trajectory record count must be n_trials + 1");
    }
    for (size_t i = 0; i < traj.records.size(); ++i) {
      if (traj.records[i].trial != static_cast<int>(i)) {
        throw ValidationError("trajectory trial indices must run 0..n_trials");
      }
    }
    if (traj.records.front().x != traj.protocol.x0) {
      throw ValidationError("trajectory x0 must match its first record");
    }
  }

  if (free.empty()) throw ValidationError("fit problem needs at least one free parameter");
  const std::vector<std::string> names = parameter_names(kind);
  std::set<std::string> seen;
  for (const auto& p : free) {
    if (std::find(names.begin(), names.end(), p.name) == names.end()) {
      throw ValidationError("unknown free parameter '" + p.name + "'");
    }
    if (!seen.insert(p.name).second) {
      throw ValidationError("duplicate free parameter '" + p.name + "'");
    }
    if (fixed.count(p.name)) {
      throw ValidationError("parameter '" + p.name + "' is both free and fixed");
    }
    if (!std::isfinite(p.lower) || !std::isfinite(p.upper) || !(p.lower < p.upper)) {
      throw ValidationError("bounds for '" + p.name +
                            "' must be finite with lower < upper");
    }
    const LegalRange range = legal_range(p.name);
    if (!(p.lower > range.lo) || !(p.upper < range.hi)) {
      throw ValidationError("bounds for '" + p.name +
                            "' must lie inside the parameter's legal range");
    }
  }
  for (const auto& [name, value] : fixed) {
    if (std::find(names.begin(), names.end(), name) == names.end()) {
      throw ValidationError("unknown fixed parameter '" + name + "'");
    }
    const LegalRange range = legal_range(name);
    if (!std::isfinite(value) || !(value > range.lo) || !(value < range.hi)) {
      throw ValidationError("fixed parameter '" + name + "' is out of range");
    }
  }
  if (seen.size() + fixed.size() != names.size()) {
    throw ValidationError("free and fixed parameters together must cover the model kind");
  }

  for (const auto& start : explicit_starts) {
    if (start.size() != free.size()) {
      throw ValidationError("explicit start dimension must match the free parameters");
    }
    for (size_t i = 0; i < start.size(); ++i) {
      if (!(start[i] >= free[i].lower) || !(start[i] <= free[i].upper)) {
        throw ValidationError("explicit start lies outside the bounds");
      }
    }
  }
}

namespace {

struct CompiledSeries {
  Protocol protocol;
  std::vector<double> xs;
};

struct Evaluator {
  ModelKind kind;
  std::vector<size_t> free_slots;     // canonical index per free parameter
  std::vector<double> canonical;      // fixed values, free slots overwritten
  std::vector<CompiledSeries> series;

  ObjectiveResult operator()(std::span<const double> candidate) const {
    std::vector<double> values = canonical;
    for (size_t i = 0; i < free_slots.size(); ++i) {
      values[free_slots[i]] = candidate[i];
    }

    ObjectiveResult result;
    std::optional<Model> model;
    try {
      model = model_from_values(kind, values);
    } catch (const ValidationError&) {
      result.sse = kObjectiveSentinel;
      result.diverged = true;
      return result;
    }

    std::vector<double> partials;
    partials.reserve(series.size());
    for (const auto& s : series) {
      const std::optional<double> partial = series_sse(*model, s);
      if (!partial) {
        result.sse = kObjectiveSentinel;
        result.diverged = true;
        return result;
      }
      partials.push_back(*partial);
    }
    // Summing in value order keeps the total independent of how the
    // observed trajectories were ordered in the problem.
    std::sort(partials.begin(), partials.end());
    double total = 0.0;
    for (double p : partials) total += p;
    result.sse = total;
    return result;
  }

  static std::optional<double> series_sse(const Model& model,
                                          const CompiledSeries& s) {
    return std::visit(
        [&s](const auto& m) -> std::optional<double> {
          TrialState state{0, s.protocol.x0};
          double diff = state.x - s.xs[0];
          double sse = diff * diff;
          const int n_trials = static_cast<int>(s.xs.size()) - 1;
          for (int n = 0; n < n_trials; ++n) {
            const ErrorSignal e = error_for_trial(s.protocol, state);
            if constexpr (std::is_same_v<std::decay_t<decltype(m)>,
                                         StandardSsmParams>) {
              state = step_standard(m, state, e);
            } else {
              state = step_coupled(m, state, e);
            }
            if (std::fabs(state.x) > kDivergenceBound) return std::nullopt;
            diff = state.x - s.xs[static_cast<size_t>(n) + 1];
            sse += diff * diff;
          }
          return sse;
        },
        model);
  }
};

Evaluator compile(const FitProblem& problem) {
  Evaluator evaluator;
  evaluator.kind = problem.kind;
  const std::vector<std::string> names = parameter_names(problem.kind);
  evaluator.canonical.assign(names.size(), 0.0);
  for (size_t i = 0; i < names.size(); ++i) {
    const auto it = problem.fixed.find(names[i]);
    if (it != problem.fixed.end()) evaluator.canonical[i] = it->second;
  }
  for (const auto& p : problem.free) {
    const auto it = std::find(names.begin(), names.end(), p.name);
    evaluator.free_slots.push_back(static_cast<size_t>(it - names.begin()));
  }
  for (const auto& traj : problem.observed) {
    CompiledSeries s;
    s.protocol = traj.protocol;
    s.xs.reserve(traj.records.size());
    for (const auto& record : traj.records) s.xs.push_back(record.x);
    evaluator.series.push_back(std::move(s));
  }
  return evaluator;
}

void check_candidate(const FitProblem& problem, std::span<const double> candidate) {
  if (candidate.size() != problem.free.size()) {
    throw ValidationError("candidate dimension must match the free parameters");
  }
  for (size_t i = 0; i < candidate.size(); ++i) {
    if (!(candidate[i] >= problem.free[i].lower) ||
        !(candidate[i] <= problem.free[i].upper)) {
      throw ValidationError("candidate value for '" + problem.free[i].name +
                            "' is outside its bounds");
    }
  }
}

}  // namespace

ObjectiveResult objective(const FitProblem& problem,
                          std::span<const double> candidate) {
  problem.validate();
  check_candidate(problem, candidate);
  return compile(problem)(candidate);
}

FitResult fit(const FitProblem& problem, int starts, std::uint64_t seed,
              int max_evals_per_start) {
  problem.validate();
  if (starts < 1) throw ValidationError("starts must be >= 1");
  if (max_evals_per_start < 100) throw ValidationError("max_evals must be >= 100");

  const Evaluator evaluator = compile(problem);
  const ObjectiveFn objective_fn = [&evaluator](std::span<const double> candidate) {
    return evaluator(candidate).sse;
  };

  const size_t dim = problem.free.size();
  std::vector<double> lower(dim), upper(dim);
  for (size_t i = 0; i < dim; ++i) {
    lower[i] = problem.free[i].lower;
    upper[i] = problem.free[i].upper;
  }

  // Start k depends only on the seed and k, never on the total number of
  // starts, so growing `starts` only ever adds candidates.
  const std::uint64_t halton_offset = splitmix64(seed) % 1000003 + 1;

  FitResult result;
  for (int k = 0; k < starts; ++k) {
    std::vector<double> start_point;
    if (k < static_cast<int>(problem.explicit_starts.size())) {
      start_point = problem.explicit_starts[static_cast<size_t>(k)];
    } else {
      const std::uint64_t halton_index =
          halton_offset + static_cast<std::uint64_t>(
                              k - static_cast<int>(problem.explicit_starts.size()));
      const std::vector<double> unit = halton_point(halton_index, static_cast<int>(dim));
      start_point.resize(dim);
      for (size_t i = 0; i < dim; ++i) {
        start_point[i] = lower[i] + unit[i] * (upper[i] - lower[i]);
      }
    }

    // Coarse descent, then a polish run from the incumbent with a small
    // initial simplex. The polish starts at the coarse optimum, so it can
    // only improve on it.
    NelderMeadOptions coarse;
    coarse.max_evals = std::max(100, (max_evals_per_start * 3) / 5);
    coarse.initial_step = 0.10;
    const NelderMeadResult first = nelder_mead(objective_fn, start_point, lower,
                                               upper, coarse);

    NelderMeadResult refined = first;
    const int remaining = max_evals_per_start - first.evaluations;
    if (remaining >= static_cast<int>(dim) + 2) {
      NelderMeadOptions polish;
      polish.max_evals = remaining;
      polish.initial_step = 1e-3;
      refined = nelder_mead(objective_fn, first.best, lower, upper, polish);
      refined.evaluations += first.evaluations;
      if (first.f_best < refined.f_best) {
        refined.best = first.best;
        refined.f_best = first.f_best;
      }
    }

    StartOutcome outcome;
    outcome.index = k;
    outcome.start = std::move(start_point);
    outcome.best = refined.best;
    outcome.objective = refined.f_best;
    outcome.evaluations = refined.evaluations;
    outcome.converged = refined.converged;
    result.total_evaluations += refined.evaluations;

    if (outcome.objective < result.objective) {
      result.objective = outcome.objective;
      result.best_params = outcome.best;
      result.converged = outcome.converged;
      result.best_start_index = k;
    }
    result.starts.push_back(std::move(outcome));
  }

  result.no_improvement = result.objective >= kObjectiveSentinel * 0.999;
  if (result.no_improvement) {
    result.warnings.push_back("no start improved on the divergence sentinel");
  }

  if (problem.kind != ModelKind::Standard) {
    std::set<double> clamp_sizes;
    bool all_clamped = true;
    for (const auto& traj : problem.observed) {
      if (traj.protocol.kind == ProtocolKind::Ticvf) {
        clamp_sizes.insert(std::fabs(traj.protocol.magnitude));
      } else {
        all_clamped = false;
      }
    }
    if (all_clamped && clamp_sizes.size() == 1) {
      result.warnings.push_back(
          "observed data spans a single clamped error size; k and P(E) are only "
          "jointly identified through the shared asymptote");
    }
  }
  return result;
}

ComparisonReport cross_model_comparison(std::span<const Trajectory> data,
                                        std::uint64_t seed,
                                        const ComparisonOptions& options) {
  if (data.empty()) throw ValidationError("comparison needs observed data");

  FitProblem standard_problem;
  standard_problem.observed.assign(data.begin(), data.end());
  standard_problem.kind = ModelKind::Standard;
  standard_problem.free = options.standard_free;

  FitProblem coupled_problem;
  coupled_problem.observed.assign(data.begin(), data.end());
  coupled_problem.kind = options.coupled_kind;
  coupled_problem.free = options.coupled_free;

  ComparisonReport report;
  std::set<double> clamp_sizes;
  for (const auto& traj : data) {
    if (traj.protocol.kind == ProtocolKind::Ticvf) {
      clamp_sizes.insert(std::fabs(traj.protocol.magnitude));
    }
  }
  report.distinct_error_sizes = static_cast<int>(clamp_sizes.size());
  if (report.distinct_error_sizes < 2) {
    report.notes.push_back(
        "fewer than two distinct clamped error sizes; a single curve cannot "
        "separate the models");
  }

  report.standard_fit = fit(standard_problem, options.starts, seed,
                            options.max_evals_per_start);
  report.coupled_fit = fit(coupled_problem, options.starts, seed,
                           options.max_evals_per_start);
  report.standard_objective = report.standard_fit.objective;
  report.coupled_objective = report.coupled_fit.objective;
  if (report.coupled_objective == 0.0) {
    report.objective_ratio = report.standard_objective == 0.0
                                 ? 1.0
                                 : std::numeric_limits<double>::infinity();
  } else {
    report.objective_ratio = report.standard_objective / report.coupled_objective;
  }
  return report;
}

}  // namespace adapt
