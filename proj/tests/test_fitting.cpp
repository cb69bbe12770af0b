#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "adapt/fitting.hpp"
#include "adapt/nelder_mead.hpp"

using namespace adapt;

namespace {

Model coupled_truth() {
  return CoupledModelParams(20.0, RateFunction::ramp(0.2, 7.5));
}

std::vector<Trajectory> coupled_data(const std::vector<double>& sizes, int n_trials) {
  std::vector<Trajectory> data;
  for (double e : sizes) {
    data.push_back(simulate(coupled_truth(), Protocol::ticvf(e, n_trials)));
  }
  return data;
}

FitProblem coupled_problem(const std::vector<double>& sizes, int n_trials = 60) {
  FitProblem problem;
  problem.observed = coupled_data(sizes, n_trials);
  problem.kind = ModelKind::CoupledRamp;
  problem.free = {{"k", 0.5, 100.0}, {"p_max", 0.005, 0.95}, {"e_sat", 0.5, 30.0}};
  return problem;
}

}  // namespace

TEST_CASE("parameter name tables") {
  CHECK(parameter_names(ModelKind::Standard) == std::vector<std::string>{"A", "B"});
  CHECK(parameter_names(ModelKind::CoupledRamp) ==
        std::vector<std::string>{"k", "p_max", "e_sat"});
  CHECK(parameter_names(ModelKind::CoupledSigmoid) ==
        std::vector<std::string>{"k", "p_max", "a", "b", "c"});
  for (ModelKind kind :
       {ModelKind::Standard, ModelKind::CoupledRamp, ModelKind::CoupledSigmoid}) {
    CHECK(model_kind_from_name(model_kind_name(kind)) == kind);
  }
  CHECK_THROWS_AS(model_kind_from_name("bogus"), ValidationError);
}

TEST_CASE("model assembly from a parameter map") {
  const Model standard =
      make_model(ModelKind::Standard, {{"A", 0.9}, {"B", 0.05}});
  CHECK(std::get<StandardSsmParams>(standard).retention == 0.9);

  const Model ramp = make_model(ModelKind::CoupledRamp,
                                {{"k", 20.0}, {"p_max", 0.2}, {"e_sat", 7.5}});
  CHECK(std::get<CoupledModelParams>(ramp).rate(15.0) == 0.2);

  CHECK_THROWS_AS(make_model(ModelKind::Standard, {{"A", 0.9}}), ValidationError);
  CHECK_THROWS_AS(
      make_model(ModelKind::Standard, {{"A", 0.9}, {"B", 0.05}, {"k", 2.0}}),
      ValidationError);
  CHECK_THROWS_AS(make_model(ModelKind::Standard, {{"A", 1.5}, {"B", 0.05}}),
                  ValidationError);
}

TEST_CASE("fit problem validation catches structural mistakes") {
  FitProblem good = coupled_problem({15.0});
  CHECK_NOTHROW(good.validate());

  FitProblem no_data = good;
  no_data.observed.clear();
  CHECK_THROWS_AS(no_data.validate(), ValidationError);

  FitProblem mixed = good;
  mixed.observed.push_back(simulate(coupled_truth(), Protocol::vmr(10.0, 60)));
  CHECK_THROWS_AS(mixed.validate(), ValidationError);

  FitProblem bad_count = good;
  bad_count.observed[0].protocol.n_trials = 10;
  CHECK_THROWS_AS(bad_count.validate(), ValidationError);

  FitProblem no_free = good;
  no_free.free.clear();
  CHECK_THROWS_AS(no_free.validate(), ValidationError);

  FitProblem incomplete = good;
  incomplete.free.pop_back();  // e_sat neither free nor fixed
  CHECK_THROWS_AS(incomplete.validate(), ValidationError);
  incomplete.fixed["e_sat"] = 7.5;
  CHECK_NOTHROW(incomplete.validate());

  FitProblem twice = good;
  twice.fixed["k"] = 20.0;
  CHECK_THROWS_AS(twice.validate(), ValidationError);

  FitProblem bad_bounds = good;
  bad_bounds.free[1] = {"p_max", 0.0, 0.95};  // touches the open legal range
  CHECK_THROWS_AS(bad_bounds.validate(), ValidationError);
  bad_bounds.free[1] = {"p_max", 0.9, 0.1};
  CHECK_THROWS_AS(bad_bounds.validate(), ValidationError);

  FitProblem bad_start = good;
  bad_start.explicit_starts.push_back({20.0, 0.2});  // wrong dimension
  CHECK_THROWS_AS(bad_start.validate(), ValidationError);
  bad_start.explicit_starts = {{200.0, 0.2, 7.5}};  // outside bounds
  CHECK_THROWS_AS(bad_start.validate(), ValidationError);
}

TEST_CASE("objective is zero at the generating parameters") {
  const FitProblem problem = coupled_problem({3.75, 15.0, 30.0});
  const std::vector<double> truth = {20.0, 0.2, 7.5};
  const ObjectiveResult result = objective(problem, truth);
  CHECK_FALSE(result.diverged);
  CHECK(result.sse == 0.0);
}

TEST_CASE("objective is invariant under trajectory reordering, bit for bit") {
  FitProblem forward = coupled_problem({3.75, 15.0, 30.0});
  FitProblem backward = forward;
  std::reverse(backward.observed.begin(), backward.observed.end());

  const std::vector<std::vector<double>> candidates = {
      {20.0, 0.2, 7.5}, {18.0, 0.3, 6.0}, {25.0, 0.1, 10.0}, {0.5, 0.9, 29.0}};
  for (const auto& candidate : candidates) {
    CHECK(objective(forward, candidate).sse == objective(backward, candidate).sse);
  }
}

TEST_CASE("objective reports divergence through the sentinel, not a throw") {
  FitProblem problem;
  problem.observed = {simulate(Model(StandardSsmParams(0.9, 0.05)),
                               Protocol::vmr(10.0, 40))};
  problem.kind = ModelKind::Standard;
  problem.free = {{"A", 0.05, 0.995}, {"B", 1e-4, 20.0}};
  // B far above 1 + A turns the closed-loop map into an oscillating blowup
  const ObjectiveResult result = objective(problem, std::vector<double>{0.9, 15.0});
  CHECK(result.diverged);
  CHECK(result.sse == kObjectiveSentinel);
}

TEST_CASE("objective accepts candidates on the bound edge and rejects outside") {
  const FitProblem problem = coupled_problem({15.0});
  CHECK_NOTHROW(objective(problem, std::vector<double>{0.5, 0.005, 0.5}));
  CHECK_NOTHROW(objective(problem, std::vector<double>{100.0, 0.95, 30.0}));
  CHECK_THROWS_AS(objective(problem, std::vector<double>{0.4, 0.2, 7.5}),
                  ValidationError);
  CHECK_THROWS_AS(objective(problem, std::vector<double>{20.0, 0.2}),
                  ValidationError);
}

TEST_CASE("simplex descent solves a bounded quadratic") {
  const ObjectiveFn f = [](std::span<const double> x) {
    const double dx = x[0] - 1.3;
    const double dy = x[1] + 0.4;
    return dx * dx + dy * dy;
  };
  const std::vector<double> x0 = {4.0, 4.0};
  const std::vector<double> lower = {-5.0, -5.0};
  const std::vector<double> upper = {5.0, 5.0};
  const NelderMeadResult result = nelder_mead(f, x0, lower, upper);
  CHECK(result.converged);
  CHECK(std::fabs(result.best[0] - 1.3) < 1e-6);
  CHECK(std::fabs(result.best[1] + 0.4) < 1e-6);
}

TEST_CASE("simplex descent respects the box when the optimum lies outside") {
  const ObjectiveFn f = [](std::span<const double> x) {
    const double dx = x[0] - 7.0;
    return dx * dx + x[1] * x[1];
  };
  const std::vector<double> x0 = {0.0, 1.0};
  const std::vector<double> lower = {-5.0, -5.0};
  const std::vector<double> upper = {5.0, 5.0};
  const NelderMeadResult result = nelder_mead(f, x0, lower, upper);
  CHECK(result.best[0] <= 5.0);
  CHECK(std::fabs(result.best[0] - 5.0) < 1e-6);
  CHECK(std::fabs(result.best[1]) < 1e-6);
}

TEST_CASE("simplex descent argument validation") {
  const ObjectiveFn f = [](std::span<const double> x) { return x[0] * x[0]; };
  CHECK_THROWS_AS(
      nelder_mead(f, std::vector<double>{}, std::vector<double>{},
                  std::vector<double>{}),
      ValidationError);
  CHECK_THROWS_AS(nelder_mead(f, std::vector<double>{0.0}, std::vector<double>{1.0},
                              std::vector<double>{0.0}),
                  ValidationError);
  NelderMeadOptions tiny;
  tiny.max_evals = 2;
  CHECK_THROWS_AS(nelder_mead(f, std::vector<double>{0.0}, std::vector<double>{-1.0},
                              std::vector<double>{1.0}, tiny),
                  ValidationError);
}

TEST_CASE("halton sequence and splitmix64 are the expected constants") {
  CHECK(halton_point(1, 1)[0] == 0.5);
  CHECK(halton_point(2, 1)[0] == 0.25);
  CHECK(halton_point(3, 1)[0] == 0.75);
  CHECK(halton_point(1, 2)[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(halton_point(3, 2)[1] == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
  CHECK_THROWS_AS(halton_point(0, 2), ValidationError);
  CHECK_THROWS_AS(halton_point(1, 0), ValidationError);
  CHECK_THROWS_AS(halton_point(1, 13), ValidationError);

  CHECK(splitmix64(0) == 0xE220A8397B1DCDAFULL);
}

TEST_CASE("fit recovers standard parameters from noiseless data") {
  FitProblem problem;
  problem.observed = {
      simulate(Model(StandardSsmParams(0.9, 0.05)), Protocol::ticvf(10.0, 60)),
      simulate(Model(StandardSsmParams(0.9, 0.05)), Protocol::ticvf(20.0, 60))};
  problem.kind = ModelKind::Standard;
  problem.free = {{"A", 0.05, 0.995}, {"B", 1e-4, 2.0}};

  const FitResult result = fit(problem, 8, 3);
  REQUIRE(result.best_params.size() == 2);
  CHECK(std::fabs(result.best_params[0] - 0.9) / 0.9 < 1e-3);
  CHECK(std::fabs(result.best_params[1] - 0.05) / 0.05 < 1e-3);
  CHECK(result.objective < 1e-15);
  CHECK_FALSE(result.no_improvement);
  CHECK(result.warnings.empty());
}

TEST_CASE("starting at the truth converges immediately to objective zero") {
  FitProblem problem = coupled_problem({3.75, 15.0, 30.0});
  problem.explicit_starts = {{20.0, 0.2, 7.5}};
  const FitResult result = fit(problem, 1, 99);
  CHECK(result.objective == 0.0);
  CHECK(result.best_start_index == 0);
  CHECK(result.converged);
}

TEST_CASE("fit is deterministic and monotone in the number of starts") {
  const FitProblem problem = coupled_problem({3.75, 15.0});

  const FitResult a = fit(problem, 6, 11);
  const FitResult b = fit(problem, 6, 11);
  CHECK(a.objective == b.objective);
  CHECK(a.total_evaluations == b.total_evaluations);
  CHECK(a.best_start_index == b.best_start_index);
  REQUIRE(a.best_params.size() == b.best_params.size());
  for (size_t i = 0; i < a.best_params.size(); ++i) {
    CHECK(a.best_params[i] == b.best_params[i]);
  }

  const FitResult fewer = fit(problem, 3, 11);
  CHECK(a.objective <= fewer.objective);
  // the shared prefix of starts is evaluated identically
  for (int i = 0; i < 3; ++i) {
    CHECK(a.starts[i].objective == fewer.starts[i].objective);
  }
}

TEST_CASE("single clamped error size earns an identifiability warning") {
  const FitProblem problem = coupled_problem({15.0});
  const FitResult result = fit(problem, 8, 5);
  CHECK(result.objective < 1e-12);
  REQUIRE_FALSE(result.warnings.empty());
  CHECK(result.warnings.front().find("single clamped error size") !=
        std::string::npos);
  // k is pinned by the shared asymptote even though p_max and e_sat are not
  CHECK(std::fabs(result.best_params[0] - 20.0) / 20.0 < 0.01);
}

TEST_CASE("fit argument validation") {
  const FitProblem problem = coupled_problem({15.0});
  CHECK_THROWS_AS(fit(problem, 0, 1), ValidationError);
  CHECK_THROWS_AS(fit(problem, 4, 1, 99), ValidationError);
}

TEST_CASE("cross-model comparison separates the models on two error sizes") {
  const std::vector<Trajectory> data = coupled_data({15.0, 45.0}, 60);
  const ComparisonReport report = cross_model_comparison(data, 7);
  CHECK(report.distinct_error_sizes == 2);
  CHECK(report.notes.empty());
  CHECK(report.coupled_objective < 1e-12);
  CHECK(report.standard_objective > 1.0);
  CHECK(report.objective_ratio >= 100.0);
}

TEST_CASE("a single geometric curve cannot separate the models") {
  const std::vector<Trajectory> data = {
      simulate(Model(StandardSsmParams(0.9, 0.05)), Protocol::ticvf(10.0, 60))};
  ComparisonOptions options;
  options.starts = 24;
  const ComparisonReport report = cross_model_comparison(data, 19, options);
  CHECK(report.distinct_error_sizes == 1);
  REQUIRE_FALSE(report.notes.empty());
  CHECK(report.standard_objective < 1e-12);
  CHECK(report.coupled_objective < 1e-8);  // mimics the curve via k, P(10)
}

TEST_CASE("cross-model comparison rejects empty data") {
  CHECK_THROWS_AS(cross_model_comparison(std::vector<Trajectory>{}, 1),
                  ValidationError);
}
