// Acceptance gate. Runs every headline property of the library and the CLI
// at its stated tolerance and prints one PASS/FAIL line per criterion.
// Exits nonzero if any criterion fails. Kept free of any test framework so
// the output is exactly eight lines plus a summary.

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "adapt/analysis.hpp"
#include "adapt/config.hpp"
#include "adapt/fitting.hpp"
#include "adapt/io.hpp"
#include "adapt/models.hpp"
#include "adapt/simulate.hpp"

using namespace adapt;
namespace fs = std::filesystem;

namespace {

std::string fmt(const char* format, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, format, a, b);
  return buf;
}

CoupledModelParams reference_coupled() {
  return CoupledModelParams(20.0, RateFunction::ramp(0.2, 7.5));
}

// Criterion 1: under clamped errors of any size the coupled model settles
// at k itself, not at something proportional to the error.
bool asymptote_invariance(std::string& detail) {
  const CoupledModelParams model = reference_coupled();
  const std::vector<double> sizes = {1.875, 3.75, 7.5, 15.0, 30.0, 45.0};
  double worst = 0.0;
  double lo = HUGE_VAL, hi = -HUGE_VAL;
  for (double e : sizes) {
    const Trajectory traj =
        simulate_until_converged(model, Protocol::ticvf(e, 1), 1e-9);
    if (!traj.converged()) {
      detail = fmt("no convergence at e = %g", e);
      return false;
    }
    const double asym = traj.records.back().x;
    worst = std::max(worst, std::abs(asym - 20.0));
    lo = std::min(lo, asym);
    hi = std::max(hi, asym);
  }
  detail = fmt("max |asymptote - k| = %.3g, spread = %.3g", worst, hi - lo);
  return worst < 1e-6 && (hi - lo) < 1e-6;
}

// Criterion 2: the standard model's asymptote doubles when the clamped
// error doubles, empirically and against the closed form B e / (1 - A).
bool proportional_asymptote(std::string& detail) {
  const std::vector<double> errors = {10.0, 20.0};
  const FalsificationReport report =
      falsification_report(StandardSsmParams(0.9, 0.05), errors);
  const double ratio =
      report.entries[1].asymptote_empirical / report.entries[0].asymptote_empirical;
  double closed_gap = 0.0;
  for (const auto& entry : report.entries) {
    closed_gap = std::max(closed_gap, std::abs(entry.asymptote_empirical -
                                               entry.asymptote_closed_form));
  }
  detail = fmt("|ratio - 2| = %.3g, max |empirical - closed| = %.3g",
               std::abs(ratio - 2.0), closed_gap);
  return std::abs(ratio - 2.0) < 1e-9 && closed_gap < 1e-9;
}

// Criterion 3: one-step slopes are bit-identical across saturated errors
// and in exact 1:2:4 ratios at {1.875, 3.75, 7.5} with the ramp rate.
bool slope_regimes(std::string& detail) {
  const CoupledModelParams model = reference_coupled();
  const auto slope = [&](double e) {
    const Trajectory traj = simulate(model, Protocol::ticvf(e, 1));
    return traj.records[1].x - traj.records[0].x;
  };
  const double s_sat = slope(7.5);
  const bool saturated_identical =
      slope(15.0) == s_sat && slope(30.0) == s_sat && slope(45.0) == s_sat;
  const double s1 = slope(1.875);
  const bool exact_ratios = slope(3.75) == 2.0 * s1 && s_sat == 4.0 * s1;
  detail = fmt("slopes %.3g / %.3g at 1.875 / 7.5 deg", s1, s_sat);
  if (!saturated_identical) detail += ", saturated slopes differ";
  if (!exact_ratios) detail += ", sub-saturation ratios inexact";
  return saturated_identical && exact_ratios;
}

// Criterion 4: with both probes above saturation the standard model's
// slopes stay proportional to the error (ratio 3 across 15 and 45 deg),
// which contradicts saturation; the report must flag exactly features
// 1 and 3.
bool slope_falsification(std::string& detail) {
  const std::vector<double> errors = {15.0, 45.0};
  const FalsificationReport report =
      falsification_report(StandardSsmParams(0.9, 0.05), errors);
  const double ratio =
      report.entries[1].initial_slope / report.entries[0].initial_slope;
  const bool flags_right =
      report.feature1_constant_asymptote.violated &&
      report.feature3_constant_slope_above_sat.violated &&
      !(report.feature2_slope_scales_below_sat.assessed &&
        report.feature2_slope_scales_below_sat.violated);
  detail = fmt("|slope ratio - 3| = %.3g", std::abs(ratio - 3.0));
  detail += flags_right ? ", features 1 and 3 flagged" : ", wrong features flagged";
  return std::abs(ratio - 3.0) < 1e-12 && flags_right;
}

// Criterion 5: closed-loop VMR drives the error monotonically to zero, and
// in the clamped saturated regime the distance to k contracts by exactly
// 1 - p_max each trial.
bool vmr_and_contraction(std::string& detail) {
  const CoupledModelParams model = reference_coupled();
  const Trajectory vmr =
      simulate_until_converged(model, Protocol::vmr(10.0, 1), 1e-9);
  bool strictly_decreasing = true;
  for (size_t i = 1; i < vmr.records.size(); ++i) {
    if (!(std::abs(vmr.records[i].e) < std::abs(vmr.records[i - 1].e))) {
      strictly_decreasing = false;
      break;
    }
  }
  const double final_error = std::abs(vmr.records.back().e);

  const Trajectory clamped = simulate(model, Protocol::ticvf(15.0, 100));
  double gap_ref = 20.0;  // |x0 - K|
  double worst = 0.0;
  for (const auto& record : clamped.records) {
    worst = std::max(worst, std::abs(std::abs(record.x - 20.0) - gap_ref));
    gap_ref *= 0.8;
  }
  detail = fmt("final VMR |error| = %.3g, contraction deviation = %.3g",
               final_error, worst);
  if (!strictly_decreasing) detail += ", error not strictly decreasing";
  return vmr.converged() && final_error < 1e-6 && strictly_decreasing &&
         worst <= 1e-12;
}

// Criterion 6: families built from a rate function satisfy f = 1 - g/k
// essentially exactly, and every perturbed family fails with the violated
// grid point identified.
bool uniqueness_theorem(std::string& detail) {
  std::vector<double> grid(50);
  for (size_t i = 0; i < grid.size(); ++i) {
    grid[i] = 0.9 + static_cast<double>(i) * (45.0 - 0.9) / 49.0;
  }
  const GeneralLinearFamily compliant =
      GeneralLinearFamily::from_rate(RateFunction::ramp(0.2, 7.5), 20.0, grid);
  const UniquenessVerdict clean = verify_uniqueness(compliant, 1e-9);
  const bool clean_ok = clean.pass && clean.max_residual < 1e-12;

  std::mt19937_64 rng(20260825);
  std::uniform_real_distribution<double> exponent(-8.0, -6.0);
  std::uniform_int_distribution<int> index(0, static_cast<int>(grid.size()) - 1);
  std::bernoulli_distribution flip(0.5);
  int localized = 0;
  for (int trial = 0; trial < 100; ++trial) {
    GeneralLinearFamily perturbed = compliant;
    const int at = index(rng);
    double delta = std::pow(10.0, exponent(rng));
    if (flip(rng)) delta = -delta;
    perturbed.f[at] += delta;
    const UniquenessVerdict verdict = verify_uniqueness(perturbed, 1e-9);
    bool found = false;
    for (int v : verdict.violations) found = found || v == at;
    if (!verdict.pass && found) ++localized;
  }
  detail = fmt("compliant max residual = %.3g", clean.max_residual);
  detail += fmt(", %.0f/100 perturbed families localized",
                static_cast<double>(localized));
  return clean_ok && localized == 100;
}

// Criterion 7: noiseless three-size data returns the generating parameters
// for at least 95 of 100 fit seeds, and on two-size data the standard model
// cannot approach the coupled model's fit quality.
bool fitting_round_trip(std::string& detail) {
  const CoupledModelParams truth = reference_coupled();
  FitProblem problem;
  problem.kind = ModelKind::CoupledRamp;
  problem.free = {{"k", 0.5, 100.0}, {"p_max", 0.005, 0.95}, {"e_sat", 0.5, 30.0}};
  problem.observed = {simulate(truth, Protocol::ticvf(3.75, 60)),
                      simulate(truth, Protocol::ticvf(15.0, 60)),
                      simulate(truth, Protocol::ticvf(30.0, 60))};
  const double target[3] = {20.0, 0.2, 7.5};
  int hits = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const FitResult result = fit(problem, 16, seed);
    bool ok = !result.no_improvement;
    for (int i = 0; i < 3 && ok; ++i) {
      ok = std::abs(result.best_params[i] - target[i]) <= 0.01 * target[i];
    }
    if (ok) ++hits;
  }

  const std::vector<Trajectory> data = {simulate(truth, Protocol::ticvf(15.0, 60)),
                                        simulate(truth, Protocol::ticvf(45.0, 60))};
  const ComparisonReport comparison = cross_model_comparison(data, 2026);
  const bool separation = comparison.coupled_objective < 1e-12 &&
                          comparison.objective_ratio >= 100.0;
  detail = fmt("%.0f/100 seeds within 1%%", static_cast<double>(hits));
  detail += fmt(", coupled objective = %.3g, objective ratio = %.3g",
                comparison.coupled_objective, comparison.objective_ratio);
  return hits >= 95 && separation;
}

struct CliHarness {
  fs::path dir;
  std::string exe;
  bool ready = false;

  CliHarness() {
    const char* env = std::getenv("ADAPT_CLI");
    if (env == nullptr) return;
    exe = env;
    dir = fs::temp_directory_path() /
          ("adapt-acceptance-" + std::to_string(::getpid()));
    fs::create_directories(dir);
    ready = true;
  }
  ~CliHarness() {
    if (ready) {
      std::error_code ec;
      fs::remove_all(dir, ec);
    }
  }

  int run(const std::string& args) const {
    const std::string command = "\"" + exe + "\" " + args + " > \"" +
                                (dir / "stdout.txt").string() + "\" 2> \"" +
                                (dir / "stderr.txt").string() + "\"";
    const int status = std::system(command.c_str());
    if (status == -1 || !WIFEXITED(status)) return -1;
    return WEXITSTATUS(status);
  }

  std::string path(const std::string& name) const { return (dir / name).string(); }
};

// Criterion 8: every subcommand is bit-reproducible and the exit codes
// follow the 0/2/3/4 contract.
bool cli_determinism(std::string& detail) {
  const CliHarness cli;
  if (!cli.ready) {
    detail = "ADAPT_CLI not set";
    return false;
  }

  // Fixture inputs: a compliant family, a perturbed family, and a small
  // fit problem with its observed trajectories.
  const std::vector<double> grid = {1.0, 4.0, 9.0, 20.0, 45.0};
  GeneralLinearFamily family =
      GeneralLinearFamily::from_rate(RateFunction::ramp(0.2, 7.5), 20.0, grid);
  atomic_write_file(cli.path("family.csv"), family_to_csv(family));
  family.f[1] += 1e-6;
  atomic_write_file(cli.path("perturbed.csv"), family_to_csv(family));

  const CoupledModelParams truth = reference_coupled();
  atomic_write_file(cli.path("t15.csv"),
                    trajectory_to_csv(simulate(truth, Protocol::ticvf(15.0, 30))));
  atomic_write_file(cli.path("problem.json"), std::string(R"({
    "model": {"kind": "coupled-ramp"},
    "free": [
      {"name": "k", "lower": 0.5, "upper": 100.0},
      {"name": "p_max", "lower": 0.005, "upper": 0.95}
    ],
    "fixed": {"e_sat": 7.5},
    "observed": [{"csv": "t15.csv", "protocol": {"kind": "ticvf", "e_clamp": 15.0}}],
    "options": {"max_evals": 400}
  })"));

  const std::vector<std::string> commands = {
      "simulate",
      "sweep --errors 1.875,3.75,7.5,15",
      "falsify --errors 10,20",
      "uniqueness --family \"" + cli.path("family.csv") + "\"",
      "fit --problem \"" + cli.path("problem.json") + "\" --starts 4 --seed 7",
  };
  int deterministic = 0;
  for (size_t i = 0; i < commands.size(); ++i) {
    const std::string out_a = cli.path("out_" + std::to_string(i) + "_a");
    const std::string out_b = cli.path("out_" + std::to_string(i) + "_b");
    const int rc_a = cli.run(commands[i] + " --out \"" + out_a + "\"");
    const int rc_b = cli.run(commands[i] + " --out \"" + out_b + "\"");
    if (rc_a == 0 && rc_b == 0 && read_file(out_a) == read_file(out_b)) {
      ++deterministic;
    }
  }

  const int code_ok = cli.run("simulate");
  const int code_validation = cli.run("falsify --errors 10");
  const int code_numeric =
      cli.run("simulate --set model.kind=standard --set model.B=1e12");
  const int code_uniqueness =
      cli.run("uniqueness --family \"" + cli.path("perturbed.csv") + "\"");
  const bool codes_ok = code_ok == 0 && code_validation == 2 &&
                        code_numeric == 3 && code_uniqueness == 4;

  detail = fmt("%.0f/5 subcommands byte-identical", static_cast<double>(deterministic));
  char codes[64];
  std::snprintf(codes, sizeof codes, ", exit codes %d/%d/%d/%d", code_ok,
                code_validation, code_numeric, code_uniqueness);
  detail += codes;
  return deterministic == 5 && codes_ok;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    bool (*check)(std::string&);
  };
  const std::vector<Criterion> criteria = {
      {"coupled asymptote equals k for every clamp size", asymptote_invariance},
      {"standard asymptote proportional to error", proportional_asymptote},
      {"slope regimes: saturated identical, ratios 1:2:4 below", slope_regimes},
      {"standard slopes stay proportional; features 1 and 3 flagged",
       slope_falsification},
      {"VMR converges; clamped contraction is geometric", vmr_and_contraction},
      {"uniqueness: compliant passes, perturbations localized", uniqueness_theorem},
      {"fit round trip across seeds; model separation", fitting_round_trip},
      {"CLI byte-reproducible; exit codes 0/2/3/4", cli_determinism},
  };

  int failures = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    bool ok = false;
    std::string detail;
    try {
      ok = criteria[i].check(detail);
    } catch (const std::exception& e) {
      ok = false;
      detail = std::string("exception: ") + e.what();
    }
    if (!ok) ++failures;
    std::printf("%s  criterion %zu: %s (%s)\n", ok ? "PASS" : "FAIL", i + 1,
                criteria[i].name, detail.c_str());
  }
  if (failures > 0) {
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return 1;
  }
  std::printf("all %zu criteria passed\n", criteria.size());
  return 0;
}
