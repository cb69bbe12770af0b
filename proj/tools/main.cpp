#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "adapt/analysis.hpp"
#include "adapt/config.hpp"
#include "adapt/errors.hpp"
#include "adapt/fitting.hpp"
#include "adapt/io.hpp"
#include "adapt/simulate.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_path;
  std::string format = "csv";
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_format) {
  cmd->add_option("--config", opts.config_path, "JSON config file");
  cmd->add_option("--set", opts.overrides,
                  "override a config value, e.g. --set model.k=25");
  cmd->add_option("--out", opts.out_path, "write the result here instead of stdout");
  if (with_format) {
    cmd->add_option("--format", opts.format, "output format")
        ->check(CLI::IsMember({"csv", "kv-tree"}))
        ->capture_default_str();
  }
}

adapt::RunConfig load_config(const CommonOpts& opts) {
  if (opts.config_path.empty()) {
    return adapt::parse_run_config("{}", opts.overrides, "config");
  }
  return adapt::load_run_config(opts.config_path, opts.overrides);
}

// Stdout carries either the document (no --out) or a short summary.
void emit(const std::string& document, const CommonOpts& opts,
          const std::string& summary) {
  if (opts.out_path.empty()) {
    std::cout << document;
    return;
  }
  adapt::atomic_write_file(opts.out_path, document);
  std::cout << "wrote " << opts.out_path << "\n";
  if (!summary.empty()) std::cout << summary;
}

int run_simulate(const CommonOpts& opts) {
  const adapt::RunConfig config = load_config(opts);
  const adapt::Trajectory traj = adapt::simulate(config.model, config.protocol);
  const adapt::FeatureReport features =
      adapt::extract_features(traj, config.analysis.conv_tol);

  const std::string document = opts.format == "csv" ? adapt::trajectory_to_csv(traj)
                                                    : adapt::trajectory_to_kv(traj);
  std::string summary = "asymptote: " + adapt::format_double(features.asymptote) +
                        "\ninitial_slope: " +
                        adapt::format_double(features.initial_slope) +
                        "\nconverged: " + (features.converged ? "true" : "false") +
                        "\n";
  emit(document, opts, summary);
  return 0;
}

int run_sweep(const CommonOpts& opts, const std::vector<double>& errors) {
  const adapt::RunConfig config = load_config(opts);
  const auto* coupled = std::get_if<adapt::CoupledModelParams>(&config.model);
  if (coupled == nullptr) {
    throw adapt::ValidationError("sweep needs a coupled model; config specifies " +
                                 adapt::model_kind_name(config.model));
  }
  adapt::SweepOptions sweep_options;
  sweep_options.conv_tol = config.analysis.conv_tol;
  sweep_options.n_max = config.analysis.n_max;
  const std::vector<adapt::SweepRow> rows =
      adapt::feature_sweep(*coupled, errors, sweep_options);

  const std::string document =
      opts.format == "csv" ? adapt::sweep_to_csv(rows) : adapt::sweep_to_kv(rows);
  emit(document, opts, "rows: " + std::to_string(rows.size()) + "\n");
  return 0;
}

int run_falsify(const CommonOpts& opts, const std::vector<double>& errors,
                double e_sat) {
  const adapt::RunConfig config = load_config(opts);
  const adapt::StandardSsmParams params = adapt::standard_params_from_config(config);
  const adapt::FalsificationReport report =
      adapt::falsification_report(params, errors, e_sat);

  const bool falsified = (report.feature1_constant_asymptote.assessed &&
                          report.feature1_constant_asymptote.violated) ||
                         (report.feature2_slope_scales_below_sat.assessed &&
                          report.feature2_slope_scales_below_sat.violated) ||
                         (report.feature3_constant_slope_above_sat.assessed &&
                          report.feature3_constant_slope_above_sat.violated);
  emit(adapt::falsification_to_kv(report), opts,
       std::string("falsified: ") + (falsified ? "true" : "false") + "\n");
  return 0;
}

int run_uniqueness(const std::string& family_path, double tol, double x0,
                   const std::string& out_path) {
  const adapt::GeneralLinearFamily family = adapt::load_family_csv(family_path);
  adapt::UniquenessOptions options;
  options.x0 = x0;
  const adapt::UniquenessVerdict verdict = adapt::verify_uniqueness(family, tol, options);

  if (!out_path.empty()) {
    adapt::atomic_write_file(out_path, adapt::uniqueness_points_to_csv(verdict));
    std::cout << "wrote " << out_path << "\n";
  }
  std::cout << "pass: " << (verdict.pass ? "true" : "false") << "\n"
            << "max_residual: " << adapt::format_double(verdict.max_residual) << "\n"
            << "points: " << verdict.points.size() << "\n"
            << "violations: " << verdict.violations.size() << "\n";
  return verdict.pass ? 0 : 4;
}

int run_fit(const std::string& problem_path, int starts, std::uint64_t seed,
            int max_evals_override, const std::string& out_path) {
  adapt::FitSpec spec = adapt::load_fit_problem(problem_path);
  const int max_evals =
      max_evals_override > 0 ? max_evals_override : spec.max_evals_per_start;
  const adapt::FitResult result = adapt::fit(spec.problem, starts, seed, max_evals);
  const std::string document =
      adapt::fit_result_to_kv(result, spec.problem, seed, starts);

  if (out_path.empty()) {
    std::cout << document;
  } else {
    adapt::atomic_write_file(out_path, document);
    std::cout << "wrote " << out_path << "\n"
              << "objective: " << adapt::format_double(result.objective) << "\n";
  }
  if (result.no_improvement) {
    std::cerr << "error: every start diverged; no usable fit\n";
    return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trial-by-trial motor adaptation: simulate, analyze and fit "
               "error-clamp learning models"};
  app.require_subcommand(1);

  CommonOpts simulate_opts;
  CLI::App* simulate_cmd =
      app.add_subcommand("simulate", "run one protocol and emit the trajectory");
  add_common(simulate_cmd, simulate_opts, true);

  CommonOpts sweep_opts;
  std::vector<double> sweep_errors;
  CLI::App* sweep_cmd = app.add_subcommand(
      "sweep", "clamped-error feature table for a coupled model");
  add_common(sweep_cmd, sweep_opts, true);
  sweep_cmd->add_option("--errors", sweep_errors, "clamp sizes, comma separated")
      ->required()
      ->delimiter(',');

  CommonOpts falsify_opts;
  std::vector<double> falsify_errors;
  double falsify_e_sat = 7.5;
  CLI::App* falsify_cmd = app.add_subcommand(
      "falsify", "check the standard model against clamped-feedback features");
  add_common(falsify_cmd, falsify_opts, false);
  falsify_cmd->add_option("--errors", falsify_errors,
                          "clamp sizes, comma separated, at least two")
      ->required()
      ->delimiter(',');
  falsify_cmd->add_option("--e-sat", falsify_e_sat, "saturation error, degrees")
      ->capture_default_str();

  std::string family_path;
  double uniq_tol = 1e-9;
  double uniq_x0 = 0.0;
  std::string uniq_out;
  CLI::App* uniq_cmd = app.add_subcommand(
      "uniqueness", "verify a general linear family against the reference asymptote");
  uniq_cmd->add_option("--family", family_path, "family CSV (k_ref line, then e,f,g)")
      ->required();
  uniq_cmd->add_option("--tol", uniq_tol, "residual tolerance")->capture_default_str();
  uniq_cmd->add_option("--x0", uniq_x0, "iteration start state")->capture_default_str();
  uniq_cmd->add_option("--out", uniq_out, "write the per-point residual CSV here");

  std::string problem_path;
  int fit_starts = 16;
  std::uint64_t fit_seed = 42;
  int fit_max_evals = 0;
  std::string fit_out;
  CLI::App* fit_cmd =
      app.add_subcommand("fit", "recover model parameters from trajectory CSVs");
  fit_cmd->add_option("--problem", problem_path, "fit problem JSON")->required();
  fit_cmd->add_option("--starts", fit_starts, "number of start points")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  fit_cmd->add_option("--seed", fit_seed, "start sequence seed")->capture_default_str();
  fit_cmd->add_option("--max-evals", fit_max_evals,
                      "objective evaluations per start (overrides the problem file)");
  fit_cmd->add_option("--out", fit_out, "write the fit report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(simulate_cmd)) return run_simulate(simulate_opts);
    if (app.got_subcommand(sweep_cmd)) return run_sweep(sweep_opts, sweep_errors);
    if (app.got_subcommand(falsify_cmd)) {
      return run_falsify(falsify_opts, falsify_errors, falsify_e_sat);
    }
    if (app.got_subcommand(uniq_cmd)) {
      return run_uniqueness(family_path, uniq_tol, uniq_x0, uniq_out);
    }
    if (app.got_subcommand(fit_cmd)) {
      return run_fit(problem_path, fit_starts, fit_seed, fit_max_evals, fit_out);
    }
  } catch (const adapt::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const adapt::NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
