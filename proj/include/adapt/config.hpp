#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "adapt/fitting.hpp"
#include "adapt/models.hpp"
#include "adapt/protocol.hpp"

namespace adapt {

struct AnalysisOptions {
  double conv_tol = 1e-9;      // step-size convergence tolerance, degrees
  int n_max = 10000;           // trial cap for run-to-convergence
  double asymptote_tol = 1e-6; // asymptote equality tolerance, degrees
};

struct RunConfig {
  Model model;
  Protocol protocol;
  AnalysisOptions analysis;
  bool model_specified = false;  // whether the config carried a model section

  RunConfig();  // coupled-ramp defaults, clamped 15 degree error, 100 trials
};

StandardSsmParams default_standard_params();  // A = 0.9, B = 0.05

// Strict JSON configuration. Unknown keys are errors, as are values that
// violate the domain invariants; diagnostics name the offending field.
// Overrides are "dotted.path=value" assignments applied before validation.
RunConfig parse_run_config(const std::string& json_text,
                           std::span<const std::string> overrides = {},
                           const std::string& origin = "config");
RunConfig load_run_config(const std::filesystem::path& path,
                          std::span<const std::string> overrides = {});

// The falsification workflow needs standard-model parameters specifically.
// A config with a coupled model kind is rejected; an absent model section
// falls back to the defaults.
StandardSsmParams standard_params_from_config(const RunConfig& config);

struct FitSpec {
  FitProblem problem;
  int max_evals_per_start = 2000;
};

// Fit problem file: model kind, free parameters with bounds, fixed
// parameters, and observed trajectory CSVs with their protocols. CSV paths
// resolve relative to the problem file.
FitSpec load_fit_problem(const std::filesystem::path& path);
FitSpec parse_fit_problem(const std::string& json_text,
                          const std::filesystem::path& base_dir,
                          const std::string& origin = "problem");

}  // namespace adapt
