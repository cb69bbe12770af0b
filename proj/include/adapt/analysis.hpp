#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "adapt/simulate.hpp"

namespace adapt {

// Diagnostic features of one trajectory: where it saturates and how fast
// it starts. The initial slope is the first step x1 - x0, taken verbatim
// rather than fit from an exponential.
struct FeatureReport {
  double asymptote = 0.0;      // final x; meaningful when converged
  double initial_slope = 0.0;  // x1 - x0, degrees per trial
  bool converged = false;      // last recorded step smaller than conv_tol
};

// Requires at least two records. Non-convergence is reported in the flag,
// not as a failure.
FeatureReport extract_features(const Trajectory& traj, double conv_tol = 1e-9);

struct FeatureCheck {
  bool assessed = false;  // enough error sizes on the relevant side of e_sat
  bool violated = false;  // the model contradicts this clamped-feedback feature
  std::string note;
};

struct FalsificationEntry {
  double error = 0.0;
  double asymptote_closed_form = 0.0;  // B e / (1 - A)
  double asymptote_empirical = 0.0;    // iterated to convergence
  double initial_slope = 0.0;          // B e, one step from x0 = 0
};

// How the standard state-space model behaves under clamped errors, checked
// against the three features of clamped-feedback adaptation:
//   1. saturation level independent of error size
//   2. initial slope error-dependent below e_sat
//   3. initial slope error-independent at and above e_sat
struct FalsificationReport {
  std::vector<FalsificationEntry> entries;
  FeatureCheck feature1_constant_asymptote;
  FeatureCheck feature2_slope_scales_below_sat;
  FeatureCheck feature3_constant_slope_above_sat;
  double e_sat = 7.5;
  // Evidence that asymptotes and slopes scale with the error, relative to
  // the first size: max |asym_i/asym_0 - e_i/e_0| and the slope analogue.
  double max_asymptote_ratio_deviation = 0.0;
  double max_slope_ratio_deviation = 0.0;
};

// Requires >= 2 distinct, strictly positive error sizes.
FalsificationReport falsification_report(const StandardSsmParams& params,
                                         std::span<const double> error_sizes,
                                         double e_sat = 7.5);

struct SweepOptions {
  double conv_tol = 1e-9;
  int n_max = 10000;
};

struct SweepRow {
  double error = 0.0;
  FeatureReport features;
};

// Clamped-error feature table for the coupled model, one row per size.
// Sizes must be strictly positive.
std::vector<SweepRow> feature_sweep(const CoupledModelParams& model,
                                    std::span<const double> error_sizes,
                                    const SweepOptions& options = {});

// General one-back linear family X' = f(E) X + g(E), tabulated on an error
// grid, tested against the reference asymptote k_ref.
struct GeneralLinearFamily {
  std::vector<double> errors;
  std::vector<double> f;  // state multiplier per grid error
  std::vector<double> g;  // additive drive per grid error, degrees
  double k_ref = 0.0;

  // f = 1 - P(E), g = P(E) * k_ref: the family the coupled model induces.
  static GeneralLinearFamily from_rate(const RateFunction& rate, double k_ref,
                                       std::span<const double> grid);
  static GeneralLinearFamily tabulate(const std::function<double(double)>& f_of_e,
                                      const std::function<double(double)>& g_of_e,
                                      std::span<const double> grid, double k_ref);

  // Grids non-empty, equal length, finite, k_ref nonzero. The range of f
  // is deliberately not checked here; verify_uniqueness diagnoses
  // non-contractive points itself.
  void validate() const;
};

struct UniquenessPoint {
  double e = 0.0;
  double f = 0.0;
  double g = 0.0;
  double residual = 0.0;             // |f - (1 - g / k_ref)|
  double empirical_asymptote = 0.0;  // x <- f x + g iterated from x0
  bool iteration_converged = false;
  bool asymptote_matches = false;    // |asymptote - k_ref| <= tol |k_ref|
  bool relation_holds = false;       // residual <= tol
};

struct UniquenessVerdict {
  std::vector<UniquenessPoint> points;
  double max_residual = 0.0;
  double tol = 0.0;
  // A family passes when every grid point both reaches k_ref empirically
  // and satisfies f = 1 - g/k_ref.
  bool pass = false;
  // For contractive families (f < 1 everywhere) the two checks agree
  // pointwise. The degenerate f = 1, g = 0 point satisfies the relation
  // trivially but never moves off x0, the one disagreement possible.
  bool checks_agree_everywhere = false;
  std::vector<int> violations;  // indices failing either check
};

struct UniquenessOptions {
  double x0 = 0.0;
  int n_max = 500000;
};

// For each grid error, iterates the family to convergence and tests the
// empirical asymptote against k_ref and f against 1 - g/k_ref, both at the
// given tolerance (relative for the asymptote, absolute on f).
// Throws NumericError if some f(E) >= 1 with g(E) inconsistent with a fixed
// point at k_ref, since the iteration then has no fixed point at all.
UniquenessVerdict verify_uniqueness(const GeneralLinearFamily& family,
                                    double tol = 1e-9,
                                    const UniquenessOptions& options = {});

}  // namespace adapt
