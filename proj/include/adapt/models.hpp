#pragma once

#include <string>
#include <variant>

#include "adapt/errors.hpp"

namespace adapt {

// Hand/cursor state on a given trial. x is in degrees.
struct TrialState {
  int n = 0;
  double x = 0.0;
};

// Signed trial error, degrees.
struct ErrorSignal {
  double e = 0.0;
};

// Error-magnitude-dependent learning rate P(E).
//
// Both variants satisfy P(0) = 0 exactly, P even in E, non-decreasing in
// |E|, and 0 <= P(E) <= p_max < 1, so the retention factor 1 - P(E) stays
// in (0, 1].
class RateFunction {
 public:
  enum class Kind { PiecewiseLinearRamp, ShiftedSigmoid };

  // P(E) = p_max * |E| / e_sat below e_sat, p_max at and above it.
  // Saturation is exact: every |E| >= e_sat yields the same rate.
  static RateFunction ramp(double p_max = 0.2, double e_sat = 7.5);

  // Smooth alternative: a / (b + exp(-c|E|)), shifted so P(0) = 0 and
  // rescaled so the supremum is p_max. Saturation is asymptotic, never
  // attained. The shape parameter a cancels after rescaling but is kept
  // as part of the parameterization.
  static RateFunction shifted_sigmoid(double a, double b, double c,
                                      double p_max = 0.2);

  // P(|error|). Assumes a finite argument.
  double operator()(double error) const noexcept;

  Kind kind() const noexcept { return kind_; }
  bool is_ramp() const noexcept { return kind_ == Kind::PiecewiseLinearRamp; }
  double p_max() const noexcept { return p_max_; }

  double saturation_error() const;  // ramp only
  double sigmoid_a() const;         // sigmoid only
  double sigmoid_b() const;
  double sigmoid_c() const;

 private:
  RateFunction() = default;

  Kind kind_ = Kind::PiecewiseLinearRamp;
  double p_max_ = 0.2;
  double e_sat_ = 7.5;                    // ramp
  double a_ = 0.0, b_ = 0.0, c_ = 0.0;    // sigmoid
  double scale_ = 0.0;                    // sigmoid: p_max / sup of raw shape
};

// Linear state-space model X' = A X + B E with error-independent
// retention A and error gain B.
struct StandardSsmParams {
  double retention;   // A, in (0, 1)
  double error_gain;  // B, > 0

  StandardSsmParams(double retention, double error_gain);
};

// Coupled learning/forgetting model X' = (1 - P(E)) X + P(E) K where the
// drive target K = sign(E) * k. Learning and forgetting share the same
// error-dependent rate.
struct CoupledModelParams {
  double k;  // magnitude of the drive target, degrees, > 0
  RateFunction rate;

  CoupledModelParams(double k, RateFunction rate);
};

using Model = std::variant<StandardSsmParams, CoupledModelParams>;

// P(|e|), in [0, 1). Validates e is finite.
double learning_rate(const RateFunction& rate, ErrorSignal e);

// +k, -k, or 0 by the sign of e. The zero test is exact, no epsilon band.
double drive_target(const CoupledModelParams& params, ErrorSignal e);

TrialState step_standard(const StandardSsmParams& params, TrialState s,
                         ErrorSignal e);

// When e = 0 the state is returned unchanged (P(0) = 0).
TrialState step_coupled(const CoupledModelParams& params, TrialState s,
                        ErrorSignal e);

// Fixed point of the standard map under a clamped error: B e / (1 - A).
double fixed_point_standard(const StandardSsmParams& params,
                            ErrorSignal e_clamped);

// Fixed point of the coupled map under a clamped nonzero error: +k or -k.
// Throws ValidationError for e = 0, where every state is fixed.
double fixed_point_coupled(const CoupledModelParams& params,
                           ErrorSignal e_clamped);

// One minus the retention factor applied on a trial with error e:
// P(e) for the coupled model, 1 - A for the standard model.
double applied_rate(const Model& model, ErrorSignal e);

// "standard", "coupled-ramp", or "coupled-sigmoid".
std::string model_kind_name(const Model& model);

}  // namespace adapt
