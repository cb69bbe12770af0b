#include "adapt/models.hpp"

#include <cmath>
#include <string>

namespace adapt {

namespace {

void require_finite(double value, const char* what) {
  if (!std::isfinite(value)) {
    throw ValidationError(std::string(what) + " must be finite");
  }
}

}  // namespace

RateFunction RateFunction::ramp(double p_max, double e_sat) {
  if (!std::isfinite(p_max) || p_max <= 0.0 || p_max >= 1.0) {
    throw ValidationError("invalid rate parameters: p_max must satisfy 0 < p_max < 1");
  }
  if (!std::isfinite(e_sat) || e_sat <= 0.0) {
    throw ValidationError("invalid rate parameters: e_sat must be positive");
  }
  RateFunction r;
  r.kind_ = Kind::PiecewiseLinearRamp;
  r.p_max_ = p_max;
  r.e_sat_ = e_sat;
  return r;
}

RateFunction RateFunction::shifted_sigmoid(double a, double b, double c,
                                           double p_max) {
  if (!std::isfinite(a) || a <= 0.0) {
    throw ValidationError("invalid rate parameters: sigmoid a must be positive");
  }
  if (!std::isfinite(b) || b <= 0.0) {
    throw ValidationError("invalid rate parameters: sigmoid b must be positive");
  }
  if (!std::isfinite(c) || c <= 0.0) {
    throw ValidationError("invalid rate parameters: sigmoid c must be positive");
  }
  if (!std::isfinite(p_max) || p_max <= 0.0 || p_max >= 1.0) {
    throw ValidationError(
        "invalid rate parameters: p_max must satisfy 0 < p_max < 1 (sup P >= 1 otherwise)");
  }
  RateFunction r;
  r.kind_ = Kind::ShiftedSigmoid;
  r.p_max_ = p_max;
  r.a_ = a;
  r.b_ = b;
  r.c_ = c;
  // Supremum of the raw shifted shape a/(b+exp(-c|E|)) - a/(b+1) as |E|
  // grows: a/b - a/(b+1) = a / (b (b+1)).
  const double sup_raw = a / b - a / (b + 1.0);
  r.scale_ = p_max / sup_raw;
  return r;
}

double RateFunction::operator()(double error) const noexcept {
  const double m = std::fabs(error);
  if (kind_ == Kind::PiecewiseLinearRamp) {
    if (m >= e_sat_) return p_max_;
    return p_max_ * (m / e_sat_);
  }
  // exp(-c*0) is exactly 1, so the two terms cancel exactly at E = 0.
  const double raw = a_ / (b_ + std::exp(-c_ * m)) - a_ / (b_ + 1.0);
  const double p = scale_ * raw;
  return p < p_max_ ? p : p_max_;
}

double RateFunction::saturation_error() const {
  if (kind_ != Kind::PiecewiseLinearRamp) {
    throw ValidationError("saturation_error is a ramp parameter");
  }
  return e_sat_;
}

double RateFunction::sigmoid_a() const {
  if (kind_ != Kind::ShiftedSigmoid) throw ValidationError("a is a sigmoid parameter");
  return a_;
}

double RateFunction::sigmoid_b() const {
  if (kind_ != Kind::ShiftedSigmoid) throw ValidationError("b is a sigmoid parameter");
  return b_;
}

double RateFunction::sigmoid_c() const {
  if (kind_ != Kind::ShiftedSigmoid) throw ValidationError("c is a sigmoid parameter");
  return c_;
}

StandardSsmParams::StandardSsmParams(double retention, double error_gain)
    : retention(retention), error_gain(error_gain) {
  if (!std::isfinite(retention) || retention <= 0.0 || retention >= 1.0) {
    throw ValidationError("retention A must satisfy 0 < A < 1");
  }
  if (!std::isfinite(error_gain) || error_gain <= 0.0) {
    throw ValidationError("error gain B must be positive");
  }
}

CoupledModelParams::CoupledModelParams(double k, RateFunction rate)
    : k(k), rate(rate) {
  if (!std::isfinite(k) || k <= 0.0) {
    throw ValidationError("drive magnitude k must be positive");
  }
}

double learning_rate(const RateFunction& rate, ErrorSignal e) {
  require_finite(e.e, "error");
  return rate(e.e);
}

double drive_target(const CoupledModelParams& params, ErrorSignal e) {
  require_finite(e.e, "error");
  if (e.e > 0.0) return params.k;
  if (e.e < 0.0) return -params.k;
  return 0.0;
}

TrialState step_standard(const StandardSsmParams& params, TrialState s,
                         ErrorSignal e) {
  require_finite(s.x, "state");
  require_finite(e.e, "error");
  return TrialState{s.n + 1, params.retention * s.x + params.error_gain * e.e};
}

TrialState step_coupled(const CoupledModelParams& params, TrialState s,
                        ErrorSignal e) {
  require_finite(s.x, "state");
  const double p = learning_rate(params.rate, e);
  const double target = drive_target(params, e);
  return TrialState{s.n + 1, (1.0 - p) * s.x + p * target};
}

double fixed_point_standard(const StandardSsmParams& params,
                            ErrorSignal e_clamped) {
  require_finite(e_clamped.e, "error");
  return params.error_gain * e_clamped.e / (1.0 - params.retention);
}

double fixed_point_coupled(const CoupledModelParams& params,
                           ErrorSignal e_clamped) {
  require_finite(e_clamped.e, "error");
  if (e_clamped.e == 0.0) {
    throw ValidationError(
        "undefined fixed point: every state is fixed when the clamped error is zero");
  }
  return e_clamped.e > 0.0 ? params.k : -params.k;
}

double applied_rate(const Model& model, ErrorSignal e) {
  if (const auto* standard = std::get_if<StandardSsmParams>(&model)) {
    return 1.0 - standard->retention;
  }
  return learning_rate(std::get<CoupledModelParams>(model).rate, e);
}

std::string model_kind_name(const Model& model) {
  if (std::holds_alternative<StandardSsmParams>(model)) return "standard";
  const auto& coupled = std::get<CoupledModelParams>(model);
  return coupled.rate.is_ramp() ? "coupled-ramp" : "coupled-sigmoid";
}

}  // namespace adapt
