#include "adapt/simulate.hpp"

#include <cmath>
#include <string>

namespace adapt {

Protocol Protocol::ticvf(double e_clamp, int n_trials, double x0) {
  Protocol p{ProtocolKind::Ticvf, e_clamp, n_trials, x0};
  p.validate();
  return p;
}

Protocol Protocol::vmr(double target, int n_trials, double x0) {
  Protocol p{ProtocolKind::Vmr, target, n_trials, x0};
  p.validate();
  return p;
}

Protocol Protocol::washout(int n_trials, double x0) {
  Protocol p{ProtocolKind::Washout, 0.0, n_trials, x0};
  p.validate();
  return p;
}

void Protocol::validate() const {
  if (n_trials < 1) throw ValidationError("n_trials must be >= 1");
  if (!std::isfinite(magnitude)) throw ValidationError("protocol magnitude must be finite");
  if (!std::isfinite(x0)) throw ValidationError("x0 must be finite");
}

ErrorSignal error_for_trial(const Protocol& protocol, const TrialState& s) {
  switch (protocol.kind) {
    case ProtocolKind::Ticvf:
      return ErrorSignal{protocol.magnitude};  // clamped, state-independent
    case ProtocolKind::Vmr:
      return ErrorSignal{protocol.magnitude - s.x};
    case ProtocolKind::Washout:
      return ErrorSignal{0.0};
  }
  throw ValidationError("unknown protocol kind");
}

std::string protocol_kind_name(ProtocolKind kind) {
  switch (kind) {
    case ProtocolKind::Ticvf: return "ticvf";
    case ProtocolKind::Vmr: return "vmr";
    case ProtocolKind::Washout: return "washout";
  }
  throw ValidationError("unknown protocol kind");
}

ProtocolKind protocol_kind_from_name(const std::string& name) {
  if (name == "ticvf") return ProtocolKind::Ticvf;
  if (name == "vmr") return ProtocolKind::Vmr;
  if (name == "washout") return ProtocolKind::Washout;
  throw ValidationError("unknown protocol kind '" + name + "'");
}

namespace {

TrialState apply_step(const Model& model, TrialState s, ErrorSignal e) {
  if (const auto* standard = std::get_if<StandardSsmParams>(&model)) {
    return step_standard(*standard, s, e);
  }
  return step_coupled(std::get<CoupledModelParams>(model), s, e);
}

void check_bounded(double x, int trial) {
  if (std::fabs(x) > kDivergenceBound) {
    throw NumericError("simulation diverged: |x| exceeded 1e12 at trial " +
                       std::to_string(trial));
  }
}

}  // namespace

Trajectory simulate(const Model& model, const Protocol& protocol) {
  protocol.validate();
  Trajectory traj;
  traj.protocol = protocol;
  traj.model = model;
  traj.records.reserve(static_cast<size_t>(protocol.n_trials) + 1);

  TrialState state{0, protocol.x0};
  for (int n = 0; n < protocol.n_trials; ++n) {
    const ErrorSignal e = error_for_trial(protocol, state);
    traj.records.push_back({state.n, state.x, e.e, applied_rate(model, e)});
    state = apply_step(model, state, e);
    check_bounded(state.x, state.n);
  }
  const ErrorSignal e_final = error_for_trial(protocol, state);
  traj.records.push_back({state.n, state.x, e_final.e, applied_rate(model, e_final)});
  traj.stop = StopReason::TrialCountReached;
  return traj;
}

Trajectory simulate_until_converged(const Model& model, const Protocol& protocol,
                                    double tol, int n_max) {
  protocol.validate();
  if (!(tol > 0.0)) throw ValidationError("convergence tolerance must be positive");
  if (n_max < 1) throw ValidationError("n_max must be >= 1");

  Trajectory traj;
  traj.model = model;
  traj.stop = StopReason::TrialLimit;

  TrialState state{0, protocol.x0};
  for (int n = 0; n < n_max; ++n) {
    const ErrorSignal e = error_for_trial(protocol, state);
    traj.records.push_back({state.n, state.x, e.e, applied_rate(model, e)});
    const TrialState next = apply_step(model, state, e);
    check_bounded(next.x, next.n);
    const bool settled = std::fabs(next.x - state.x) < tol;
    state = next;
    if (settled) {
      traj.stop = StopReason::Converged;
      break;
    }
  }
  const ErrorSignal e_final = error_for_trial(protocol, state);
  traj.records.push_back({state.n, state.x, e_final.e, applied_rate(model, e_final)});

  traj.protocol = protocol;
  traj.protocol.n_trials = traj.n_trials();  // echo the trials actually run
  return traj;
}

}  // namespace adapt
