#pragma once

#include <string>

#include "adapt/models.hpp"

namespace adapt {

enum class ProtocolKind { Ticvf, Vmr, Washout };

// Experiment definition: how the error is generated on each trial.
//
//   Ticvf    clamped error, constant and independent of the state
//   Vmr      closed loop, error = target - x
//   Washout  zero error every trial
struct Protocol {
  ProtocolKind kind = ProtocolKind::Ticvf;
  double magnitude = 0.0;  // clamped error (Ticvf) or target (Vmr); unused for Washout
  int n_trials = 1;
  double x0 = 0.0;         // initial state, degrees

  static Protocol ticvf(double e_clamp, int n_trials, double x0 = 0.0);
  static Protocol vmr(double target, int n_trials, double x0 = 0.0);
  static Protocol washout(int n_trials, double x0 = 0.0);

  void validate() const;  // n_trials >= 1, finite magnitude and x0
};

ErrorSignal error_for_trial(const Protocol& protocol, const TrialState& s);

std::string protocol_kind_name(ProtocolKind kind);
ProtocolKind protocol_kind_from_name(const std::string& name);

}  // namespace adapt
