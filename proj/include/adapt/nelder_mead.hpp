#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace adapt {

// Bounded derivative-free simplex descent with the standard coefficients
// (reflection 1, expansion 2, contraction 0.5, shrink 0.5). Box bounds are
// enforced by clamping every candidate vertex coordinate-wise, which suits
// objectives with kinks where gradients are unreliable.
struct NelderMeadOptions {
  int max_evals = 2000;
  double f_abs_tol = 1e-20;   // stop when f spread <= max(f_abs_tol, f_rel_tol |f_best|)
  double f_rel_tol = 1e-12;
  double x_tol = 1e-11;       // or when the simplex diameter is this small, relative
  double initial_step = 0.05; // initial simplex edge, as a fraction of each box range
};

struct NelderMeadResult {
  std::vector<double> best;
  double f_best = 0.0;
  int evaluations = 0;
  bool converged = false;  // tolerance met before the budget ran out
};

using ObjectiveFn = std::function<double(std::span<const double>)>;

NelderMeadResult nelder_mead(const ObjectiveFn& f, std::span<const double> x0,
                             std::span<const double> lower,
                             std::span<const double> upper,
                             const NelderMeadOptions& options = {});

// Halton low-discrepancy point: coordinate d is the radical inverse of
// `index` in the d-th prime base. index must be >= 1.
std::vector<double> halton_point(std::uint64_t index, int dim);

// SplitMix64 bit mixer, used to derive start-sequence offsets from seeds.
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace adapt
