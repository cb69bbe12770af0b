#include "adapt/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "adapt/errors.hpp"

namespace adapt {

namespace {

constexpr double kReflect = 1.0;
constexpr double kExpand = 2.0;
constexpr double kContract = 0.5;
constexpr double kShrink = 0.5;

void clamp_into_box(std::vector<double>& x, std::span<const double> lower,
                    std::span<const double> upper) {
  for (size_t i = 0; i < x.size(); ++i) {
    x[i] = std::clamp(x[i], lower[i], upper[i]);
  }
}

}  // namespace

NelderMeadResult nelder_mead(const ObjectiveFn& f, std::span<const double> x0,
                             std::span<const double> lower,
                             std::span<const double> upper,
                             const NelderMeadOptions& options) {
  const size_t dim = x0.size();
  if (dim == 0) throw ValidationError("nelder_mead needs at least one dimension");
  if (lower.size() != dim || upper.size() != dim) {
    throw ValidationError("bound dimensions must match the start point");
  }
  for (size_t i = 0; i < dim; ++i) {
    if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) || !(lower[i] < upper[i])) {
      throw ValidationError("bounds must be finite with lower < upper");
    }
  }
  if (options.max_evals < static_cast<int>(dim) + 2) {
    throw ValidationError("max_evals too small to evaluate the initial simplex");
  }

  int evals = 0;
  const auto evaluate = [&](const std::vector<double>& v) {
    ++evals;
    return f(v);
  };

  std::vector<std::vector<double>> verts(dim + 1);
  std::vector<double> fv(dim + 1);

  verts[0].assign(x0.begin(), x0.end());
  clamp_into_box(verts[0], lower, upper);
  for (size_t j = 0; j < dim; ++j) {
    verts[j + 1] = verts[0];
    double step = options.initial_step * (upper[j] - lower[j]);
    if (verts[0][j] + step > upper[j]) step = -step;
    verts[j + 1][j] += step;
    clamp_into_box(verts[j + 1], lower, upper);
  }
  for (size_t j = 0; j <= dim; ++j) fv[j] = evaluate(verts[j]);

  std::vector<size_t> order(dim + 1);
  const auto sort_order = [&] {
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return fv[a] < fv[b]; });
  };

  bool converged = false;
  std::vector<double> centroid(dim), candidate(dim);

  while (true) {
    sort_order();
    const size_t best = order[0];
    const size_t second_worst = order[dim - 1];
    const size_t worst = order[dim];

    const double spread = fv[worst] - fv[best];
    if (spread <= std::max(options.f_abs_tol,
                           options.f_rel_tol * std::fabs(fv[best]))) {
      converged = true;
      break;
    }
    double diameter = 0.0;
    double scale = 1.0;
    for (size_t i = 0; i < dim; ++i) {
      scale = std::max(scale, std::fabs(verts[best][i]));
      for (size_t j = 0; j <= dim; ++j) {
        diameter = std::max(diameter, std::fabs(verts[j][i] - verts[best][i]));
      }
    }
    if (diameter <= options.x_tol * scale) {
      converged = true;
      break;
    }
    if (evals >= options.max_evals) break;

    // Centroid of every vertex except the worst.
    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (size_t j = 0; j <= dim; ++j) {
      if (j == worst) continue;
      for (size_t i = 0; i < dim; ++i) centroid[i] += verts[j][i];
    }
    for (size_t i = 0; i < dim; ++i) centroid[i] /= static_cast<double>(dim);

    for (size_t i = 0; i < dim; ++i) {
      candidate[i] = centroid[i] + kReflect * (centroid[i] - verts[worst][i]);
    }
    clamp_into_box(candidate, lower, upper);
    const double f_reflect = evaluate(candidate);

    if (f_reflect < fv[best]) {
      std::vector<double> expanded(dim);
      for (size_t i = 0; i < dim; ++i) {
        expanded[i] = centroid[i] + kExpand * (candidate[i] - centroid[i]);
      }
      clamp_into_box(expanded, lower, upper);
      if (evals < options.max_evals) {
        const double f_expand = evaluate(expanded);
        if (f_expand < f_reflect) {
          verts[worst] = std::move(expanded);
          fv[worst] = f_expand;
          continue;
        }
      }
      verts[worst] = candidate;
      fv[worst] = f_reflect;
      continue;
    }

    if (f_reflect < fv[second_worst]) {
      verts[worst] = candidate;
      fv[worst] = f_reflect;
      continue;
    }

    // Contract, outside or inside depending on how the reflection fared.
    std::vector<double> contracted(dim);
    if (f_reflect < fv[worst]) {
      for (size_t i = 0; i < dim; ++i) {
        contracted[i] = centroid[i] + kContract * (candidate[i] - centroid[i]);
      }
    } else {
      for (size_t i = 0; i < dim; ++i) {
        contracted[i] = centroid[i] - kContract * (centroid[i] - verts[worst][i]);
      }
    }
    clamp_into_box(contracted, lower, upper);
    if (evals >= options.max_evals) break;
    const double f_contract = evaluate(contracted);
    if (f_contract < std::min(f_reflect, fv[worst])) {
      verts[worst] = std::move(contracted);
      fv[worst] = f_contract;
      continue;
    }

    // Shrink everything toward the best vertex.
    for (size_t j = 0; j <= dim; ++j) {
      if (j == best) continue;
      for (size_t i = 0; i < dim; ++i) {
        verts[j][i] = verts[best][i] + kShrink * (verts[j][i] - verts[best][i]);
      }
      clamp_into_box(verts[j], lower, upper);
      if (evals >= options.max_evals) break;
      fv[j] = evaluate(verts[j]);
    }
  }

  sort_order();
  NelderMeadResult result;
  result.best = verts[order[0]];
  result.f_best = fv[order[0]];
  result.evaluations = evals;
  result.converged = converged;
  return result;
}

namespace {

constexpr std::uint64_t kHaltonPrimes[] = {2,  3,  5,  7,  11, 13,
                                           17, 19, 23, 29, 31, 37};

double radical_inverse(std::uint64_t index, std::uint64_t base) {
  double result = 0.0;
  double digit_weight = 1.0 / static_cast<double>(base);
  while (index > 0) {
    result += digit_weight * static_cast<double>(index % base);
    index /= base;
    digit_weight /= static_cast<double>(base);
  }
  return result;
}

}  // namespace

std::vector<double> halton_point(std::uint64_t index, int dim) {
  if (index == 0) throw ValidationError("halton index must be >= 1");
  if (dim < 1 || dim > static_cast<int>(std::size(kHaltonPrimes))) {
    throw ValidationError("halton dimension out of range");
  }
  std::vector<double> point(static_cast<size_t>(dim));
  for (int d = 0; d < dim; ++d) {
    point[static_cast<size_t>(d)] = radical_inverse(index, kHaltonPrimes[d]);
  }
  return point;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace adapt
