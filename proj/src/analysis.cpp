#include "adapt/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "adapt/io.hpp"

namespace adapt {

FeatureReport extract_features(const Trajectory& traj, double conv_tol) {
  if (traj.records.size() < 2) {
    throw ValidationError("feature extraction needs a trajectory with at least 2 records");
  }
  if (!(conv_tol > 0.0)) throw ValidationError("conv_tol must be positive");

  const auto& r = traj.records;
  FeatureReport report;
  report.initial_slope = r[1].x - r[0].x;
  report.asymptote = r.back().x;
  report.converged = std::fabs(r[r.size() - 1].x - r[r.size() - 2].x) < conv_tol;
  return report;
}

namespace {

bool nearly_equal(double a, double b, double rel_tol) {
  return std::fabs(a - b) <= rel_tol * std::max({1.0, std::fabs(a), std::fabs(b)});
}

}  // namespace

FalsificationReport falsification_report(const StandardSsmParams& params,
                                         std::span<const double> error_sizes,
                                         double e_sat) {
  if (error_sizes.size() < 2) {
    throw ValidationError("falsification needs at least 2 error sizes");
  }
  for (double e : error_sizes) {
    if (!std::isfinite(e) || e <= 0.0) {
      throw ValidationError("error sizes must be positive and finite");
    }
  }
  for (size_t i = 0; i < error_sizes.size(); ++i) {
    for (size_t j = i + 1; j < error_sizes.size(); ++j) {
      if (error_sizes[i] == error_sizes[j]) {
        throw ValidationError("error sizes must be distinct");
      }
    }
  }
  if (!(e_sat > 0.0) || !std::isfinite(e_sat)) {
    throw ValidationError("e_sat must be positive");
  }

  FalsificationReport report;
  report.e_sat = e_sat;
  const Model model = params;
  for (double e : error_sizes) {
    FalsificationEntry entry;
    entry.error = e;
    entry.asymptote_closed_form = fixed_point_standard(params, ErrorSignal{e});
    entry.asymptote_empirical =
        simulate_until_converged(model, Protocol::ticvf(e, 1), 1e-12, 100000)
            .records.back()
            .x;
    entry.initial_slope = step_standard(params, TrialState{0, 0.0}, ErrorSignal{e}).x;
    report.entries.push_back(entry);
  }

  const auto& entries = report.entries;
  for (size_t i = 1; i < entries.size(); ++i) {
    const double size_ratio = entries[i].error / entries[0].error;
    const double asym_ratio =
        entries[i].asymptote_empirical / entries[0].asymptote_empirical;
    const double slope_ratio = entries[i].initial_slope / entries[0].initial_slope;
    report.max_asymptote_ratio_deviation = std::max(
        report.max_asymptote_ratio_deviation, std::fabs(asym_ratio - size_ratio));
    report.max_slope_ratio_deviation = std::max(report.max_slope_ratio_deviation,
                                                std::fabs(slope_ratio - size_ratio));
  }

  // Feature 1: a constant saturation level across error sizes. Any two
  // distinct sizes suffice to assess it.
  {
    auto& check = report.feature1_constant_asymptote;
    check.assessed = true;
    double lo = entries[0].asymptote_empirical;
    double hi = lo;
    for (const auto& entry : entries) {
      lo = std::min(lo, entry.asymptote_empirical);
      hi = std::max(hi, entry.asymptote_empirical);
    }
    check.violated = !nearly_equal(lo, hi, 1e-9);
    check.note = check.violated
                     ? "asymptote scales with the error size, from " +
                           format_double(lo) + " to " + format_double(hi)
                     : "asymptote is constant across error sizes";
  }

  // Features 2 and 3 split the sizes at e_sat. Each needs two sizes on its
  // side of the boundary to be assessable.
  std::vector<const FalsificationEntry*> below;
  std::vector<const FalsificationEntry*> above;
  for (const auto& entry : entries) {
    (entry.error < e_sat ? below : above).push_back(&entry);
  }

  {
    auto& check = report.feature2_slope_scales_below_sat;
    check.assessed = below.size() >= 2;
    if (!check.assessed) {
      check.note = "fewer than two error sizes below e_sat";
    } else {
      bool any_difference = false;
      for (size_t i = 1; i < below.size(); ++i) {
        if (!nearly_equal(below[i]->initial_slope, below[0]->initial_slope, 1e-12)) {
          any_difference = true;
        }
      }
      check.violated = !any_difference;
      check.note = check.violated
                       ? "initial slope is flat below e_sat"
                       : "initial slope varies with error size below e_sat";
    }
  }

  {
    auto& check = report.feature3_constant_slope_above_sat;
    check.assessed = above.size() >= 2;
    if (!check.assessed) {
      check.note = "fewer than two error sizes at or above e_sat";
    } else {
      bool any_difference = false;
      for (size_t i = 1; i < above.size(); ++i) {
        if (!nearly_equal(above[i]->initial_slope, above[0]->initial_slope, 1e-12)) {
          any_difference = true;
        }
      }
      check.violated = any_difference;
      check.note = check.violated
                       ? "initial slope keeps scaling with error size above e_sat"
                       : "initial slope is constant at and above e_sat";
    }
  }

  return report;
}

std::vector<SweepRow> feature_sweep(const CoupledModelParams& model,
                                    std::span<const double> error_sizes,
                                    const SweepOptions& options) {
  if (error_sizes.empty()) throw ValidationError("sweep needs at least one error size");
  for (double e : error_sizes) {
    if (!std::isfinite(e) || e <= 0.0) {
      throw ValidationError("error sizes must be positive and finite");
    }
  }
  const Model m = model;
  std::vector<SweepRow> rows;
  rows.reserve(error_sizes.size());
  for (double e : error_sizes) {
    const Trajectory traj = simulate_until_converged(
        m, Protocol::ticvf(e, 1), options.conv_tol, options.n_max);
    rows.push_back({e, extract_features(traj, options.conv_tol)});
  }
  return rows;
}

GeneralLinearFamily GeneralLinearFamily::from_rate(const RateFunction& rate,
                                                   double k_ref,
                                                   std::span<const double> grid) {
  return tabulate([&rate](double e) { return 1.0 - rate(e); },
                  [&rate, k_ref](double e) { return rate(e) * k_ref; }, grid,
                  k_ref);
}

GeneralLinearFamily GeneralLinearFamily::tabulate(
    const std::function<double(double)>& f_of_e,
    const std::function<double(double)>& g_of_e, std::span<const double> grid,
    double k_ref) {
  GeneralLinearFamily family;
  family.k_ref = k_ref;
  family.errors.assign(grid.begin(), grid.end());
  family.f.reserve(grid.size());
  family.g.reserve(grid.size());
  for (double e : grid) {
    family.f.push_back(f_of_e(e));
    family.g.push_back(g_of_e(e));
  }
  family.validate();
  return family;
}

void GeneralLinearFamily::validate() const {
  if (errors.empty()) throw ValidationError("family grid must be non-empty");
  if (f.size() != errors.size() || g.size() != errors.size()) {
    throw ValidationError("family grids e, f, g must have equal length");
  }
  if (!std::isfinite(k_ref) || k_ref == 0.0) {
    throw ValidationError("k_ref must be finite and nonzero");
  }
  for (size_t i = 0; i < errors.size(); ++i) {
    if (!std::isfinite(errors[i]) || !std::isfinite(f[i]) || !std::isfinite(g[i])) {
      throw ValidationError("family values must be finite");
    }
  }
}

UniquenessVerdict verify_uniqueness(const GeneralLinearFamily& family, double tol,
                                    const UniquenessOptions& options) {
  family.validate();
  if (!(tol > 0.0)) throw ValidationError("tolerance must be positive");
  if (options.n_max < 1) throw ValidationError("n_max must be >= 1");

  const double k = family.k_ref;
  const double consistency_tol = tol * std::max(1.0, std::fabs(k));

  // A slope f >= 1 with an additive term inconsistent with a fixed point at
  // k_ref leaves the iteration nowhere to settle.
  for (size_t i = 0; i < family.errors.size(); ++i) {
    if (family.f[i] >= 1.0 &&
        std::fabs(family.g[i] - k * (1.0 - family.f[i])) > consistency_tol) {
      throw NumericError("non-contractive family: f(E) = " +
                         format_double(family.f[i]) + " at E = " +
                         format_double(family.errors[i]) +
                         " admits no fixed point");
    }
  }

  const double asym_tol = tol * std::fabs(k);

  UniquenessVerdict verdict;
  verdict.tol = tol;
  verdict.pass = true;
  verdict.checks_agree_everywhere = true;
  verdict.points.reserve(family.errors.size());

  for (size_t i = 0; i < family.errors.size(); ++i) {
    UniquenessPoint point;
    point.e = family.errors[i];
    point.f = family.f[i];
    point.g = family.g[i];
    point.residual = std::fabs(point.f - (1.0 - point.g / k));

    // Stop iterating once the remaining gap to the fixed point is well
    // inside asym_tol; for the contraction |f| the gap is about
    // step * |f| / (1 - |f|).
    const double af = std::fabs(point.f);
    const double amplify = af < 1.0 ? af / (1.0 - af) : 1.0;
    const double step_tol = std::max(0.05 * asym_tol / std::max(amplify, 1.0),
                                     5e-16 * std::max(1.0, std::fabs(k)));

    double x = options.x0;
    for (int n = 0; n < options.n_max; ++n) {
      const double next = point.f * x + point.g;
      const bool settled = std::fabs(next - x) < step_tol;
      x = next;
      if (settled) {
        point.iteration_converged = true;
        break;
      }
      if (std::fabs(x) > kDivergenceBound) break;
    }
    point.empirical_asymptote = x;
    point.asymptote_matches =
        point.iteration_converged && std::fabs(x - k) <= asym_tol;
    point.relation_holds = point.residual <= tol;

    verdict.max_residual = std::max(verdict.max_residual, point.residual);
    if (!(point.asymptote_matches && point.relation_holds)) {
      verdict.pass = false;
      verdict.violations.push_back(static_cast<int>(i));
    }
    if (point.asymptote_matches != point.relation_holds) {
      verdict.checks_agree_everywhere = false;
    }
    verdict.points.push_back(point);
  }
  return verdict;
}

}  // namespace adapt
