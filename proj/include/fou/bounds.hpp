#pragma once

// Kolmogorov-distance bound terms for a ratio of second-chaos variables,
// evaluated on the drift-estimator kernels, and the deterministic
// asymptotics of their ingredients.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "fou/constants.hpp"
#include "fou/error.hpp"
#include "fou/fgn.hpp"
#include "fou/hilbert.hpp"

namespace fou {

/// Norms and inner products entering psi_1..psi_3. Norms of contractions
/// are plain norms, the kernel norms are squared.
struct BoundIngredients {
  double b_t = 0.0;
  double norm_f2 = 0.0;   // |f|^2
  double norm_f1f = 0.0;  // |f (x)_1 f|
  double norm_f1g = 0.0;  // |f (x)_1 g|
  double inner_fg = 0.0;  // <f, g>
  double norm_g2 = 0.0;   // |g|^2
  double norm_g1g = 0.0;  // |g (x)_1 g|
};

struct BoundTerms {
  double psi1 = 0.0;
  double psi2 = 0.0;
  double psi3 = 0.0;
  double max_psi = 0.0;
  BoundIngredients ingredients;
};

inline BoundTerms psi_from_ingredients(const BoundIngredients& in) {
  if (!(in.b_t > 0.0)) throw DomainError("b_T must be positive");
  const double b2 = in.b_t * in.b_t;
  const double gap = b2 - 2.0 * in.norm_f2;
  BoundTerms out;
  out.ingredients = in;
  out.psi1 = std::sqrt(gap * gap + 8.0 * in.norm_f1f * in.norm_f1f) / b2;
  out.psi2 = 2.0 / b2 * std::sqrt(2.0 * in.norm_f1g * in.norm_f1g + in.inner_fg * in.inner_fg);
  out.psi3 = 2.0 / b2 * std::sqrt(in.norm_g2 * in.norm_g2 + 2.0 * in.norm_g1g * in.norm_g1g);
  out.max_psi = std::max({out.psi1, out.psi2, out.psi3});
  return out;
}

/// All ingredients on one grid. b_T comes from the closed form.
inline BoundIngredients bound_ingredients(const ModelParams& p, const Grid& grid) {
  p.validate();
  const TensorGeometry geo(GramWeights(grid, p.hurst));
  const KernelMatrix f = kernel_f(p, grid);
  const KernelMatrix g = kernel_g(p, grid);
  BoundIngredients in;
  in.b_t = b_t_closed_form(p);
  in.norm_f2 = geo.norm2(f);
  in.norm_g2 = geo.norm2(g);
  in.inner_fg = geo.inner(f, g);
  in.norm_f1f = geo.contraction_norm(f, f);
  in.norm_f1g = geo.contraction_norm(f, g);
  in.norm_g1g = geo.contraction_norm(g, g);
  return in;
}

inline BoundTerms psi_terms(const ModelParams& p, const Grid& grid) {
  return psi_from_ingredients(bound_ingredients(p, grid));
}

/// How the grid is chosen for each horizon of a sweep.
struct GridPolicy {
  enum class Kind { fixed_cells, fixed_step } kind = Kind::fixed_step;
  std::size_t cells = 2048;
  double step = 0.05;

  static GridPolicy with_cells(std::size_t n) { return {Kind::fixed_cells, n, 0.0}; }
  static GridPolicy with_step(double dt) { return {Kind::fixed_step, 0, dt}; }

  Grid grid_for(double horizon) const {
    return kind == Kind::fixed_cells ? Grid(horizon, cells) : Grid::with_step(horizon, step);
  }
};

/// One measured quantity of an asymptotics row. `limit` is NaN when the
/// quantity has no finite nonzero target (it is then compared by trend);
/// `rate` is the decay exponent of |measured - limit| in T, NaN if unknown.
struct Quantity {
  std::string name;
  double measured = 0.0;
  double limit = std::numeric_limits<double>::quiet_NaN();
  double rate = std::numeric_limits<double>::quiet_NaN();

  double ratio() const {
    return (std::isfinite(limit) && limit != 0.0) ? measured / limit : std::numeric_limits<double>::quiet_NaN();
  }
};

struct AsymptoticsRow {
  double horizon = 0.0;
  std::vector<Quantity> quantities;

  const Quantity& at(const std::string& name) const {
    for (const auto& q : quantities) {
      if (q.name == name) return q;
    }
    throw std::out_of_range("no quantity named " + name);
  }
};

/// Measured ingredients at one horizon, normalized the way the limits are
/// stated (log T factors at H = 3/4), next to their limiting values.
inline AsymptoticsRow asymptotics_row(const ModelParams& p, const Grid& grid, double epsilon = 0.01) {
  p.validate();
  const double big_t = p.horizon;
  const double a = stationary_variance(p);
  const double th = p.theta;
  const double dh = delta_h(p.hurst);
  const double s2 = sigma2_h(p.hurst);
  const bool critical = is_critical(p.hurst);
  const double log_t = std::log(big_t);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const RateExponent beta = rate_exponent(p.hurst, epsilon);
  const double gap_rate = critical ? nan : 3.0 - 4.0 * p.hurst;

  const BoundIngredients in = bound_ingredients(p, grid);
  const TensorGeometry geo(GramWeights(grid, p.hurst));
  const double norm_h2 = geo.norm2(kernel_h(p, grid));

  const double g_limit = dh / (2.0 * std::pow(th, 1.0 + 4.0 * p.hurst));
  const double lt = critical ? log_t : 1.0;

  AsymptoticsRow row{big_t, {}};
  auto add = [&row](std::string name, double measured, double limit, double rate) {
    row.quantities.push_back({std::move(name), measured, limit, rate});
  };
  add("b_T", in.b_t, a, 1.0);
  add("T_b_T_gap", big_t * std::abs(in.b_t - a), nan, 0.0);
  add(critical ? "two_norm_f2_over_logT" : "two_norm_f2", 2.0 * in.norm_f2 / lt, a * a,
      critical ? nan : gap_rate);
  add("two_norm_f2_gap", std::abs(2.0 * in.norm_f2 / lt - a * a), 0.0, gap_rate);
  add("norm_f1f", in.norm_f1f, 0.0, critical ? nan : beta.beta);
  add(critical ? "T_over_logT_norm_g2" : "T_norm_g2", big_t * in.norm_g2 / lt, g_limit, nan);
  add(critical ? "sqrtT_over_logT_inner_fg" : "sqrtT_inner_fg", std::sqrt(big_t) * in.inner_fg / lt,
      std::sqrt(th / s2) * g_limit, nan);
  add("sqrtT_norm_f1g", std::sqrt(big_t / lt) * in.norm_f1g, 0.0, nan);
  add("sqrtT_norm_g1g", std::sqrt(big_t / lt) * in.norm_g1g, 0.0, nan);
  add("norm_h2_over_T", norm_h2 / big_t, 0.0, 1.0);
  return row;
}

inline std::vector<AsymptoticsRow> asymptotics_report(const ModelParams& p, const std::vector<double>& horizons,
                                                      const GridPolicy& policy, double epsilon = 0.01) {
  for (std::size_t i = 1; i < horizons.size(); ++i) {
    if (!(horizons[i] > horizons[i - 1])) throw DomainError("horizons must be strictly increasing");
  }
  std::vector<AsymptoticsRow> rows;
  rows.reserve(horizons.size());
  for (double t : horizons) rows.push_back(asymptotics_row(p.with_horizon(t), policy.grid_for(t), epsilon));
  return rows;
}

/// C / T^beta, or C / log T at H = 3/4.
inline std::vector<std::pair<double, double>> theoretical_rate_curve(double hurst, const std::vector<double>& horizons,
                                                                     double constant, double epsilon = 0.01) {
  if (!(constant > 0.0)) throw DomainError("rate constant must be positive");
  const RateExponent beta = rate_exponent(hurst, epsilon);
  std::vector<std::pair<double, double>> out;
  out.reserve(horizons.size());
  for (double t : horizons) {
    if (!(t > 0.0)) throw DomainError("horizon must be positive");
    if (beta.log_corrected) {
      if (!(t > 1.0)) throw DomainError("C / log T needs T > 1");
      out.emplace_back(t, constant / std::log(t));
    } else {
      out.emplace_back(t, constant * std::pow(t, -beta.beta));
    }
  }
  return out;
}

}  // namespace fou
