#pragma once

// Fractional OU paths and the least-squares drift estimator in its two
// forms: the pathwise ratio -int X dX / int X^2 dt, and the ratio of
// second-chaos variables I2(f_T) / (I2(g_T) + b_T).

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fou/constants.hpp"
#include "fou/error.hpp"
#include "fou/fgn.hpp"
#include "fou/hilbert.hpp"

namespace fou {

struct FouPath {
  Grid grid;
  ModelParams params;
  std::vector<double> x;  // X at the n + 1 nodes, x[0] = 0
  NoisePath noise;
};

enum class EstimatorMethod { pathwise_ito, skorohod_oracle, chaos_ratio };

inline const char* to_string(EstimatorMethod m) {
  switch (m) {
    case EstimatorMethod::pathwise_ito: return "pathwise_ito";
    case EstimatorMethod::skorohod_oracle: return "skorohod_oracle";
    case EstimatorMethod::chaos_ratio: return "chaos_ratio";
  }
  return "unknown";
}

struct EstimatorResult {
  double theta_hat;
  double numerator;
  double denominator;
  EstimatorMethod method;
};

/// x[k+1] = e^{-theta step} x[k] + xi[k], x[0] = 0.
inline FouPath simulate_fou(const Grid& grid, const ModelParams& params, NoisePath noise) {
  params.validate();
  if (!(noise.grid == grid) || noise.xi.size() != grid.cells()) {
    throw DimensionError("simulate_fou: noise was generated on a different grid");
  }
  if (noise.hurst != params.hurst) throw DimensionError("simulate_fou: noise Hurst index differs from params");
  if (std::abs(grid.horizon() - params.horizon) > 1e-12 * params.horizon) {
    throw DimensionError("simulate_fou: grid horizon differs from params");
  }
  const double rho = std::exp(-params.theta * grid.step());
  std::vector<double> x(grid.cells() + 1);
  x[0] = 0.0;
  for (std::size_t k = 0; k < grid.cells(); ++k) x[k + 1] = rho * x[k] + noise.xi[k];
  return {grid, params, std::move(x), std::move(noise)};
}

/// int_0^T X_t^2 dt by the trapezoid rule on the nodes.
inline double path_energy(const FouPath& path) {
  const auto& x = path.x;
  double sum = 0.0;
  for (double v : x) sum += v * v;
  sum -= 0.5 * (x.front() * x.front() + x.back() * x.back());
  return path.grid.step() * sum;
}

/// E[sum_k X_{t_k} xi_k] for the simulated recursion: the trace separating
/// the left-point Young sum from its Skorohod (centered) part on this grid,
///   sum_{m=1}^{n-1} (n - m) rho^{m-1} gamma(m).
/// Tends to skorohod_correction(params) as the step shrinks.
inline double discrete_skorohod_trace(const Grid& grid, const ModelParams& params) {
  params.validate();
  if (is_brownian(params.hurst)) return 0.0;
  const std::size_t n = grid.cells();
  const double rho = std::exp(-params.theta * grid.step());
  double total = 0.0;
  double power = 1.0;
  for (std::size_t m = 1; m < n; ++m) {
    total += static_cast<double>(n - m) * power * fgn_autocov(m, grid.step(), params.hurst);
    power *= rho;
  }
  return total;
}

namespace detail {

inline double degenerate_threshold(const ModelParams& p) {
  return 1e-12 * p.horizon * stationary_variance(p);
}

}  // namespace detail

/// Least-squares drift estimate from the path, given the Skorohod trace.
///
/// H = 1/2: theta_hat = (T - X_T^2) / (2 int X^2), the Ito form.
/// H > 1/2: theta_hat = -(sum X_k (X_{k+1} - X_k) - trace) / int X^2, the
/// left-point Young sum re-centered by the (true-theta) trace.
inline EstimatorResult estimate_pathwise(const FouPath& path, double trace) {
  const ModelParams& p = path.params;
  const double energy = path_energy(path);
  if (!(energy >= detail::degenerate_threshold(p))) {
    throw NumericalError("degenerate path: int X^2 dt = " + std::to_string(energy));
  }
  if (is_brownian(p.hurst)) {
    const double xt = path.x.back();
    const double numerator = 0.5 * (p.horizon - xt * xt);
    return {numerator / energy, numerator, energy, EstimatorMethod::pathwise_ito};
  }
  double young = 0.0;
  for (std::size_t k = 0; k + 1 < path.x.size(); ++k) young += path.x[k] * (path.x[k + 1] - path.x[k]);
  const double numerator = -(young - trace);
  return {numerator / energy, numerator, energy, EstimatorMethod::skorohod_oracle};
}

inline EstimatorResult estimate_pathwise(const FouPath& path) {
  return estimate_pathwise(path, discrete_skorohod_trace(path.grid, path.params));
}

/// Discrete double Wiener-Ito integral of a step kernel:
/// sum_ij K_ij (xi_i xi_j - W_ij). Mean zero by construction.
inline double i2(const KernelMatrix& kernel, const NoisePath& noise, const GramWeights& w) {
  const std::size_t n = w.size();
  if (!(kernel.grid == w.grid()) || !(noise.grid == w.grid())) {
    throw DimensionError("i2: kernel, noise and weights must share one grid");
  }
  if (noise.hurst != w.hurst()) throw DimensionError("i2: noise and weights have different Hurst index");
  if (noise.xi.size() != n || static_cast<std::size_t>(kernel.k.rows()) != n ||
      static_cast<std::size_t>(kernel.k.cols()) != n) {
    throw DimensionError("i2: dimension mismatch");
  }
  const Eigen::Map<const Eigen::VectorXd> xi(noise.xi.data(), static_cast<Eigen::Index>(n));
  const double quadratic = xi.dot(kernel.k * xi);
  const auto gamma = w.autocov();
  double trace = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      trace += kernel.k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * gamma[i > j ? i - j : j - i];
    }
  }
  return quadratic - trace;
}

/// sqrt(T / (theta sigma^2_H)), or sqrt(T / (theta sigma^2_H log T)) at
/// H = 3/4 when log_correction is set.
inline double statistic_scale(const ModelParams& p, bool log_correction = true) {
  p.validate();
  double denom = p.theta * sigma2_h(p.hurst);
  if (is_critical(p.hurst) && log_correction) {
    if (!(p.horizon > 1.0)) throw DomainError("log normalization at H = 3/4 needs T > 1");
    denom *= std::log(p.horizon);
  }
  return std::sqrt(p.horizon / denom);
}

/// Ratio of chaos variables equal (pathwise) to statistic_scale * (theta_hat - theta):
///   -s I2(f_T) / (I2(g_T) + b_T),
/// with s = 1, or 1/sqrt(log T) at H = 3/4 under the log normalization.
inline double normalized_statistic(const FouPath& path, const KernelMatrix& f, const KernelMatrix& g,
                                   double b_t, bool log_correction = true) {
  if (!(b_t > 0.0)) throw DomainError("b_T must be positive");
  const GramWeights w(path.grid, path.params.hurst);
  double numerator = i2(f, path.noise, w);
  if (is_critical(path.params.hurst) && log_correction) numerator /= std::sqrt(std::log(path.params.horizon));
  const double denominator = i2(g, path.noise, w) + b_t;
  if (std::abs(denominator) < 1e-9) throw NumericalError("chaos ratio: near-zero denominator");
  return -numerator / denominator;
}

/// O(n) evaluation of the chaos ratio for the exponential kernels.
///
/// With E_ij = rho^{|i-j|} and v the terminal profile,
///   f_T = c_f E,   g_T = (E - v v') / (2 theta T),
///   xi' E xi = sum xi_i^2 + 2 sum_i xi_i A_i,   A_i = sum_{j<i} rho^{i-j} xi_j,
/// and the traces tr(E W), v' W v are precomputed once per grid.
class ChaosRatio {
 public:
  ChaosRatio(const ModelParams& params, const Grid& grid, double b_t, bool log_correction = true)
      : params_(params), grid_(grid), b_t_(b_t) {
    params.validate();
    if (!(b_t > 0.0)) throw DomainError("b_T must be positive");
    const std::size_t n = grid.cells();
    rho_ = std::exp(-params.theta * grid.step());
    amp_f_ = 1.0 / (2.0 * std::sqrt(params.theta * sigma2_h(params.hurst) * params.horizon));
    if (is_critical(params.hurst) && log_correction) amp_f_ /= std::sqrt(std::log(params.horizon));
    amp_g_ = 1.0 / (2.0 * params.theta * params.horizon);

    const std::vector<double> gamma = fgn_autocov_sequence(n, grid.step(), params.hurst);
    trace_e_ = static_cast<double>(n) * gamma[0];
    double power = 1.0;
    for (std::size_t k = 1; k < n; ++k) {
      power *= rho_;
      trace_e_ += 2.0 * static_cast<double>(n - k) * power * gamma[k];
    }

    profile_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      profile_[i] = std::exp(-params.theta * (params.horizon - grid.midpoint(i)));
    }
    // v' W v = sum_k c_k gamma(k) rho^k sum_{i >= k} v_i^2, since v_{i-k} = rho^k v_i.
    std::vector<double> suffix(n + 1, 0.0);
    for (std::size_t i = n; i-- > 0;) suffix[i] = suffix[i + 1] + profile_[i] * profile_[i];
    trace_h_ = 0.0;
    power = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
      trace_h_ += (k == 0 ? 1.0 : 2.0) * gamma[k] * power * suffix[k];
      power *= rho_;
    }
  }

  struct Parts {
    double i2_f;
    double i2_g;
  };

  Parts parts(std::span<const double> xi) const {
    if (xi.size() != grid_.cells()) throw DimensionError("chaos ratio: noise length mismatch");
    double squares = 0.0;
    double cross = 0.0;
    double carry = 0.0;
    double projection = 0.0;
    for (std::size_t i = 0; i < xi.size(); ++i) {
      const double v = xi[i];
      squares += v * v;
      cross += v * carry;
      carry = rho_ * (carry + v);
      projection += profile_[i] * v;
    }
    const double i2_e = squares + 2.0 * cross - trace_e_;
    const double i2_h = projection * projection - trace_h_;
    return {amp_f_ * i2_e, amp_g_ * (i2_e - i2_h)};
  }

  double statistic(std::span<const double> xi) const {
    const Parts p = parts(xi);
    const double denominator = p.i2_g + b_t_;
    if (std::abs(denominator) < 1e-9) throw NumericalError("chaos ratio: near-zero denominator");
    return -p.i2_f / denominator;
  }

  const ModelParams& params() const { return params_; }
  double b_t() const { return b_t_; }

 private:
  ModelParams params_;
  Grid grid_;
  double b_t_;
  double rho_ = 0.0;
  double amp_f_ = 0.0;
  double amp_g_ = 0.0;
  double trace_e_ = 0.0;
  double trace_h_ = 0.0;
  std::vector<double> profile_;
};

}  // namespace fou
