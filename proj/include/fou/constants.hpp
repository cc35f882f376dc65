#pragma once

// Closed-form constants of the fractional OU least-squares problem:
// alpha_H, sigma^2_H, delta_H, the stationary second moment, the
// Berry-Esseen rate exponent and the centering constant b_T.

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fou/error.hpp"

namespace fou {

inline constexpr double kHurstMin = 0.5;
inline constexpr double kHurstMax = 0.75;
inline constexpr double kHurstBorder = 0.625;

inline void check_hurst(double hurst) {
  if (!(hurst >= kHurstMin && hurst <= kHurstMax)) {
    throw DomainError("hurst must be in [0.5, 0.75], got " + std::to_string(hurst));
  }
}

/// H == 1/2 switches every alpha_H-weighted formula to its Brownian branch.
inline bool is_brownian(double hurst) { return hurst == kHurstMin; }

/// H == 3/4 is the log-corrected regime.
inline bool is_critical(double hurst) { return hurst == kHurstMax; }

/// Drift, Hurst index and observation horizon of dX = -theta X dt + dB^H,
/// X_0 = 0, with unit volatility.
struct ModelParams {
  double theta = 1.0;
  double hurst = 0.5;
  double horizon = 1.0;

  void validate() const {
    if (!(theta > 0.0) || !std::isfinite(theta)) {
      throw DomainError("theta must be positive, got " + std::to_string(theta));
    }
    check_hurst(hurst);
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
      throw DomainError("horizon must be positive, got " + std::to_string(horizon));
    }
  }

  static ModelParams checked(double theta, double hurst, double horizon) {
    ModelParams p{theta, hurst, horizon};
    p.validate();
    return p;
  }

  ModelParams with_horizon(double t) const { return checked(theta, hurst, t); }
};

struct RateExponent {
  double beta = 0.5;
  bool log_corrected = false;
  double epsilon = 0.0;
};

inline double alpha_h(double hurst) {
  check_hurst(hurst);
  return hurst * (2.0 * hurst - 1.0);
}

inline double sigma2_h(double hurst) {
  check_hurst(hurst);
  if (is_critical(hurst)) return 4.0 / std::numbers::pi;
  const double h = hurst;
  const double ratio = std::tgamma(3.0 - 4.0 * h) * std::tgamma(4.0 * h - 1.0) /
                       (std::tgamma(2.0 * h) * std::tgamma(2.0 - 2.0 * h));
  return (4.0 * h - 1.0) * (1.0 + ratio);
}

inline double delta_h(double hurst) {
  check_hurst(hurst);
  if (is_critical(hurst)) return 9.0 / 16.0;
  const double h = hurst;
  const double g2h = std::tgamma(2.0 * h);
  return h * h * (4.0 * h - 1.0) *
         (g2h * g2h + g2h * std::tgamma(3.0 - 4.0 * h) * std::tgamma(4.0 * h - 1.0) /
                          std::tgamma(2.0 - 2.0 * h));
}

/// a = H Gamma(2H) theta^{-2H}, the limit of b_T and of E[X_t^2].
inline double stationary_variance(const ModelParams& p) {
  p.validate();
  return p.hurst * std::tgamma(2.0 * p.hurst) * std::pow(p.theta, -2.0 * p.hurst);
}

inline RateExponent rate_exponent(double hurst, double epsilon = 0.01) {
  check_hurst(hurst);
  if (!(epsilon >= 0.0 && epsilon < 0.375)) {
    throw DomainError("epsilon must be in [0, 3/8), got " + std::to_string(epsilon));
  }
  if (is_critical(hurst)) return {0.0, true, 0.0};
  if (hurst < kHurstBorder) return {0.5, false, 0.0};
  if (hurst == kHurstBorder) return {0.375 - epsilon, false, epsilon};
  return {3.0 - 4.0 * hurst, false, 0.0};
}

namespace detail {

inline constexpr double kQuadratureTol = 1e-9;

/// Integral over [0, T] of t^{s-1} phi(t) with s = 2H - 1 in (0, 1/2].
/// The substitution u = t^s absorbs the endpoint singularity: t^{s-1} dt = du / s.
/// What is left is bounded but not smooth at u = 0, which tanh-sinh handles.
template <class Phi>
double singular_integral(double s, double upper, Phi phi, const char* what) {
  const double u_max = std::pow(upper, s);
  const double inv_s = 1.0 / s;
  auto integrand = [&](double u) { return phi(std::pow(u, inv_s)) * inv_s; };
  thread_local boost::math::quadrature::tanh_sinh<double> rule;
  double err = 0.0;
  double l1 = 0.0;
  const double value = rule.integrate(integrand, 0.0, u_max, 1e-13, &err, &l1);
  if (!std::isfinite(value) || err > kQuadratureTol * std::max(l1, 1e-300)) {
    throw NumericalError(std::string("quadrature failed to converge: ") + what +
                         " (error estimate " + std::to_string(err) + ")");
  }
  return value;
}

}  // namespace detail

/// b_T = (1/T) int_0^T |e^{-theta(t-.)} 1_[0,t]|_H^2 dt in closed form.
///
/// H = 1/2: 1/(2 theta) - (1 - e^{-2 theta T}) / (4 theta^2 T).
/// H > 1/2: (alpha/theta) { I1 + [I2 - I3] / (2 theta T) } with
///   I1 = int e^{-theta t} t^{2H-2}, I2 = int e^{-theta(2T-t)} t^{2H-2},
///   I3 = int e^{-theta t} t^{2H-2} (1 + 2 theta t), all over [0, T].
inline double b_t_closed_form(const ModelParams& p) {
  p.validate();
  const double th = p.theta;
  const double big_t = p.horizon;
  if (is_brownian(p.hurst)) {
    return 1.0 / (2.0 * th) + std::expm1(-2.0 * th * big_t) / (4.0 * th * th * big_t);
  }
  const double s = 2.0 * p.hurst - 1.0;
  const double i1 = detail::singular_integral(
      s, big_t, [th](double t) { return std::exp(-th * t); }, "b_T first term");
  const double i2 = detail::singular_integral(
      s, big_t, [th, big_t](double t) { return std::exp(-th * (2.0 * big_t - t)); },
      "b_T boundary term");
  const double i3 = detail::singular_integral(
      s, big_t, [th](double t) { return std::exp(-th * t) * (1.0 + 2.0 * th * t); },
      "b_T correction term");
  return alpha_h(p.hurst) / th * (i1 + (i2 - i3) / (2.0 * th * big_t));
}

/// Trace term separating the Young and Skorohod integrals of X against B^H:
/// c_T = alpha_H int_0^T int_0^t e^{-theta(t-s)} (t-s)^{2H-2} ds dt
///     = alpha_H int_0^T (T-u) e^{-theta u} u^{2H-2} du,
/// and T/2 (the Ito correction) at H = 1/2.
inline double skorohod_correction(const ModelParams& p) {
  p.validate();
  if (is_brownian(p.hurst)) return 0.5 * p.horizon;
  const double th = p.theta;
  const double big_t = p.horizon;
  const double s = 2.0 * p.hurst - 1.0;
  return alpha_h(p.hurst) *
         detail::singular_integral(
             s, big_t, [th, big_t](double u) { return (big_t - u) * std::exp(-th * u); },
             "Skorohod correction");
}

}  // namespace fou
