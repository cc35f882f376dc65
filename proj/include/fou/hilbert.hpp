#pragma once

// Hilbert-space geometry of H and H^{(x)2} as matrix algebra.
//
// A function on [0,T] is represented by its midpoint samples, a kernel on
// [0,T]^2 by an n x n matrix of midpoint samples. The singular weight
// alpha_H |t-s|^{2H-2} is never evaluated pointwise: its exact integrals over
// cell pairs are the Gram weights W, so
//   <phi, psi>_H          = phi' W psi
//   <K1, K2>_{H(x)2}      = tr(W K1 W K2')
//   (K1 (x)_1 K2)         = K1 W K2'
// and H = 1/2 reduces to W = step * I.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fou/constants.hpp"
#include "fou/error.hpp"
#include "fou/fgn.hpp"

namespace fou {

struct KernelMatrix {
  Grid grid;
  Eigen::MatrixXd k;
  bool symmetric = false;

  std::size_t size() const { return grid.cells(); }
};

namespace detail {

inline void check_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (!(a == b)) throw DimensionError(std::string(what) + ": operands live on different grids");
}

inline void check_kernel(const KernelMatrix& k, const GramWeights& w, const char* what) {
  check_same_grid(k.grid, w.grid(), what);
  const auto n = static_cast<Eigen::Index>(w.size());
  if (k.k.rows() != n || k.k.cols() != n) throw DimensionError(std::string(what) + ": kernel shape mismatch");
}

/// Dense Gram matrix, or nothing when W is a multiple of the identity.
class Weigher {
 public:
  explicit Weigher(const GramWeights& w) : step_(w.grid().step()), diagonal_(w.is_scaled_identity()) {
    if (!diagonal_) dense_ = w.matrix();
  }

  Eigen::MatrixXd left(const Eigen::MatrixXd& m) const {
    if (diagonal_) return step_ * m;
    Eigen::MatrixXd out(m.rows(), m.cols());
    out.noalias() = dense_ * m;
    return out;
  }

  Eigen::MatrixXd right(const Eigen::MatrixXd& m) const {
    if (diagonal_) return step_ * m;
    Eigen::MatrixXd out(m.rows(), m.cols());
    out.noalias() = m * dense_;
    return out;
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& v) const {
    if (diagonal_) return step_ * v;
    return dense_ * v;
  }

 private:
  double step_;
  bool diagonal_;
  Eigen::MatrixXd dense_;
};

/// tr(W A W B') from the products WA and BW: sum_ij (WA)_ij (BW)_ij.
inline double trace_form(const Eigen::MatrixXd& wa, const Eigen::MatrixXd& bw) {
  return wa.cwiseProduct(bw).sum();
}

inline double checked_norm(double value, double scale, const char* what) {
  if (value < -1e-12 * scale) {
    throw NumericalError(std::string(what) + ": negative squared norm " + std::to_string(value) +
                         " (Gram weights not positive semidefinite)");
  }
  return std::max(value, 0.0);
}

}  // namespace detail

// ----- kernels -------------------------------------------------------------

/// f_T(t,s) = e^{-theta|t-s|} / (2 sqrt(theta sigma^2_H T)).
inline KernelMatrix kernel_f(const ModelParams& p, const Grid& grid) {
  p.validate();
  const auto n = static_cast<Eigen::Index>(grid.cells());
  const double amp = 1.0 / (2.0 * std::sqrt(p.theta * sigma2_h(p.hurst) * p.horizon));
  const double rho = std::exp(-p.theta * grid.step());
  Eigen::VectorXd decay(n);
  decay(0) = amp;
  for (Eigen::Index d = 1; d < n; ++d) decay(d) = amp * std::pow(rho, static_cast<double>(d));
  KernelMatrix out{grid, Eigen::MatrixXd(n, n), true};
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) out.k(i, j) = decay(std::abs(i - j));
  }
  return out;
}

/// v_i = e^{-theta (T - t*_i)}, the factor of the rank-one kernel h_T.
inline Eigen::VectorXd terminal_profile(const ModelParams& p, const Grid& grid) {
  const auto n = static_cast<Eigen::Index>(grid.cells());
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    v(i) = std::exp(-p.theta * (p.horizon - grid.midpoint(static_cast<std::size_t>(i))));
  }
  return v;
}

/// h_T(t,s) = e^{-theta(T-t) - theta(T-s)}.
inline KernelMatrix kernel_h(const ModelParams& p, const Grid& grid) {
  p.validate();
  const Eigen::VectorXd v = terminal_profile(p, grid);
  return {grid, v * v.transpose(), true};
}

/// g_T = sqrt(sigma^2_H / (theta T)) f_T - h_T / (2 theta T).
inline KernelMatrix kernel_g(const ModelParams& p, const Grid& grid) {
  const KernelMatrix f = kernel_f(p, grid);
  const KernelMatrix h = kernel_h(p, grid);
  const double cf = std::sqrt(sigma2_h(p.hurst) / (p.theta * p.horizon));
  const double ch = 1.0 / (2.0 * p.theta * p.horizon);
  return {grid, cf * f.k - ch * h.k, true};
}

// ----- H --------------------------------------------------------------------

inline double inner_h(std::span<const double> phi, std::span<const double> psi, const GramWeights& w) {
  const std::size_t n = w.size();
  if (phi.size() != n || psi.size() != n) throw DimensionError("inner_h: vector length mismatch");
  const auto gamma = w.autocov();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += gamma[i > j ? i - j : j - i] * psi[j];
    total += phi[i] * row;
  }
  return total;
}

// ----- H (x) H ---------------------------------------------------------------

/// Precomputed W for repeated H^{(x)2} algebra on one grid.
class TensorGeometry {
 public:
  explicit TensorGeometry(const GramWeights& w) : weights_(w), weigh_(w) {}

  const GramWeights& weights() const { return weights_; }

  /// |K|^2 = tr(W K W K').
  double norm2(const KernelMatrix& k) const {
    detail::check_kernel(k, weights_, "norm2_h2");
    const Eigen::MatrixXd wk = weigh_.left(k.k);
    if (k.symmetric) {
      const double value = wk.cwiseProduct(wk.transpose()).sum();
      return detail::checked_norm(value, wk.squaredNorm(), "norm2_h2");
    }
    const Eigen::MatrixXd kw = weigh_.right(k.k);
    const double value = detail::trace_form(wk, kw);
    return detail::checked_norm(value, wk.norm() * kw.norm(), "norm2_h2");
  }

  /// <K1, K2> = tr(W K1 W K2').
  double inner(const KernelMatrix& a, const KernelMatrix& b) const {
    detail::check_kernel(a, weights_, "inner_h2");
    detail::check_kernel(b, weights_, "inner_h2");
    return detail::trace_form(weigh_.left(a.k), weigh_.right(b.k));
  }

  /// (K1 (x)_1 K2)(t1, t2) sampled on the grid: K1 W K2'.
  KernelMatrix contract(const KernelMatrix& a, const KernelMatrix& b) const {
    detail::check_kernel(a, weights_, "contract1");
    detail::check_kernel(b, weights_, "contract1");
    const Eigen::MatrixXd wb = weigh_.left(b.k.transpose());
    KernelMatrix out{a.grid, Eigen::MatrixXd(a.k.rows(), b.k.rows()), false};
    out.k.noalias() = a.k * wb;
    if (&a == &b && a.symmetric) {
      out.k = 0.5 * (out.k + out.k.transpose()).eval();
      out.symmetric = true;
    }
    return out;
  }

  /// |K1 (x)_1 K2|.
  double contraction_norm(const KernelMatrix& a, const KernelMatrix& b) const {
    return std::sqrt(norm2(contract(a, b)));
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& v) const { return weigh_.apply(v); }

 private:
  GramWeights weights_;
  detail::Weigher weigh_;
};

inline double norm2_h2(const KernelMatrix& k, const GramWeights& w) { return TensorGeometry(w).norm2(k); }

inline double inner_h2(const KernelMatrix& a, const KernelMatrix& b, const GramWeights& w) {
  return TensorGeometry(w).inner(a, b);
}

inline KernelMatrix contract1(const KernelMatrix& a, const KernelMatrix& b, const GramWeights& w) {
  return TensorGeometry(w).contract(a, b);
}

/// b_T from its definition as a trace: with v^{(t)}_i = e^{-theta(t - t*_i)} on
/// the cells left of t, b_T = (1/T) int_0^T v' W v dt = tr(W M) where
/// M = (1/T) int_0^T v^{(t)} v^{(t)'} dt, integrated by the trapezoid rule
/// over the grid nodes.
inline double b_t_trace_form(const ModelParams& p, const Grid& grid) {
  p.validate();
  const std::size_t n = grid.cells();
  const double rho = std::exp(-p.theta * grid.step());
  // tail[k] = sum_{m=k+1}^{n} w_m rho^{2(m-k)-1}, trapezoid weight w_n = 1/2.
  std::vector<double> tail(n);
  tail[n - 1] = 0.5 * rho;
  for (std::size_t k = n - 1; k-- > 0;) tail[k] = rho + rho * rho * tail[k + 1];
  const GramWeights w(grid, p.hurst);
  const auto gamma = w.autocov();
  const double scale = grid.step() / p.horizon;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t lag = i > j ? i - j : j - i;
      const double m_ij = std::pow(rho, static_cast<double>(lag)) * tail[std::max(i, j)];
      total += gamma[lag] * m_ij;
    }
  }
  return scale * total;
}

}  // namespace fou
