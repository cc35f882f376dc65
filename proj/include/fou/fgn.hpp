#pragma once

// Fractional Gaussian noise on a uniform grid: the fBm covariance, the exact
// cell-pair Gram weights of the Hilbert space H, and exact samplers
// (circulant embedding with a dense Cholesky fallback).

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fou/constants.hpp"
#include "fou/error.hpp"
#include "fou/rng.hpp"

namespace fou {

/// Uniform partition of [0, horizon] into n cells.
class Grid {
 public:
  Grid(double horizon, std::size_t cells) : horizon_(horizon), cells_(cells) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
      throw DomainError("grid horizon must be positive");
    }
    if (cells < 2) throw DomainError("grid needs at least 2 cells");
    step_ = horizon / static_cast<double>(cells);
  }

  /// Grid whose step is the given dt rounded so that it divides the horizon.
  static Grid with_step(double horizon, double dt) {
    if (!(dt > 0.0)) throw DomainError("grid step must be positive");
    const double cells = std::round(horizon / dt);
    return Grid(horizon, static_cast<std::size_t>(std::max(cells, 2.0)));
  }

  double horizon() const { return horizon_; }
  std::size_t cells() const { return cells_; }
  double step() const { return step_; }

  /// t_k = k * step, k = 0..n; the last node is the horizon exactly.
  double node(std::size_t k) const {
    return k == cells_ ? horizon_ : static_cast<double>(k) * step_;
  }

  /// t*_k = (k + 1/2) * step, k = 0..n-1. Kernels are sampled here.
  double midpoint(std::size_t k) const { return (static_cast<double>(k) + 0.5) * step_; }

  bool operator==(const Grid&) const = default;

 private:
  double horizon_;
  std::size_t cells_;
  double step_ = 0.0;
};

/// E[B^H_t B^H_s] = (t^{2H} + s^{2H} - |t-s|^{2H}) / 2.
inline double fbm_cov(double t, double s, double hurst) {
  if (t < 0.0 || s < 0.0) throw DomainError("fbm_cov needs nonnegative times");
  const double e = 2.0 * hurst;
  return 0.5 * (std::pow(t, e) + std::pow(s, e) - std::pow(std::abs(t - s), e));
}

/// gamma(k) = E[dB_i dB_{i+k}] = step^{2H} (|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H}) / 2.
inline double fgn_autocov(std::size_t k, double step, double hurst) {
  const double e = 2.0 * hurst;
  const double scale = std::pow(step, e);
  if (k == 0) return scale;
  if (k == 1) return 0.5 * scale * (std::pow(2.0, e) - 2.0);
  // Second difference of k^{2H}, written with expm1/log1p so that the
  // O(k^{2H-2}) result does not cancel against O(k^{2H}) terms.
  const double kd = static_cast<double>(k);
  const double x = 1.0 / kd;
  const double second = std::expm1(e * std::log1p(x)) + std::expm1(e * std::log1p(-x));
  return 0.5 * scale * std::pow(kd, e) * second;
}

inline std::vector<double> fgn_autocov_sequence(std::size_t count, double step, double hurst) {
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) out[k] = fgn_autocov(k, step, hurst);
  return out;
}

/// Exact H inner products of indicator cells: w[i][j] = <1_{cell i}, 1_{cell j}>_H.
///
/// Stored by its Toeplitz symbol (first column). `matrix()` materializes the
/// dense n x n form for the Hilbert-space algebra.
class GramWeights {
 public:
  GramWeights(const Grid& grid, double hurst)
      : grid_(grid), hurst_(hurst), autocov_(fgn_autocov_sequence(grid.cells(), grid.step(), hurst)) {
    check_hurst(hurst);
  }

  const Grid& grid() const { return grid_; }
  double hurst() const { return hurst_; }
  std::size_t size() const { return grid_.cells(); }

  /// First column of the Toeplitz matrix, gamma(0..n-1).
  std::span<const double> autocov() const { return autocov_; }

  double operator()(std::size_t i, std::size_t j) const {
    return autocov_[i > j ? i - j : j - i];
  }

  /// True when w = step * I (independent increments, H = 1/2).
  bool is_scaled_identity() const { return is_brownian(hurst_); }

  Eigen::MatrixXd matrix() const {
    const auto n = static_cast<Eigen::Index>(size());
    Eigen::MatrixXd w(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) w(i, j) = autocov_[static_cast<std::size_t>(std::abs(i - j))];
    }
    return w;
  }

 private:
  Grid grid_;
  double hurst_;
  std::vector<double> autocov_;
};

inline GramWeights gram_weights(const Grid& grid, double hurst) { return GramWeights(grid, hurst); }

/// One draw of the fBm increments dB_k over the grid cells.
struct NoisePath {
  Grid grid;
  double hurst;
  std::vector<double> xi;
  std::uint64_t seed;
};

enum class SamplerMethod { independent, circulant, cholesky };

/// Exact Gaussian sampler for fGn with covariance gram_weights(grid, H).
///
/// Circulant embedding of length 2n is the default. If an embedding
/// eigenvalue is below -1e-9 (relative to the largest), the sampler falls
/// back to a dense Cholesky factor. H = 1/2 draws independent increments.
class FgnSampler {
 public:
  static constexpr double kEmbeddingTolerance = 1e-9;

  FgnSampler(const Grid& grid, double hurst) : grid_(grid), hurst_(hurst) {
    check_hurst(hurst);
    if (is_brownian(hurst)) {
      method_ = SamplerMethod::independent;
    } else if (!init_circulant()) {
      init_cholesky();
    }
  }

  /// Forces a specific method; used to cross-check the samplers.
  FgnSampler(const Grid& grid, double hurst, SamplerMethod method) : grid_(grid), hurst_(hurst) {
    check_hurst(hurst);
    switch (method) {
      case SamplerMethod::independent:
        if (!is_brownian(hurst)) throw DomainError("independent sampling requires H = 1/2");
        method_ = method;
        break;
      case SamplerMethod::circulant:
        if (!init_circulant()) throw NumericalError("circulant embedding is not nonnegative definite");
        break;
      case SamplerMethod::cholesky:
        init_cholesky();
        break;
    }
  }

  SamplerMethod method() const { return method_; }
  const Grid& grid() const { return grid_; }
  double hurst() const { return hurst_; }

  /// Fills `out` (length n) with one draw using the given normal stream.
  void sample_into(std::span<double> out, NormalStream& normals) const {
    const std::size_t n = grid_.cells();
    if (out.size() != n) throw DimensionError("fgn output length does not match grid");
    switch (method_) {
      case SamplerMethod::independent: {
        const double sd = std::sqrt(grid_.step());
        for (auto& v : out) v = sd * normals();
        break;
      }
      case SamplerMethod::circulant: {
        thread_local Eigen::FFT<double> fft;
        const std::size_t m = root_eigen_.size();
        std::vector<std::complex<double>> z(m);
        for (std::size_t k = 0; k < m; ++k) {
          const double re = normals();
          const double im = normals();
          z[k] = root_eigen_[k] * std::complex<double>(re, im);
        }
        std::vector<std::complex<double>> y;
        fft.fwd(y, z);
        for (std::size_t k = 0; k < n; ++k) out[k] = y[k].real();
        break;
      }
      case SamplerMethod::cholesky: {
        Eigen::VectorXd z(static_cast<Eigen::Index>(n));
        for (Eigen::Index k = 0; k < z.size(); ++k) z(k) = normals();
        const Eigen::VectorXd x = chol_factor_.triangularView<Eigen::Lower>() * z;
        std::copy(x.data(), x.data() + n, out.begin());
        break;
      }
    }
  }

  NoisePath sample(std::uint64_t seed) const {
    NoisePath path{grid_, hurst_, std::vector<double>(grid_.cells()), seed};
    NormalStream normals(seed);
    sample_into(path.xi, normals);
    return path;
  }

 private:
  bool init_circulant() {
    const std::size_t n = grid_.cells();
    const std::size_t m = 2 * n;
    const std::vector<double> gamma = fgn_autocov_sequence(n + 1, grid_.step(), hurst_);
    std::vector<std::complex<double>> row(m);
    for (std::size_t k = 0; k <= n; ++k) row[k] = gamma[k];
    for (std::size_t k = n + 1; k < m; ++k) row[k] = gamma[m - k];
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> eig;
    fft.fwd(eig, row);
    double largest = 0.0;
    double smallest = 0.0;
    for (const auto& e : eig) {
      largest = std::max(largest, e.real());
      smallest = std::min(smallest, e.real());
    }
    if (smallest < -kEmbeddingTolerance * largest) return false;
    root_eigen_.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
      root_eigen_[k] = std::sqrt(std::max(eig[k].real(), 0.0) / static_cast<double>(m));
    }
    method_ = SamplerMethod::circulant;
    return true;
  }

  void init_cholesky() {
    const Eigen::MatrixXd w = GramWeights(grid_, hurst_).matrix();
    Eigen::LLT<Eigen::MatrixXd> llt(w);
    if (llt.info() != Eigen::Success) throw NumericalError("Gram matrix is not positive definite");
    chol_factor_ = llt.matrixL();
    method_ = SamplerMethod::cholesky;
  }

  Grid grid_;
  double hurst_;
  SamplerMethod method_ = SamplerMethod::independent;
  std::vector<double> root_eigen_;
  Eigen::MatrixXd chol_factor_;
};

inline NoisePath sample_fgn(const Grid& grid, double hurst, std::uint64_t seed) {
  return FgnSampler(grid, hurst).sample(seed);
}

}  // namespace fou
