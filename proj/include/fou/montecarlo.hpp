#pragma once

// Monte Carlo replication of the normalized drift statistic, the one-sample
// Kolmogorov distance to N(0,1), and log-log rate fits.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "fou/constants.hpp"
#include "fou/error.hpp"
#include "fou/fgn.hpp"
#include "fou/process.hpp"
#include "fou/rng.hpp"

namespace fou {

enum class StatisticMethod { chaos_ratio, pathwise };

inline const char* to_string(StatisticMethod m) {
  return m == StatisticMethod::chaos_ratio ? "chaos_ratio" : "pathwise";
}

/// Grid choice per horizon: a fixed number of cells, or a fixed step.
struct Discretization {
  std::optional<std::size_t> cells;
  double step = 0.05;

  Grid grid_for(double horizon) const {
    return cells ? Grid(horizon, *cells) : Grid::with_step(horizon, step);
  }
};

struct MCConfig {
  double theta = 1.0;
  double hurst = 0.5;
  std::vector<double> t_list;
  Discretization disc;
  std::size_t replications = 1000;
  std::uint64_t master_seed = 42;
  StatisticMethod method = StatisticMethod::chaos_ratio;
  bool log_correction = true;  // only read at H = 3/4
  std::size_t threads = 0;     // 0: worker_count()

  void validate() const {
    ModelParams{theta, hurst, 1.0}.validate();
    if (replications < 1) throw DomainError("replications must be positive");
    for (double t : t_list) {
      if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("horizons must be positive");
    }
    for (std::size_t i = 1; i < t_list.size(); ++i) {
      if (!(t_list[i] > t_list[i - 1])) throw DomainError("horizons must be strictly increasing");
    }
    if (is_critical(hurst) && log_correction) {
      for (double t : t_list) {
        if (!(t > 1.0)) throw DomainError("log normalization at H = 3/4 needs T > 1");
      }
    }
  }
};

struct MCHorizonRecord {
  double horizon = 0.0;
  std::size_t cells = 0;
  std::vector<double> samples;
  double ks_distance = 0.0;
  double sample_mean = 0.0;
  double sample_var = 0.0;
  std::size_t degenerate = 0;
};

struct RateFit {
  double beta_hat = 0.0;
  double c_hat = 0.0;
  double r_squared = 0.0;
};

struct MCReport {
  MCConfig config;
  std::vector<MCHorizonRecord> records;
  std::optional<RateFit> fitted;
};

/// Phi(z) through erfc, accurate in both tails.
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

/// sup_z |F_N(z) - Phi(z)| for the empirical CDF of the samples.
inline double ks_distance(std::span<const double> samples) {
  if (samples.empty()) throw DomainError("ks_distance needs at least one sample");
  std::vector<double> z(samples.begin(), samples.end());
  std::sort(z.begin(), z.end());
  const double n = static_cast<double>(z.size());
  double d = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double phi = normal_cdf(z[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - phi, phi - static_cast<double>(i) / n});
  }
  return d;
}

/// OLS of log(distance) on log(T); beta_hat = -slope, c_hat = exp(intercept).
inline RateFit rate_fit(std::span<const std::pair<double, double>> rows) {
  if (rows.size() < 3) throw DomainError("rate_fit needs at least 3 rows");
  double sx = 0.0, sy = 0.0;
  for (const auto& [t, d] : rows) {
    if (!(t > 0.0) || !(d > 0.0)) throw DomainError("rate_fit needs positive horizons and distances");
    sx += std::log(t);
    sy += std::log(d);
  }
  const double m = static_cast<double>(rows.size());
  const double mx = sx / m, my = sy / m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [t, d] : rows) {
    const double dx = std::log(t) - mx, dy = std::log(d) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 1e-14 * std::max(1.0, mx * mx))) throw NumericalError("rate_fit: all horizons are equal");
  const double slope = sxy / sxx;
  const double r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return {-slope, std::exp(my - slope * mx), r2};
}

/// FOU_THREADS if set to a positive integer, else the hardware concurrency.
inline std::size_t worker_count() {
  if (const char* env = std::getenv("FOU_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace detail {

inline void moments(std::span<const double> x, double& mean, double& var) {
  const double n = static_cast<double>(x.size());
  mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  var = x.size() > 1 ? ss / (n - 1.0) : 0.0;
}

/// Fills out[r] for every replication; out[r] is NaN for degenerate paths.
/// Output depends only on the seeds, not on which worker ran which index.
inline void replicate(const MCConfig& cfg, std::size_t t_index, const Grid& grid, std::vector<double>& out) {
  const ModelParams p{cfg.theta, cfg.hurst, grid.horizon()};
  const FgnSampler sampler(grid, p.hurst);
  std::optional<ChaosRatio> chaos;
  double trace = 0.0;
  double scale = 0.0;
  if (cfg.method == StatisticMethod::chaos_ratio) {
    chaos.emplace(p, grid, b_t_closed_form(p), cfg.log_correction);
  } else {
    trace = discrete_skorohod_trace(grid, p);
    scale = statistic_scale(p, cfg.log_correction);
  }

  const std::size_t reps = out.size();
  const std::size_t workers = std::min(cfg.threads ? cfg.threads : worker_count(), reps);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_lock;

  auto work = [&] {
    std::vector<double> xi(grid.cells());
    try {
      for (std::size_t r = next++; r < reps; r = next++) {
        NormalStream normals(stream_seed(cfg.master_seed, t_index, r));
        sampler.sample_into(xi, normals);
        try {
          if (chaos) {
            out[r] = chaos->statistic(xi);
          } else {
            const FouPath path = simulate_fou(grid, p, NoisePath{grid, p.hurst, xi, 0});
            out[r] = scale * (estimate_pathwise(path, trace).theta_hat - p.theta);
          }
        } catch (const NumericalError&) {
          out[r] = std::numeric_limits<double>::quiet_NaN();
        }
      }
    } catch (...) {
      std::lock_guard<std::mutex> hold(failure_lock);
      if (!failure) failure = std::current_exception();
      next = reps;
    }
  };

  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace detail

/// Replicates the normalized statistic at every horizon of the config.
///
/// Replication r at horizon index i draws its noise from
/// stream_seed(master_seed, i, r). Degenerate paths (int X^2 ~ 0 or a
/// vanishing chaos denominator) are dropped from the sample; more than 0.1%
/// of them aborts the run.
inline MCReport run(const MCConfig& cfg) {
  cfg.validate();
  MCReport report{cfg, {}, std::nullopt};
  report.records.reserve(cfg.t_list.size());
  for (std::size_t ti = 0; ti < cfg.t_list.size(); ++ti) {
    const Grid grid = cfg.disc.grid_for(cfg.t_list[ti]);
    std::vector<double> raw(cfg.replications);
    detail::replicate(cfg, ti, grid, raw);

    MCHorizonRecord rec;
    rec.horizon = cfg.t_list[ti];
    rec.cells = grid.cells();
    rec.samples.reserve(raw.size());
    for (double v : raw) {
      if (std::isfinite(v)) rec.samples.push_back(v);
    }
    rec.degenerate = raw.size() - rec.samples.size();
    if (static_cast<double>(rec.degenerate) > 1e-3 * static_cast<double>(raw.size())) {
      throw NumericalError("too many degenerate paths at T = " + std::to_string(rec.horizon) + ": " +
                           std::to_string(rec.degenerate) + " of " + std::to_string(raw.size()));
    }
    if (rec.samples.empty()) throw NumericalError("no usable paths at T = " + std::to_string(rec.horizon));
    rec.ks_distance = ks_distance(rec.samples);
    detail::moments(rec.samples, rec.sample_mean, rec.sample_var);
    report.records.push_back(std::move(rec));
  }
  if (report.records.size() >= 3) {
    std::vector<std::pair<double, double>> rows;
    for (const auto& r : report.records) rows.emplace_back(r.horizon, r.ks_distance);
    try {
      report.fitted = rate_fit(rows);
    } catch (const DomainError&) {
      // a zero distance leaves the fit undefined; the report stays descriptive
    }
  }
  return report;
}

}  // namespace fou
