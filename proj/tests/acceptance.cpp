// Acceptance checks, one per criterion id. Usage: fou_acceptance <id>...
// Each check prints "criterion <id>: PASS|FAIL <summary>" and the process
// exits nonzero if any requested check fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "fou/bounds.hpp"
#include "fou/constants.hpp"
#include "fou/fgn.hpp"
#include "fou/hilbert.hpp"
#include "fou/montecarlo.hpp"
#include "fou/process.hpp"

using namespace fou;

namespace {

struct Outcome {
  bool pass;
  std::string summary;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string list(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
  return s + "]";
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] < v[i - 1])) return false;
  }
  return true;
}

double spread(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi / *lo;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// ---------------------------------------------------------------------------

Outcome quadrature_vs_closed_form() {
  const auto t0 = std::chrono::steady_clock::now();
  const ModelParams p{1.0, 0.5, 10.0};
  const Grid g(10.0, 2048);
  const double got = norm2_h2(kernel_f(p, g), GramWeights(g, 0.5));
  const double ref = (10.0 - (1.0 - std::exp(-20.0)) / 2.0) / (4.0 * sigma2_h(0.5) * 10.0);
  const double rel = std::abs(got / ref - 1.0);
  const double secs = seconds_since(t0);
  return {rel <= 5e-3 && secs < 30.0,
          "|f_T|^2 = " + fmt(got) + " vs " + fmt(ref) + " (rel " + fmt(rel) + "), " + fmt(secs) + " s"};
}

Outcome b_t_consistency() {
  bool pass = true;
  std::string s;
  for (double h : {0.5, 0.6}) {
    const ModelParams p{1.0, h, 50.0};
    const double closed = b_t_closed_form(p);
    const double trace = b_t_trace_form(p, Grid(50.0, 2048));
    const double rel = std::abs(trace / closed - 1.0);
    pass = pass && rel <= 0.01;
    s += "H=" + fmt(h) + ": closed " + fmt(closed) + " trace " + fmt(trace) + " (rel " + fmt(rel) + "); ";
    std::vector<double> scaled;
    const double a = stationary_variance(p);
    for (double t : {50.0, 100.0, 200.0}) scaled.push_back(t * std::abs(b_t_closed_form(p.with_horizon(t)) - a));
    pass = pass && spread(scaled) < 2.0;
    s += "T|b_T-a| " + list(scaled) + "; ";
  }
  return {pass, s};
}

Outcome two_norm_f_rate() {
  const double h = 0.6;
  const ModelParams p{1.0, h, 25.0};
  const double a = stationary_variance(p);
  std::vector<double> scaled;
  for (double t : {25.0, 50.0, 100.0}) {
    const Grid g = Grid::with_step(t, 0.025);
    const double nf = norm2_h2(kernel_f(p.with_horizon(t), g), GramWeights(g, h));
    scaled.push_back(std::abs(2.0 * nf - a * a) * std::pow(t, 3.0 - 4.0 * h));
  }
  bool pass = true;
  std::vector<double> ratios;
  for (std::size_t i = 1; i < scaled.size(); ++i) {
    ratios.push_back(scaled[i] / scaled[i - 1]);
    pass = pass && ratios.back() >= 0.5 && ratios.back() <= 2.0;
  }
  return {pass, "gap*T^(3-4H) " + list(scaled) + ", ratios " + list(ratios)};
}

Outcome g_limits() {
  bool pass = true;
  std::string s;
  for (double h : {0.5, 0.6}) {
    const ModelParams p{1.0, h, 50.0};
    const double g_lim = delta_h(h) / 2.0;
    const double fg_lim = std::sqrt(1.0 / sigma2_h(h)) * g_lim;
    std::vector<double> fg, gg;
    double tg = 0.0, tfg = 0.0;
    for (double t : {50.0, 100.0, 200.0}) {
      const BoundIngredients in = bound_ingredients(p.with_horizon(t), Grid(t, 2048));
      fg.push_back(std::sqrt(t) * in.norm_f1g);
      gg.push_back(std::sqrt(t) * in.norm_g1g);
      tg = t * in.norm_g2;
      tfg = std::sqrt(t) * in.inner_fg;
    }
    const bool ok = std::abs(tg / g_lim - 1.0) <= 0.1 && std::abs(tfg / fg_lim - 1.0) <= 0.1 &&
                    strictly_decreasing(fg) && strictly_decreasing(gg);
    pass = pass && ok;
    s += "H=" + fmt(h) + ": T|g|^2/limit " + fmt(tg / g_lim) + ", sqrtT<f,g>/limit " + fmt(tfg / fg_lim) +
         ", sqrtT|f(x)g| " + list(fg) + ", sqrtT|g(x)g| " + list(gg) + "; ";
  }
  return {pass, s};
}

Outcome h_limit() {
  bool pass = true;
  std::string s;
  for (double h : {0.5, 0.75}) {
    std::vector<double> v;
    for (double t : {25.0, 50.0, 100.0}) {
      const ModelParams p{1.0, h, t};
      const Grid g(t, 2048);
      v.push_back(norm2_h2(kernel_h(p, g), GramWeights(g, h)) / t);
    }
    pass = pass && strictly_decreasing(v);
    s += "H=" + fmt(h) + ": |h|^2/T " + list(v) + "; ";
  }
  return {pass, s};
}

Outcome contraction_trend() {
  bool pass = true;
  std::string s;
  for (double h : {0.55, 0.7}) {
    const double rate = h < kHurstBorder ? 0.5 : 3.0 - 4.0 * h;
    std::vector<double> v;
    for (double t : {25.0, 50.0, 100.0, 200.0}) {
      const ModelParams p{1.0, h, t};
      const Grid g(t, 2048);
      const KernelMatrix f = kernel_f(p, g);
      v.push_back(TensorGeometry(GramWeights(g, h)).contraction_norm(f, f) * std::pow(t, rate));
    }
    pass = pass && spread(v) < 3.0;
    s += "H=" + fmt(h) + ": |f(x)f|*T^" + fmt(rate) + " " + list(v) + " (max/min " + fmt(spread(v)) + "); ";
  }
  return {pass, s};
}

Outcome psi_decreasing() {
  bool pass = true;
  std::string s;
  for (double h : {0.5, 0.6, 0.7}) {
    std::vector<double> v;
    for (double t : {25.0, 50.0, 100.0, 200.0}) v.push_back(psi_terms({1.0, h, t}, Grid(t, 2048)).max_psi);
    pass = pass && strictly_decreasing(v);
    s += "H=" + fmt(h) + ": max psi " + list(v) + "; ";
  }
  return {pass, s};
}

Outcome i2_isometry() {
  const auto t0 = std::chrono::steady_clock::now();
  bool pass = true;
  std::string s;
  for (double h : {0.5, 0.75}) {
    const ModelParams p{1.0, h, 10.0};
    const Grid g(10.0, 256);
    const GramWeights w(g, h);
    const KernelMatrix f = kernel_f(p, g);
    const FgnSampler sampler(g, h);
    const int reps = 100000;
    double sum = 0.0, sum2 = 0.0;
    for (int r = 0; r < reps; ++r) {
      const double v = i2(f, sampler.sample(stream_seed(2024, 0, static_cast<std::uint64_t>(r))), w);
      sum += v;
      sum2 += v * v;
    }
    const double mean = sum / reps;
    const double var = (sum2 - reps * mean * mean) / (reps - 1);
    const double target = 2.0 * norm2_h2(f, w);
    const double rel = std::abs(var / target - 1.0);
    pass = pass && rel <= 0.05;
    s += "H=" + fmt(h) + ": Var " + fmt(var) + " vs 2|f|^2 " + fmt(target) + " (rel " + fmt(rel) + "); ";
  }
  const double secs = seconds_since(t0);
  pass = pass && secs < 300.0;
  return {pass, s + fmt(secs) + " s"};
}

Outcome distributional() {
  MCConfig cfg;
  cfg.theta = 1.0;
  cfg.hurst = 0.5;
  cfg.disc.step = 0.05;
  cfg.replications = 5000;

  cfg.t_list = {50.0, 100.0, 200.0};
  std::map<double, std::vector<double>> by_t;
  double ks200 = 0.0;
  for (std::uint64_t seed : {11u, 12u, 13u, 14u, 15u}) {
    cfg.master_seed = seed;
    const MCReport r = run(cfg);
    for (const auto& rec : r.records) by_t[rec.horizon].push_back(rec.ks_distance);
    if (seed == 11u) ks200 = r.records.back().ks_distance;
  }
  std::vector<double> medians;
  for (double t : cfg.t_list) medians.push_back(median(by_t[t]));
  bool nonincreasing = true;
  for (std::size_t i = 1; i < medians.size(); ++i) nonincreasing = nonincreasing && medians[i] <= medians[i - 1];

  cfg.t_list = {50.0, 100.0, 200.0, 400.0};
  cfg.replications = 10000;
  cfg.master_seed = 42;
  const MCReport fit = run(cfg);
  std::vector<double> ks;
  for (const auto& rec : fit.records) ks.push_back(rec.ks_distance);
  const double beta = fit.fitted->beta_hat;

  const bool pass = ks200 <= 0.05 && nonincreasing && beta >= 0.3 && beta <= 0.7;
  return {pass, "ks(T=200) " + fmt(ks200) + ", median ks over 5 seeds " + list(medians) + ", N=1e4 ks " + list(ks) +
                    " beta_hat " + fmt(beta) + " (r2 " + fmt(fit.fitted->r_squared) + ")"};
}

Outcome log_normalization() {
  MCConfig cfg;
  cfg.theta = 1.0;
  cfg.hurst = 0.75;
  cfg.t_list = {400.0};
  cfg.replications = 5000;
  cfg.disc.step = 0.05;
  cfg.log_correction = true;
  const double with_log = run(cfg).records[0].sample_var;
  cfg.log_correction = false;
  const double without = run(cfg).records[0].sample_var;
  const bool pass = with_log >= 0.8 && with_log <= 1.2 && without > 1.2;
  // Not part of the verdict: the same variance at ten times the sample size,
  // which shows how close to the upper edge the population value sits.
  cfg.log_correction = true;
  cfg.replications = 50000;
  cfg.master_seed = 99;
  const double reference = run(cfg).records[0].sample_var;
  return {pass, "variance with log T factor " + fmt(with_log) + " (target [0.8, 1.2]), without " + fmt(without) +
                    " (target > 1.2); reference variance at N=5e4: " + fmt(reference)};
}

Outcome ratio_identity() {
  // One fine noise path per replication; the coarse grid sums it 4:1 so both
  // grids see the same Brownian path.
  const double big_t = 50.0;
  const ModelParams p{1.0, 0.5, big_t};
  const Grid coarse(big_t, 1u << 11), fine(big_t, 1u << 13);
  const ChaosRatio chaos_c(p, coarse, b_t_closed_form(p)), chaos_f(p, fine, b_t_closed_form(p));
  const FgnSampler sampler(fine, 0.5);
  const double scale = statistic_scale(p);
  double num_c = 0.0, num_f = 0.0, den_c = 0.0, den_f = 0.0;
  for (std::uint64_t r = 0; r < 400; ++r) {
    const NoisePath nf = sampler.sample(stream_seed(77, 0, r));
    NoisePath nc{coarse, 0.5, std::vector<double>(coarse.cells(), 0.0), nf.seed};
    for (std::size_t k = 0; k < fine.cells(); ++k) nc.xi[k / 4] += nf.xi[k];
    const double cf = chaos_f.statistic(nf.xi), cc = chaos_c.statistic(nc.xi);
    const double pf = scale * (estimate_pathwise(simulate_fou(fine, p, nf)).theta_hat - 1.0);
    const double pc = scale * (estimate_pathwise(simulate_fou(coarse, p, nc)).theta_hat - 1.0);
    num_f += (pf - cf) * (pf - cf);
    num_c += (pc - cc) * (pc - cc);
    den_f += cf * cf;
    den_c += cc * cc;
  }
  const double gap_c = std::sqrt(num_c / den_c), gap_f = std::sqrt(num_f / den_f);
  const double ratio = gap_f / gap_c;
  return {ratio >= 0.25 && ratio <= 0.75, "relative gap dt=T/2^11 " + fmt(gap_c) + ", dt=T/2^13 " + fmt(gap_f) +
                                              ", ratio " + fmt(ratio) + " (target [0.25, 0.75])"};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const std::vector<std::string> commands{
      "kolmogorov --hurst 0.6 --t 10,20,40 --reps 400 --dt 0.1 --seed 9",
      "kolmogorov --hurst 0.5 --t 20 --reps 500 --method pathwise --seed 9",
      "rate-fit --hurst 0.75 --t 5,10,20 --reps 300 --dt 0.1 --seed 3",
      "estimate --hurst 0.7 --t 10,20 --dt 0.05 --seed 5",
      "simulate --hurst 0.65 --t 5 --n 200 --seed 5",
      "bounds --hurst 0.7 --t 5,10 --n 128",
      "asymptotics --hurst 0.6 --t 5,10 --n 128 --format json",
  };
  const auto dir = std::filesystem::temp_directory_path() / ("fou_accept_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  bool pass = true;
  std::string s;
  int idx = 0;
  for (const auto& cmd : commands) {
    std::vector<std::string> outputs;
    for (const char* threads : {"1", "8", "8"}) {
      const auto out = dir / ("run" + std::to_string(idx++) + ".out");
      const std::string line = std::string("FOU_THREADS=") + threads + " " + FOU_CLI_PATH + " " + cmd +
                               " --out " + out.string() + " 2>/dev/null";
      const int rc = std::system(line.c_str());
      if (rc != 0) {
        pass = false;
        s += "'" + cmd + "' exited with " + std::to_string(rc) + "; ";
      }
      outputs.push_back(slurp(out));
    }
    const bool same = !outputs[0].empty() && outputs[0] == outputs[1] && outputs[1] == outputs[2];
    pass = pass && same;
    s += std::string(same ? "identical" : "DIFFERENT") + ": " + cmd.substr(0, cmd.find(' ')) + "; ";
  }
  std::filesystem::remove_all(dir);
  return {pass, s};
}

const std::map<int, std::pair<std::string, std::function<Outcome()>>>& registry() {
  static const std::map<int, std::pair<std::string, std::function<Outcome()>>> r{
      {1, {"quadrature vs closed form", quadrature_vs_closed_form}},
      {2, {"b_T consistency", b_t_consistency}},
      {3, {"2|f_T|^2 rate", two_norm_f_rate}},
      {4, {"g_T limits", g_limits}},
      {5, {"h_T limit", h_limit}},
      {6, {"f_T contraction trend", contraction_trend}},
      {7, {"psi terms decreasing", psi_decreasing}},
      {8, {"I2 isometry", i2_isometry}},
      {9, {"Kolmogorov distance, H = 1/2", distributional}},
      {10, {"log normalization at H = 3/4", log_normalization}},
      {11, {"per-path ratio identity", ratio_identity}},
      {12, {"determinism across thread counts", determinism}},
  };
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
  if (ids.empty()) {
    for (const auto& [id, entry] : registry()) ids.push_back(id);
  }
  int failures = 0;
  for (int id : ids) {
    const auto it = registry().find(id);
    if (it == registry().end()) {
      std::cerr << "unknown criterion " << id << '\n';
      return 2;
    }
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = it->second.second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << " " << it->second.first << " | "
              << o.summary << " [" << fmt(seconds_since(t0)) << " s]" << std::endl;
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
