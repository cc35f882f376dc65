#pragma once

// Command-line front end: argument parsing, dispatch, CSV/JSON emission.
// Needs CLI11 and nlohmann/json on the include path.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fou/bounds.hpp"
#include "fou/constants.hpp"
#include "fou/error.hpp"
#include "fou/fgn.hpp"
#include "fou/montecarlo.hpp"
#include "fou/process.hpp"
#include "fou/rng.hpp"

namespace fou::cli {

enum class Format { csv, json };

enum ExitCode : int { kOk = 0, kUsage = 2, kNumerical = 3, kIo = 4 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;
  double theta = 1.0;
  double hurst = 0.5;
  std::vector<double> t_list;
  std::optional<std::size_t> cells;
  double dt = 0.05;
  std::size_t reps = 1000;
  std::uint64_t seed = 42;
  double eps = 0.01;
  std::string out;  // empty: stdout
  std::string in;   // rate-fit input, empty: run kolmogorov first
  Format format = Format::csv;
  std::string method;  // empty: the command's default
  bool log_correction = true;

  Discretization discretization() const { return {cells, dt}; }
};

inline std::string format_number(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

/// The value as printed, so JSON and CSV carry the same 12 digits.
inline nlohmann::json json_number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return std::stod(format_number(v));
}

namespace detail {

inline std::vector<double> split_horizons(const std::vector<std::string>& raw) {
  std::vector<double> out;
  for (const auto& item : raw) {
    std::stringstream ss(item);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (tok.empty()) continue;
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size()) throw UsageError("--t: not a number: '" + tok + "'");
      out.push_back(v);
    }
  }
  return out;
}

inline void validate(const RunConfig& c) {
  try {
    check_hurst(c.hurst);
    ModelParams{c.theta, c.hurst, 1.0}.validate();
    if (c.cells && *c.cells < 2) throw DomainError("--n must be at least 2");
    if (!(c.dt > 0.0)) throw DomainError("--dt must be positive");
    if (c.reps < 1) throw DomainError("--reps must be positive");
    rate_exponent(c.hurst, c.eps);
    for (double t : c.t_list) {
      if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("--t values must be positive");
    }
    for (std::size_t i = 1; i < c.t_list.size(); ++i) {
      if (!(c.t_list[i] > c.t_list[i - 1])) throw DomainError("--t values must be strictly increasing");
    }
    if (c.command == "simulate" && c.t_list.size() > 1) throw DomainError("simulate takes a single --t");
    if (c.command == "kolmogorov" || c.command == "rate-fit" || c.command == "estimate") {
      if (!c.method.empty() && c.method != "chaos_ratio" && c.method != "pathwise") {
        throw DomainError("--method must be chaos_ratio or pathwise");
      }
    } else if (!c.method.empty()) {
      throw DomainError("--method does not apply to " + c.command);
    }
    if (is_critical(c.hurst) && c.log_correction) {
      for (double t : c.t_list) {
        if (!(t > 1.0) && (c.command == "kolmogorov" || c.command == "rate-fit")) {
          throw DomainError("log normalization at H = 3/4 needs T > 1");
        }
      }
    }
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
}

}  // namespace detail

/// Parses argv into a validated RunConfig. Throws UsageError on any problem;
/// for --help the message is the help text and `help` is set.
inline RunConfig parse_args(int argc, const char* const* argv, bool* help = nullptr) {
  RunConfig c;
  std::vector<std::string> horizons;
  std::string format = "csv";

  CLI::App app{"Fractional Ornstein-Uhlenbeck drift estimation: bounds and Monte Carlo", "fou"};
  app.require_subcommand(1, 1);
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--theta", c.theta, "drift parameter theta > 0")->capture_default_str();
    sub->add_option("--hurst", c.hurst, "Hurst index in [0.5, 0.75]")->capture_default_str();
    sub->add_option("--t", horizons, "horizon(s), repeatable or comma separated")->delimiter(',');
    auto* dt = sub->add_option("--dt", c.dt, "grid step")->capture_default_str();
    auto* n = sub->add_option("--n", c.cells, "cells per horizon");
    dt->excludes(n);
    sub->add_option("--reps", c.reps, "Monte Carlo replications")->capture_default_str();
    sub->add_option("--seed", c.seed, "master seed")->capture_default_str();
    sub->add_option("--eps", c.eps, "rate exponent slack at H = 5/8")->capture_default_str();
    sub->add_option("--out", c.out, "output path (default stdout)");
    sub->add_option("--format", format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
  };
  for (const char* name : {"simulate", "estimate", "bounds", "asymptotics", "kolmogorov", "rate-fit"}) {
    CLI::App* sub = app.add_subcommand(name);
    add_common(sub);
    if (std::string(name) == "estimate" || std::string(name) == "kolmogorov" || std::string(name) == "rate-fit") {
      sub->add_option("--method", c.method, "chaos_ratio or pathwise");
      sub->add_flag("!--no-log-correction", c.log_correction, "drop the log T factor at H = 3/4");
    }
    if (std::string(name) == "rate-fit") sub->add_option("--in", c.in, "kolmogorov CSV to fit");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    if (help) *help = true;
    throw UsageError(app.help());
  } catch (const CLI::CallForAllHelp&) {
    if (help) *help = true;
    throw UsageError(app.help());
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }
  for (const auto* sub : app.get_subcommands()) c.command = sub->get_name();
  c.t_list = detail::split_horizons(horizons);
  c.format = format == "json" ? Format::json : Format::csv;
  detail::validate(c);
  return c;
}

/// One-line description of every resolved setting, defaults included.
inline std::string describe(const RunConfig& c) {
  std::ostringstream os;
  os << "fou " << c.command << ": theta=" << format_number(c.theta) << " hurst=" << format_number(c.hurst)
     << " t=[";
  for (std::size_t i = 0; i < c.t_list.size(); ++i) os << (i ? "," : "") << format_number(c.t_list[i]);
  os << "]";
  if (c.cells) {
    os << " n=" << *c.cells;
  } else {
    os << " dt=" << format_number(c.dt);
  }
  os << " reps=" << c.reps << " seed=" << c.seed << " eps=" << format_number(c.eps)
     << " method=" << (c.method.empty() ? "default" : c.method)
     << " log_correction=" << (c.log_correction ? "on" : "off")
     << " format=" << (c.format == Format::json ? "json" : "csv") << " out=" << (c.out.empty() ? "-" : c.out)
     << " threads=" << worker_count();
  return os.str();
}

// ----- tables ----------------------------------------------------------------

/// Rows of named values emitted as CSV (header + rows) or a JSON array of
/// objects with the same keys. Cells hold either a number or text.
class Table {
 public:
  struct Cell {
    std::optional<double> number;
    std::string text;
  };

  explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void add(std::vector<Cell> row) {
    if (row.size() != columns_.size()) throw std::logic_error("table row width mismatch");
    rows_.push_back(std::move(row));
  }

  const std::vector<std::string>& columns() const { return columns_; }
  std::size_t size() const { return rows_.size(); }

  void write_csv(std::ostream& os) const {
    for (std::size_t j = 0; j < columns_.size(); ++j) os << (j ? "," : "") << columns_[j];
    os << '\n';
    for (const auto& row : rows_) {
      for (std::size_t j = 0; j < row.size(); ++j) {
        os << (j ? "," : "");
        if (row[j].number) {
          if (!std::isnan(*row[j].number)) os << format_number(*row[j].number);
        } else {
          os << row[j].text;
        }
      }
      os << '\n';
    }
  }

  nlohmann::json to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& row : rows_) {
      nlohmann::json obj = nlohmann::json::object();
      for (std::size_t j = 0; j < row.size(); ++j) {
        obj[columns_[j]] = row[j].number ? json_number(*row[j].number) : nlohmann::json(row[j].text);
      }
      arr.push_back(std::move(obj));
    }
    return arr;
  }

  void write(std::ostream& os, Format f) const {
    if (f == Format::csv) {
      write_csv(os);
    } else {
      os << to_json().dump(2) << '\n';
    }
  }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

inline Table::Cell num(double v) { return {v, {}}; }
inline Table::Cell num(std::size_t v) { return {static_cast<double>(v), {}}; }
inline Table::Cell text(std::string s) { return {std::nullopt, std::move(s)}; }

inline Table kolmogorov_table(const MCReport& report) {
  Table t({"T", "ks_distance", "sample_mean", "sample_var", "reps", "seed"});
  for (const auto& r : report.records) {
    t.add({num(r.horizon), num(r.ks_distance), num(r.sample_mean), num(r.sample_var),
           num(r.samples.size()), text(std::to_string(report.config.master_seed))});
  }
  return t;
}

inline Table bounds_table(const std::vector<std::pair<double, BoundTerms>>& rows) {
  Table t({"T", "psi1", "psi2", "psi3", "max_psi", "b_T", "norm_f2", "norm_f1f", "norm_f1g", "inner_fg",
           "norm_g2", "norm_g1g"});
  for (const auto& [horizon, b] : rows) {
    const auto& in = b.ingredients;
    t.add({num(horizon), num(b.psi1), num(b.psi2), num(b.psi3), num(b.max_psi), num(in.b_t), num(in.norm_f2),
           num(in.norm_f1f), num(in.norm_f1g), num(in.inner_fg), num(in.norm_g2), num(in.norm_g1g)});
  }
  return t;
}

inline Table asymptotics_table(const std::vector<AsymptoticsRow>& rows) {
  Table t({"T", "quantity", "measured", "paper_limit", "ratio"});
  for (const auto& row : rows) {
    for (const auto& q : row.quantities) {
      t.add({num(row.horizon), text(q.name), num(q.measured), num(q.limit), num(q.ratio())});
    }
  }
  return t;
}

inline Table rate_fit_table(const RateFit& fit, double hurst, double eps) {
  const RateExponent beta = rate_exponent(hurst, eps);
  Table t({"beta_hat", "c_hat", "r_squared", "beta_theory", "log_corrected"});
  t.add({num(fit.beta_hat), num(fit.c_hat), num(fit.r_squared), num(beta.beta),
         text(beta.log_corrected ? "true" : "false")});
  return t;
}

/// (T, ks_distance) pairs from a kolmogorov CSV.
inline std::vector<std::pair<double, double>> read_kolmogorov_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw UsageError("rate-fit: empty input");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, ',')) header.push_back(col);
  }
  std::size_t ti = header.size(), di = header.size();
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == "T") ti = j;
    if (header[j] == "ks_distance") di = j;
  }
  if (ti == header.size() || di == header.size()) throw UsageError("rate-fit: input lacks T or ks_distance");
  std::vector<std::pair<double, double>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() <= std::max(ti, di)) throw UsageError("rate-fit: short row: " + line);
    try {
      rows.emplace_back(std::stod(cells[ti]), std::stod(cells[di]));
    } catch (const std::exception&) {
      throw UsageError("rate-fit: bad number in row: " + line);
    }
  }
  return rows;
}

// ----- commands --------------------------------------------------------------

namespace detail {

inline StatisticMethod statistic_method(const RunConfig& c) {
  return c.method == "pathwise" ? StatisticMethod::pathwise : StatisticMethod::chaos_ratio;
}

inline MCConfig mc_config(const RunConfig& c) {
  MCConfig m;
  m.theta = c.theta;
  m.hurst = c.hurst;
  m.t_list = c.t_list;
  m.disc = c.discretization();
  m.replications = c.reps;
  m.master_seed = c.seed;
  m.method = statistic_method(c);
  m.log_correction = c.log_correction;
  return m;
}

inline Table simulate(const RunConfig& c) {
  Table t({"t", "x"});
  if (c.t_list.empty()) return t;
  const ModelParams p{c.theta, c.hurst, c.t_list.front()};
  const Grid grid = c.discretization().grid_for(p.horizon);
  const FouPath path = simulate_fou(grid, p, sample_fgn(grid, p.hurst, stream_seed(c.seed, 0, 0)));
  for (std::size_t k = 0; k < path.x.size(); ++k) t.add({num(grid.node(k)), num(path.x[k])});
  return t;
}

inline Table estimate(const RunConfig& c) {
  Table t({"T", "theta_hat", "statistic", "method", "seed"});
  for (std::size_t i = 0; i < c.t_list.size(); ++i) {
    const ModelParams p{c.theta, c.hurst, c.t_list[i]};
    const Grid grid = c.discretization().grid_for(p.horizon);
    NoisePath noise = sample_fgn(grid, p.hurst, stream_seed(c.seed, i, 0));
    const double scale = statistic_scale(p, c.log_correction);
    double statistic = 0.0;
    if (statistic_method(c) == StatisticMethod::chaos_ratio) {
      statistic = ChaosRatio(p, grid, b_t_closed_form(p), c.log_correction).statistic(noise.xi);
    } else {
      const FouPath path = simulate_fou(grid, p, std::move(noise));
      statistic = scale * (estimate_pathwise(path).theta_hat - p.theta);
    }
    const std::string method = c.method.empty() ? "chaos_ratio" : c.method;
    t.add({num(p.horizon), num(p.theta + statistic / scale), num(statistic), text(method),
           text(std::to_string(stream_seed(c.seed, i, 0)))});
  }
  return t;
}

inline Table bounds(const RunConfig& c) {
  std::vector<std::pair<double, BoundTerms>> rows;
  for (double horizon : c.t_list) {
    const ModelParams p{c.theta, c.hurst, horizon};
    rows.emplace_back(horizon, psi_terms(p, c.discretization().grid_for(horizon)));
  }
  return bounds_table(rows);
}

inline Table asymptotics(const RunConfig& c) {
  const GridPolicy policy = c.cells ? GridPolicy::with_cells(*c.cells) : GridPolicy::with_step(c.dt);
  const ModelParams p{c.theta, c.hurst, c.t_list.empty() ? 1.0 : c.t_list.front()};
  return asymptotics_table(asymptotics_report(p, c.t_list, policy, c.eps));
}

inline Table rate_fit_command(const RunConfig& c) {
  std::vector<std::pair<double, double>> rows;
  if (!c.in.empty()) {
    std::ifstream is(c.in);
    if (!is) throw IoError("cannot read " + c.in);
    rows = read_kolmogorov_csv(is);
  } else {
    for (const auto& r : run(mc_config(c)).records) rows.emplace_back(r.horizon, r.ks_distance);
  }
  if (rows.size() < 3) throw UsageError("rate-fit needs at least 3 horizons");
  return rate_fit_table(rate_fit(rows), c.hurst, c.eps);
}

}  // namespace detail

inline Table execute(const RunConfig& c) {
  if (c.command == "simulate") return detail::simulate(c);
  if (c.command == "estimate") return detail::estimate(c);
  if (c.command == "bounds") return detail::bounds(c);
  if (c.command == "asymptotics") return detail::asymptotics(c);
  if (c.command == "kolmogorov") return kolmogorov_table(run(detail::mc_config(c)));
  if (c.command == "rate-fit") return detail::rate_fit_command(c);
  throw UsageError("unknown command " + c.command);
}

/// Full CLI run: parse, print the resolved config to `err`, compute, emit.
inline int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    bool help = false;
    try {
      cfg = parse_args(argc, argv, &help);
    } catch (const UsageError& e) {
      (help ? out : err) << e.what() << (help ? "" : "\n");
      return help ? kOk : kUsage;
    }
    err << describe(cfg) << '\n';

    std::ofstream file;
    if (!cfg.out.empty()) {
      file.open(cfg.out, std::ios::out | std::ios::trunc);
      if (!file) throw IoError("cannot open " + cfg.out + " for writing");
    }
    const Table table = execute(cfg);
    std::ostream& sink = cfg.out.empty() ? out : file;
    table.write(sink, cfg.format);
    sink.flush();
    if (!sink) throw IoError("write failed");
    return kOk;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  }
}

}  // namespace fou::cli
