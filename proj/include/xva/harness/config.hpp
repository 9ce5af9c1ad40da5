#pragma once

// Flat key = value experiment configuration.
//
//   # comment
//   market.sigma = 0.25
//   fd.delta_x   = 2^-6
//   sweep.param  = fd.delta_x
//   sweep.values = 2^-2, 2^-4, 2^-6
//
// Numbers accept plain decimals, a^b and a/b. Unknown keys are rejected.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "xva/adjustments.hpp"
#include "xva/error.hpp"
#include "xva/fd.hpp"
#include "xva/heat_kernel.hpp"
#include "xva/market.hpp"
#include "xva/monte_carlo.hpp"

namespace xva::harness {

using KeyValues = std::map<std::string, std::string>;

inline const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "scenario",
      "market.sigma", "market.r", "market.q_s", "market.gamma_s",
      "market.lambda_b", "market.lambda_c", "market.r_b", "market.r_c",
      "market.s_x",
      "contract.strike", "contract.maturity",
      "collateral", "collateral.alpha", "collateral.beta", "collateral.t0",
      "diff.collateral", "diff.alpha", "diff.beta", "diff.t0",
      "solvers", "benchmark",
      "fd.x_min", "fd.x_max", "fd.delta_x", "fd.delta_tau", "fd.tau_end",
      "fd.stepping", "fd.rtol", "fd.atol", "fd.fixed_step",
      "hk.delta_s", "hk.delta_y", "hk.y_max", "hk.mode",
      "mc.n_paths", "mc.delta_s", "mc.seed", "mc.antithetic",
      "mc.replicates",
      "sweep.param", "sweep.values",
      "points", "points.spot", "points.tau_grid", "points.x_grid",
      "points.spot_grid",
      "output.path", "output.format", "output.timing",
      "threads",
  };
  return keys;
}

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double parse_plain(const std::string& s, const std::string& key) {
  double value = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || s.empty())
    throw config_error("key '" + key + "': cannot parse number '" + s + "'");
  return value;
}

}  // namespace detail

/// Parses "1.5", "2^-6" or "10/252".
inline double parse_number(std::string_view text, const std::string& key) {
  const std::string s = detail::trim(text);
  if (const auto pos = s.find('^'); pos != std::string::npos)
    return std::pow(detail::parse_plain(detail::trim(s.substr(0, pos)), key),
                    detail::parse_plain(detail::trim(s.substr(pos + 1)), key));
  if (const auto pos = s.find('/'); pos != std::string::npos) {
    const double den =
        detail::parse_plain(detail::trim(s.substr(pos + 1)), key);
    if (den == 0.0) throw config_error("key '" + key + "': division by zero");
    return detail::parse_plain(detail::trim(s.substr(0, pos)), key) / den;
  }
  return detail::parse_plain(s, key);
}

inline KeyValues parse_key_values(std::string_view text) {
  KeyValues kv;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw config_error("line " + std::to_string(lineno) +
                         ": expected key = value");
    const std::string key = detail::trim(t.substr(0, eq));
    if (!known_keys().contains(key))
      throw config_error("line " + std::to_string(lineno) + ": unknown key '" +
                         key + "'");
    if (kv.contains(key))
      throw config_error("line " + std::to_string(lineno) + ": duplicate key '" +
                         key + "'");
    kv[key] = detail::trim(t.substr(eq + 1));
  }
  return kv;
}

enum class SolverKind { analytic, fd, hk, mc };
enum class BenchmarkKind { automatic, analytic, hk, none };
enum class Format { csv, json };

inline std::string to_string(SolverKind s) {
  switch (s) {
    case SolverKind::analytic: return "analytic";
    case SolverKind::fd: return "fd";
    case SolverKind::hk: return "hk";
    case SolverKind::mc: return "mc";
  }
  return "?";
}

struct Sweep {
  std::string param;
  std::vector<std::string> values;
};

struct ExperimentConfig {
  std::string scenario = "custom";
  MarketParams market;
  ContractSpec contract;
  CollateralSpec collateral = NoCollateral{};
  std::optional<CollateralSpec> diff_collateral;  // value = u[collateral] - u[diff]
  std::vector<SolverKind> solvers;
  BenchmarkKind benchmark = BenchmarkKind::automatic;
  fd::GridSpec grid;
  bool grid_tau_end_set = false;
  fd::IntegratorOptions integrator;
  heat_kernel::QuadratureSpec quadrature;
  mc::McSpec mc;
  std::size_t mc_replicates = 1;
  std::optional<Sweep> sweep;
  std::vector<EvalPoint> points;
  std::string output_path;
  Format format = Format::csv;
  bool timing = false;
  std::size_t threads = 0;  // 0 -> hardware concurrency
  KeyValues raw;
};

namespace detail {

class Reader {
 public:
  explicit Reader(const KeyValues& kv) : kv_(kv) {}

  bool has(const std::string& key) const { return kv_.contains(key); }

  std::string str(const std::string& key, std::string fallback) const {
    const auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
  }

  double num(const std::string& key, double fallback) const {
    const auto it = kv_.find(key);
    return it == kv_.end() ? fallback : parse_number(it->second, key);
  }

  std::uint64_t count(const std::string& key, std::uint64_t fallback) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    const double d = parse_number(it->second, key);
    if (!(d >= 0.0) || d != std::floor(d) || d > 1.8e19)
      throw config_error("key '" + key + "' must be a non-negative integer");
    return static_cast<std::uint64_t>(d);
  }

  bool flag(const std::string& key, bool fallback) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    if (it->second == "true" || it->second == "1" || it->second == "on")
      return true;
    if (it->second == "false" || it->second == "0" || it->second == "off")
      return false;
    throw config_error("key '" + key + "' must be true or false");
  }

 private:
  const KeyValues& kv_;
};

inline CollateralSpec read_collateral(const Reader& r, const std::string& key,
                                      const std::string& prefix) {
  const std::string kind = r.str(key, "none");
  if (kind == "none") return NoCollateral{};
  if (kind == "one-way") return one_way_csa();
  if (kind == "two-way") return two_way_csa();
  if (kind == "linear")
    return LinearCollateral{r.num(prefix + "alpha", 0.0),
                            r.num(prefix + "beta", 0.0)};
  if (kind == "delayed") return DelayedCollateral{r.num(prefix + "t0", 10.0 / 252.0)};
  throw config_error("key '" + key + "': unknown collateral '" + kind +
                     "' (none, one-way, two-way, linear, delayed)");
}

inline void read_points(const Reader& r, std::vector<EvalPoint>& points) {
  auto pairs = [&](const std::string& key, bool spot) {
    if (!r.has(key)) return;
    for (const auto& item : split(r.str(key, ""), ',')) {
      const auto parts = split(item, ':');
      if (parts.size() != 2)
        throw config_error("key '" + key + "': expected tau:value, got '" +
                           item + "'");
      const double tau = parse_number(parts[0], key);
      const double val = parse_number(parts[1], key);
      if (spot && !(val > 0.0))
        throw config_error("key '" + key + "': spot must be positive");
      points.push_back({tau, spot ? std::log(val) : val});
    }
  };
  pairs("points", false);
  pairs("points.spot", true);

  auto range = [&](const std::string& key) {
    const auto parts = split(r.str(key, ""), ':');
    if (parts.size() != 3)
      throw config_error("key '" + key + "': expected start:stop:step");
    const double a = parse_number(parts[0], key);
    const double b = parse_number(parts[1], key);
    const double h = parse_number(parts[2], key);
    if (!(h > 0.0) || b < a)
      throw config_error("key '" + key + "': empty or invalid range");
    std::vector<double> out;
    const auto n = static_cast<std::size_t>(std::floor((b - a) / h + 1e-9));
    for (std::size_t i = 0; i <= n; ++i) out.push_back(a + static_cast<double>(i) * h);
    return out;
  };
  const bool has_x = r.has("points.x_grid");
  const bool has_s = r.has("points.spot_grid");
  if (r.has("points.tau_grid") || has_x || has_s) {
    if (!r.has("points.tau_grid") || has_x == has_s)
      throw config_error("points.tau_grid needs exactly one of points.x_grid "
                         "or points.spot_grid");
    const auto taus = range("points.tau_grid");
    const auto xs = range(has_x ? "points.x_grid" : "points.spot_grid");
    for (double t : taus)
      for (double x : xs) {
        if (has_s && !(x > 0.0))
          throw config_error("points.spot_grid: spot must be positive");
        points.push_back({t, has_s ? std::log(x) : x});
      }
  }
}

}  // namespace detail

/// Builds a typed configuration and checks every invariant.
inline ExperimentConfig parse_config(const KeyValues& kv) {
  const detail::Reader r(kv);
  ExperimentConfig cfg;
  cfg.raw = kv;
  cfg.scenario = r.str("scenario", "custom");

  auto& m = cfg.market;
  m.sigma = r.num("market.sigma", m.sigma);
  m.r = r.num("market.r", m.r);
  m.q_s = r.num("market.q_s", m.q_s);
  m.gamma_s = r.num("market.gamma_s", m.gamma_s);
  m.lambda_b = r.num("market.lambda_b", m.lambda_b);
  m.lambda_c = r.num("market.lambda_c", m.lambda_c);
  m.r_b = r.num("market.r_b", m.r_b);
  m.r_c = r.num("market.r_c", m.r_c);
  m.s_x = r.num("market.s_x", m.s_x);
  m.validate();

  cfg.contract.strike = r.num("contract.strike", cfg.contract.strike);
  cfg.contract.maturity = r.num("contract.maturity", cfg.contract.maturity);
  cfg.contract.validate();

  cfg.collateral = detail::read_collateral(r, "collateral", "collateral.");
  validate(cfg.collateral);
  if (r.has("diff.collateral")) {
    cfg.diff_collateral = detail::read_collateral(r, "diff.collateral", "diff.");
    validate(*cfg.diff_collateral);
  }

  for (const auto& s : detail::split(r.str("solvers", "analytic,fd,hk,mc"), ',')) {
    if (s == "analytic") cfg.solvers.push_back(SolverKind::analytic);
    else if (s == "fd") cfg.solvers.push_back(SolverKind::fd);
    else if (s == "hk") cfg.solvers.push_back(SolverKind::hk);
    else if (s == "mc") cfg.solvers.push_back(SolverKind::mc);
    else throw config_error("unknown solver '" + s + "' (analytic, fd, hk, mc)");
  }

  const std::string bench = r.str("benchmark", "auto");
  if (bench == "auto") cfg.benchmark = BenchmarkKind::automatic;
  else if (bench == "analytic") cfg.benchmark = BenchmarkKind::analytic;
  else if (bench == "hk") cfg.benchmark = BenchmarkKind::hk;
  else if (bench == "none") cfg.benchmark = BenchmarkKind::none;
  else throw config_error("unknown benchmark '" + bench + "'");

  detail::read_points(r, cfg.points);
  if (cfg.points.empty()) throw config_error("no evaluation points given");
  double max_tau = 0.0;
  for (const auto& pt : cfg.points) {
    pt.validate(cfg.contract);
    max_tau = std::max(max_tau, pt.tau);
  }

  auto& g = cfg.grid;
  g.x_min = r.num("fd.x_min", g.x_min);
  g.x_max = r.num("fd.x_max", g.x_max);
  g.delta_x = r.num("fd.delta_x", g.delta_x);
  g.delta_tau = r.num("fd.delta_tau", g.delta_tau);
  cfg.grid_tau_end_set = r.has("fd.tau_end");
  g.tau_end = r.num("fd.tau_end", max_tau > 0.0 ? max_tau : cfg.contract.maturity);
  const std::string stepping = r.str("fd.stepping", "adaptive");
  if (stepping == "adaptive") cfg.integrator.stepping = fd::Stepping::adaptive;
  else if (stepping == "fixed") cfg.integrator.stepping = fd::Stepping::fixed;
  else throw config_error("fd.stepping must be adaptive or fixed");
  cfg.integrator.rtol = r.num("fd.rtol", cfg.integrator.rtol);
  cfg.integrator.atol = r.num("fd.atol", cfg.integrator.atol);
  cfg.integrator.fixed_step = r.num("fd.fixed_step", cfg.integrator.fixed_step);
  if (!(cfg.integrator.rtol > 0.0) || !(cfg.integrator.atol > 0.0))
    throw config_error("fd tolerances must be positive");
  g.validate(cfg.market, cfg.contract);
  if (g.tau_end < max_tau)
    throw config_error("fd.tau_end is before the latest evaluation point");

  auto& q = cfg.quadrature;
  q.delta_s = r.num("hk.delta_s", q.delta_s);
  q.delta_y = r.num("hk.delta_y", q.delta_y);
  q.y_max = r.num("hk.y_max", q.y_max);
  const std::string mode = r.str("hk.mode", "corrected");
  if (mode == "corrected") q.mode = heat_kernel::DriftShift::corrected;
  else if (mode == "as_printed") q.mode = heat_kernel::DriftShift::as_printed;
  else throw config_error("hk.mode must be corrected or as_printed");
  if (!(q.delta_s > 0.0) || !(q.delta_y > 0.0) || !(q.y_max > 0.0))
    throw config_error("hk steps and y_max must be positive");

  cfg.mc.n_paths = r.count("mc.n_paths", cfg.mc.n_paths);
  cfg.mc.delta_s = r.num("mc.delta_s", cfg.mc.delta_s);
  cfg.mc.seed = r.count("mc.seed", cfg.mc.seed);
  cfg.mc.antithetic = r.flag("mc.antithetic", cfg.mc.antithetic);
  cfg.mc_replicates = r.count("mc.replicates", 1);
  if (cfg.mc_replicates < 1) throw config_error("mc.replicates must be >= 1");
  cfg.mc.validate();

  if (r.has("sweep.param") || r.has("sweep.values")) {
    Sweep sw;
    sw.param = r.str("sweep.param", "");
    if (sw.param.empty()) throw config_error("sweep.values given without sweep.param");
    if (!known_keys().contains(sw.param) || sw.param.starts_with("sweep.") ||
        sw.param.starts_with("output.") || sw.param == "scenario")
      throw config_error("sweep.param '" + sw.param +
                         "' is not a sweepable parameter");
    const std::string values = r.str("sweep.values", "");
    if (!values.empty())
      for (auto& v : detail::split(values, ','))
        if (!v.empty()) sw.values.push_back(v);
    if (sw.values.empty()) throw config_error("sweep.values is empty");
    cfg.sweep = std::move(sw);
  }

  cfg.output_path = r.str("output.path", "");
  const std::string fmt = r.str("output.format", "csv");
  if (fmt == "csv") cfg.format = Format::csv;
  else if (fmt == "json") cfg.format = Format::json;
  else throw config_error("output.format must be csv or json");
  cfg.timing = r.flag("output.timing", false);
  cfg.threads = r.count("threads", 0);
  return cfg;
}

inline ExperimentConfig parse_config_text(std::string_view text) {
  return parse_config(parse_key_values(text));
}

}  // namespace xva::harness
