#pragma once

// Monte-Carlo evaluation of the Feynman-Kac form of the correction,
//
//   U_*(tau, x) = -int_0^tau e^{-kappa s} E[f_*(v(tau - s, X_s)) | X_0 = x] ds,
//
// per adjustment term. X is log-spot under exact GBM stepping. The time
// integral is taken path by path with the composite trapezoid rule and the
// path values are then averaged, so every term carries a standard error.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "xva/adjustments.hpp"
#include "xva/error.hpp"
#include "xva/market.hpp"
#include "xva/parallel.hpp"

namespace xva::mc {

struct McSpec {
  std::size_t n_paths = 100'000;
  double delta_s = 1.0 / 1024.0;
  std::uint64_t seed = 1;
  bool antithetic = false;

  void validate() const {
    if (n_paths < 2) throw config_error("mc needs at least 2 paths");
    if (antithetic && n_paths % 2 != 0)
      throw config_error("antithetic sampling needs an even path count");
    if (!(delta_s > 0.0) || !std::isfinite(delta_s))
      throw config_error("mc delta_s must be positive");
  }
};

struct TimePartition {
  std::size_t steps = 0;
  double delta = 0.0;
  bool hits_delay = false;  // t - t0 falls on a partition point
};

namespace detail {

inline bool near_integer(double v, double tol = 1e-9) {
  return std::abs(v - std::round(v)) <= tol * std::max(1.0, std::abs(v));
}

}  // namespace detail

/// Uniform partition of [0, tau] with step at most delta_s. For delayed
/// collateral the step is refined, when a commensurate one exists, so that
/// t0 is a whole number of steps.
inline TimePartition plan_partition(double tau, const McSpec& spec,
                                    const CollateralSpec& coll) {
  TimePartition part;
  part.steps = static_cast<std::size_t>(
      std::max(1.0, std::ceil(tau / spec.delta_s - 1e-9)));
  part.delta = tau / static_cast<double>(part.steps);
  if (const auto* d = std::get_if<DelayedCollateral>(&coll)) {
    const auto m0 = static_cast<std::size_t>(
        std::max(1.0, std::ceil(d->t0 / spec.delta_s - 1e-9)));
    for (std::size_t m = m0; m <= 64 * m0; ++m) {
      const double delta = d->t0 / static_cast<double>(m);
      const double steps = tau / delta;
      if (detail::near_integer(steps)) {
        part.steps = static_cast<std::size_t>(std::llround(steps));
        part.delta = tau / static_cast<double>(part.steps);
        part.hits_delay = true;
        break;
      }
    }
  }
  return part;
}

/// Standard normals for one path (or one antithetic pair). Every path owns
/// an independent stream keyed by (seed, stream index).
class PathStream {
 public:
  PathStream(std::uint64_t seed, std::uint64_t stream)
      : engine_(mix(seed, stream)) {}

  double next() { return normal_(engine_); }

 private:
  static std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ (stream * 0xd1b54a32d192ed03ULL));
  }

  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

/// Log-spot path generator: x_{i+1} = x_i + rho d + sigma sqrt(d) Z.
class LogSpotPaths {
 public:
  LogSpotPaths(double x0, const TimePartition& part, const MarketParams& p,
               const McSpec& spec)
      : x0_(x0),
        drift_(p.rho() * part.delta),
        vol_(p.sigma * std::sqrt(part.delta)),
        steps_(part.steps),
        spec_(spec) {}

  /// Fills out[0..steps] with path number `path`.
  void fill(std::size_t path, std::span<double> out) const {
    const bool mirrored = spec_.antithetic && (path % 2 == 1);
    const std::uint64_t stream = spec_.antithetic ? path / 2 : path;
    PathStream rng(spec_.seed, stream);
    const double sign = mirrored ? -1.0 : 1.0;
    out[0] = x0_;
    for (std::size_t i = 1; i <= steps_; ++i)
      out[i] = out[i - 1] + drift_ + vol_ * sign * rng.next();
  }

  std::size_t steps() const { return steps_; }

 private:
  double x0_, drift_, vol_;
  std::size_t steps_;
  McSpec spec_;
};

/// Matrix of log-spots x_k(s_i), one row per path.
inline std::vector<std::vector<double>> simulate_paths(
    double tau, double x, const MarketParams& p, const McSpec& spec) {
  if (!(tau > 0.0)) throw domain_error("simulate_paths: tau must be positive");
  spec.validate();
  const auto part = plan_partition(tau, spec, NoCollateral{});
  const LogSpotPaths gen(x, part, p, spec);
  std::vector<std::vector<double>> paths(spec.n_paths,
                                         std::vector<double>(part.steps + 1));
  for (std::size_t k = 0; k < spec.n_paths; ++k) gen.fill(k, paths[k]);
  return paths;
}

/// Path-wise integrated terms; total is the sum of the four terms.
struct PathSample {
  double cva = 0.0;
  double dva = 0.0;
  double fca = 0.0;
  double colva = 0.0;
  double total = 0.0;
};

struct AdjustmentResult {
  double u_cva = 0.0, u_dva = 0.0, u_fca = 0.0, u_colva = 0.0, u_total = 0.0;
  double se_cva = 0.0, se_dva = 0.0, se_fca = 0.0, se_colva = 0.0,
         se_total = 0.0;
  std::size_t n_paths = 0;
  std::uint64_t seed = 0;
  TimePartition partition;

  double ci_lo(double z = 1.96) const { return u_total - z * se_total; }
  double ci_hi(double z = 1.96) const { return u_total + z * se_total; }
};

/// Integrates `source(ttm, x)` (returning a SourceBreakdown) along every
/// path. Work is split into fixed chunks and results land in path order.
template <typename SourceFn>
std::vector<PathSample> integrate_paths(double tau, double x,
                                        const TimePartition& part,
                                        const MarketParams& p,
                                        const McSpec& spec, SourceFn&& source,
                                        std::size_t workers) {
  const LogSpotPaths gen(x, part, p, spec);
  const std::size_t n = part.steps;
  std::vector<double> discount(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    discount[i] =
        w * part.delta * std::exp(-p.kappa() * static_cast<double>(i) * part.delta);
  }

  constexpr std::size_t kChunk = 512;
  const std::size_t chunks = (spec.n_paths + kChunk - 1) / kChunk;
  std::vector<PathSample> samples(spec.n_paths);
  parallel_for(chunks, workers, [&](std::size_t chunk) {
    std::vector<double> xs(n + 1);
    const std::size_t end = std::min(spec.n_paths, (chunk + 1) * kChunk);
    for (std::size_t k = chunk * kChunk; k < end; ++k) {
      gen.fill(k, xs);
      PathSample ps;
      for (std::size_t i = 0; i <= n; ++i) {
        const double ttm =
            i == n ? 0.0 : tau - static_cast<double>(i) * part.delta;
        const SourceBreakdown f = source(ttm, xs[i]);
        ps.cva -= discount[i] * f.f_cva;
        ps.dva -= discount[i] * f.f_dva;
        ps.fca -= discount[i] * f.f_fca;
        ps.colva -= discount[i] * f.f_colva;
      }
      ps.total = ps.cva + ps.dva + ps.fca + ps.colva;
      samples[k] = ps;
    }
  });
  return samples;
}

inline std::vector<PathSample> path_samples(double tau, double x,
                                            const CollateralSpec& coll,
                                            const MarketParams& p,
                                            const ContractSpec& c,
                                            const McSpec& spec,
                                            std::size_t workers = default_workers()) {
  return integrate_paths(
      tau, x, plan_partition(tau, spec, coll), p, spec,
      [&](double ttm, double xi) { return source_term(coll, ttm, xi, p, c); },
      workers);
}

namespace detail {

struct MeanSe {
  double mean;
  double se;
};

inline MeanSe mean_se(std::span<const double> xs) {
  const auto n = static_cast<double>(xs.size());
  const double mean = pairwise_sum(xs) / n;
  std::vector<double> sq(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    sq[i] = (xs[i] - mean) * (xs[i] - mean);
  const double var = pairwise_sum(sq) / (n - 1.0);
  return {mean, std::sqrt(var / n)};
}

}  // namespace detail

/// Means and standard errors. Antithetic pairs are averaged first and the
/// pair averages are treated as the independent samples.
inline AdjustmentResult summarize(std::span<const PathSample> samples,
                                  const McSpec& spec,
                                  const TimePartition& part) {
  const std::size_t stride = spec.antithetic ? 2 : 1;
  const std::size_t m = samples.size() / stride;
  std::vector<double> buf(m);
  auto column = [&](double PathSample::*field) {
    for (std::size_t k = 0; k < m; ++k) {
      double acc = 0.0;
      for (std::size_t j = 0; j < stride; ++j)
        acc += samples[k * stride + j].*field;
      buf[k] = acc / static_cast<double>(stride);
    }
    return detail::mean_se(buf);
  };
  AdjustmentResult r;
  const auto cva = column(&PathSample::cva);
  const auto dva = column(&PathSample::dva);
  const auto fca = column(&PathSample::fca);
  const auto colva = column(&PathSample::colva);
  const auto total = column(&PathSample::total);
  r.u_cva = cva.mean;
  r.u_dva = dva.mean;
  r.u_fca = fca.mean;
  r.u_colva = colva.mean;
  r.u_total = r.u_cva + r.u_dva + r.u_fca + r.u_colva;
  r.se_cva = cva.se;
  r.se_dva = dva.se;
  r.se_fca = fca.se;
  r.se_colva = colva.se;
  r.se_total = total.se;
  r.n_paths = spec.n_paths;
  r.seed = spec.seed;
  r.partition = part;
  return r;
}

/// Per-term Monte-Carlo estimate of the correction at (tau, x).
inline AdjustmentResult estimate(double tau, double x,
                                 const CollateralSpec& coll,
                                 const MarketParams& p, const ContractSpec& c,
                                 const McSpec& spec,
                                 std::size_t workers = default_workers()) {
  p.validate();
  c.validate();
  validate(coll);
  spec.validate();
  if (tau == 0.0) {
    AdjustmentResult r;
    r.n_paths = spec.n_paths;
    r.seed = spec.seed;
    return r;
  }
  if (!(tau > 0.0)) throw domain_error("estimate: tau must be non-negative");
  const auto part = plan_partition(tau, spec, coll);
  const auto samples = integrate_paths(
      tau, x, part, p, spec,
      [&](double ttm, double xi) { return source_term(coll, ttm, xi, p, c); },
      workers);
  return summarize(samples, spec, part);
}

/// Estimate of u[a] - u[b] on common paths, so the standard error is that
/// of the path-wise difference. The partition honours whichever regime is
/// delayed (a first).
inline AdjustmentResult estimate_difference(
    double tau, double x, const CollateralSpec& a, const CollateralSpec& b,
    const MarketParams& p, const ContractSpec& c, const McSpec& spec,
    std::size_t workers = default_workers()) {
  p.validate();
  c.validate();
  validate(a);
  validate(b);
  spec.validate();
  if (tau == 0.0) {
    AdjustmentResult r;
    r.n_paths = spec.n_paths;
    r.seed = spec.seed;
    return r;
  }
  if (!(tau > 0.0)) throw domain_error("estimate: tau must be non-negative");
  auto part = plan_partition(tau, spec, a);
  if (!part.hits_delay) {
    const auto pb = plan_partition(tau, spec, b);
    if (pb.hits_delay) part = pb;
  }
  const auto samples = integrate_paths(
      tau, x, part, p, spec,
      [&](double ttm, double xi) {
        const double value = v(ttm, xi, p, c);
        const auto fa =
            source_from_values(value, collateral_from_value(a, value, ttm, xi, p, c), p);
        const auto fb =
            source_from_values(value, collateral_from_value(b, value, ttm, xi, p, c), p);
        return SourceBreakdown{fa.f_cva - fb.f_cva, fa.f_dva - fb.f_dva,
                               fa.f_fca - fb.f_fca, fa.f_colva - fb.f_colva,
                               fa.total - fb.total};
      },
      workers);
  return summarize(samples, spec, part);
}

}  // namespace xva::mc
