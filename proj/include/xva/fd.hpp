#pragma once

// Method-of-lines finite differences for the correction u(tau, x):
//
//   u_tau = 1/2 sigma^2 u_xx + rho u_x - kappa u - f,   u(0, x) = 0,
//
// on a uniform grid over [x_min, x_max]. Row 0 carries the Dirichlet value
// of the S = 0 problem; row N_x uses the zero-second-derivative condition
// with the ghost point eliminated. Time stepping is Crank-Nicolson, either
// with step-doubling error control or with a fixed step.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "xva/adjustments.hpp"
#include "xva/analytic.hpp"
#include "xva/error.hpp"
#include "xva/market.hpp"

namespace xva::fd {

struct GridSpec {
  double x_min = -5.0;
  double x_max = 5.0;
  double delta_x = 1.0 / 64.0;
  double delta_tau = 1.0 / 64.0;  // reporting step
  double tau_end = 2.0;

  std::size_t intervals() const {
    return static_cast<std::size_t>(std::llround((x_max - x_min) / delta_x));
  }

  double node(std::size_t i) const {
    return x_min + static_cast<double>(i) * delta_x;
  }

  void validate(const MarketParams& p, const ContractSpec& c) const {
    if (!(x_min < 0.0 && 0.0 < x_max))
      throw config_error("fd grid needs x_min < 0 < x_max");
    if (!(delta_x > 0.0) || !(delta_tau > 0.0))
      throw config_error("fd steps must be positive");
    const double n = (x_max - x_min) / delta_x;
    if (std::llround(n) < 2 || std::abs(n - std::round(n)) > 1e-9 * n)
      throw config_error("(x_max - x_min) / delta_x must be an integer >= 2");
    if (!(tau_end > 0.0) || tau_end > c.maturity * (1.0 + 1e-12))
      throw config_error("fd tau_end must lie in (0, T]");
    // Central advection without upwinding needs a cell Peclet number < 2.
    const double peclet = std::abs(p.rho()) * delta_x / (p.sigma * p.sigma);
    if (!(peclet < 2.0))
      throw config_error("cell Peclet number |rho| dx / sigma^2 = " +
                         std::to_string(peclet) + " must be below 2");
  }
};

enum class Stepping { adaptive, fixed };

struct IntegratorOptions {
  Stepping stepping = Stepping::adaptive;
  double rtol = 1e-8;
  double atol = 1e-10;
  double initial_step = 1e-3;
  double min_step = 1e-13;
  double fixed_step = 0.0;  // 0 -> use the grid's delta_tau
  std::size_t max_steps = 50'000'000;
};

/// U_i ~ u(tau, x_i) and F_i = f at (tau, x_i).
struct FdState {
  double tau = 0.0;
  std::vector<double> U;
  std::vector<double> F;
};

/// Tridiagonal spatial operator A acting on rows 1..N (row 0 is Dirichlet).
struct SpatialOperator {
  std::vector<double> lower, diag, upper;  // indexed by row, size N + 1
  double kappa = 0.0;

  SpatialOperator(const GridSpec& grid, const MarketParams& p) {
    const std::size_t n = grid.intervals();
    const double dx = grid.delta_x;
    const double diff = 0.5 * p.sigma * p.sigma / (dx * dx);
    const double adv = p.rho() / (2.0 * dx);
    kappa = p.kappa();
    lower.assign(n + 1, diff - adv);
    diag.assign(n + 1, -2.0 * diff - kappa);
    upper.assign(n + 1, diff + adv);
    lower[0] = diag[0] = upper[0] = 0.0;
    // Ghost point from u_xx(x_max) = 0: U_{N+1} = 2 U_N - U_{N-1}.
    lower[n] = -p.rho() / dx;
    diag[n] = p.rho() / dx - kappa;
    upper[n] = 0.0;
  }

  std::size_t size() const { return diag.size(); }

  /// (A U)_i for i = 1..N; out[0] is left untouched.
  void apply(std::span<const double> u, std::span<double> out) const {
    const std::size_t n = size() - 1;
    for (std::size_t i = 1; i < n; ++i)
      out[i] = lower[i] * u[i - 1] + diag[i] * u[i] + upper[i] * u[i + 1];
    out[n] = lower[n] * u[n - 1] + diag[n] * u[n];
  }
};

/// F_i at time tau for every grid node.
inline std::vector<double> source_vector(double tau, const GridSpec& grid,
                                         const CollateralSpec& spec,
                                         const MarketParams& p,
                                         const ContractSpec& c) {
  const std::size_t n = grid.intervals();
  std::vector<double> f(n + 1);
  for (std::size_t i = 0; i <= n; ++i)
    f[i] = source_term(spec, tau, grid.node(i), p, c).total;
  return f;
}

/// Hedge error at the left edge of the grid.
inline double left_hedge_error(double tau, const GridSpec& grid,
                               const CollateralSpec& spec,
                               const MarketParams& p, const ContractSpec& c) {
  const double value = v(tau, grid.x_min, p, c);
  const double coll =
      collateral_from_value(spec, value, tau, grid.x_min, p, c);
  return hedge_error(value, coll, p.r_b);
}

inline double left_boundary(double tau, const GridSpec& grid,
                            const CollateralSpec& spec, const MarketParams& p,
                            const ContractSpec& c) {
  return boundary_u(tau, left_hedge_error(tau, grid, spec, p, c), p);
}

/// Time derivative of the semi-discrete system. F is re-evaluated at the
/// state's tau; row 0 returns the derivative of the Dirichlet value.
inline std::vector<double> rhs(const FdState& state, const GridSpec& grid,
                               const CollateralSpec& spec,
                               const MarketParams& p, const ContractSpec& c) {
  const std::size_t n = grid.intervals();
  if (state.U.size() != n + 1)
    throw config_error("fd state size " + std::to_string(state.U.size()) +
                       " does not match grid with " + std::to_string(n + 1) +
                       " nodes");
  const SpatialOperator op(grid, p);
  const auto f = source_vector(state.tau, grid, spec, p, c);
  std::vector<double> out(n + 1);
  op.apply(state.U, out);
  for (std::size_t i = 1; i <= n; ++i) out[i] -= f[i];
  const double eps = left_hedge_error(state.tau, grid, spec, p, c);
  out[0] = -p.lambda_b * eps * std::exp(-p.kappa() * state.tau);
  return out;
}

/// Solves a tridiagonal system in place (Thomas algorithm, no pivoting;
/// the Crank-Nicolson matrices here are diagonally dominant).
inline void solve_tridiagonal(std::span<const double> sub,
                              std::span<const double> diag,
                              std::span<const double> sup,
                              std::span<double> rhs,
                              std::vector<double>& scratch) {
  const std::size_t n = diag.size();
  scratch.resize(n);
  double denom = diag[0];
  scratch[0] = sup[0] / denom;
  rhs[0] /= denom;
  for (std::size_t i = 1; i < n; ++i) {
    denom = diag[i] - sub[i] * scratch[i - 1];
    scratch[i] = sup[i] / denom;
    rhs[i] = (rhs[i] - sub[i] * rhs[i - 1]) / denom;
  }
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= scratch[i] * rhs[i + 1];
}

/// Values at the reporting times.
struct Surface {
  double x_min = 0.0;
  double delta_x = 0.0;
  std::vector<double> times;
  std::vector<std::vector<double>> values;  // values[k][i] ~ u(times[k], x_i)

  std::size_t time_index(double tau) const {
    for (std::size_t k = 0; k < times.size(); ++k)
      if (std::abs(times[k] - tau) <= 1e-9 * std::max(1.0, tau)) return k;
    throw domain_error("fd surface has no reporting time at tau = " +
                       std::to_string(tau));
  }

  /// Linear interpolation in x on the slice at reporting time tau.
  double at(double tau, double x) const {
    const auto& row = values[time_index(tau)];
    const std::size_t n = row.size() - 1;
    const double pos = (x - x_min) / delta_x;
    if (pos < -1e-9 || pos > static_cast<double>(n) + 1e-9)
      throw domain_error("fd surface queried outside [x_min, x_max]");
    const std::size_t i = std::min<std::size_t>(
        static_cast<std::size_t>(std::max(pos, 0.0)), n - 1);
    const double w = std::clamp(pos - static_cast<double>(i), 0.0, 1.0);
    return (1.0 - w) * row[i] + w * row[i + 1];
  }
};

struct SolveStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t source_evaluations = 0;
};

struct Solution {
  Surface surface;
  SolveStats stats;

  double at(double tau, double x) const { return surface.at(tau, x); }
};

/// Reporting times: multiples of delta_tau up to tau_end, tau_end itself and
/// any extra times, sorted and de-duplicated. Always starts at 0.
inline std::vector<double> reporting_times(const GridSpec& grid,
                                           std::span<const double> extra) {
  std::vector<double> t{0.0};
  const auto steps =
      static_cast<std::size_t>(std::floor(grid.tau_end / grid.delta_tau + 1e-9));
  for (std::size_t k = 1; k <= steps; ++k)
    t.push_back(std::min(static_cast<double>(k) * grid.delta_tau, grid.tau_end));
  t.push_back(grid.tau_end);
  for (double e : extra) {
    if (!(e >= 0.0) || e > grid.tau_end * (1.0 + 1e-12))
      throw config_error("requested fd time " + std::to_string(e) +
                         " outside [0, tau_end]");
    t.push_back(std::min(e, grid.tau_end));
  }
  std::sort(t.begin(), t.end());
  std::vector<double> out;
  for (double x : t)
    if (out.empty() || x - out.back() > 1e-12 * std::max(1.0, x))
      out.push_back(x);
  return out;
}

namespace detail {

class CrankNicolson {
 public:
  CrankNicolson(const GridSpec& grid, const CollateralSpec& spec,
                const MarketParams& p, const ContractSpec& c)
      : grid_(grid), spec_(spec), p_(p), c_(c), op_(grid, p) {}

  std::vector<double> source(double tau) {
    ++source_evaluations;
    return source_vector(tau, grid_, spec_, p_, c_);
  }

  double boundary(double tau) const {
    return left_boundary(tau, grid_, spec_, p_, c_);
  }

  /// One step of length h from u (source f0) to a state with source f1.
  void step(std::span<const double> u, std::span<const double> f0,
            std::span<const double> f1, double tau1, double h,
            std::vector<double>& out) {
    const std::size_t n = op_.size() - 1;
    out.assign(n + 1, 0.0);
    au_.assign(n + 1, 0.0);
    op_.apply(u, au_);
    const double half = 0.5 * h;
    const double u0_new = boundary(tau1);
    sub_.resize(n);
    dia_.resize(n);
    sup_.resize(n);
    b_.resize(n);
    for (std::size_t i = 1; i <= n; ++i) {
      sub_[i - 1] = -half * op_.lower[i];
      dia_[i - 1] = 1.0 - half * op_.diag[i];
      sup_[i - 1] = -half * op_.upper[i];
      b_[i - 1] = u[i] + half * au_[i] - half * (f0[i] + f1[i]);
    }
    b_[0] -= sub_[0] * u0_new;
    sub_[0] = 0.0;
    sup_[n - 1] = 0.0;
    solve_tridiagonal(sub_, dia_, sup_, b_, scratch_);
    out[0] = u0_new;
    std::copy(b_.begin(), b_.end(), out.begin() + 1);
  }

  std::size_t source_evaluations = 0;

 private:
  const GridSpec& grid_;
  const CollateralSpec& spec_;
  const MarketParams& p_;
  const ContractSpec& c_;
  SpatialOperator op_;
  std::vector<double> au_, sub_, dia_, sup_, b_, scratch_;
};

}  // namespace detail

/// Integrates from tau = 0 to tau_end and records the surface at every
/// reporting time (see reporting_times).
inline Solution solve(const GridSpec& grid, const CollateralSpec& spec,
                      const MarketParams& p, const ContractSpec& c,
                      const IntegratorOptions& opts = {},
                      std::span<const double> extra_times = {}) {
  p.validate();
  c.validate();
  validate(spec);
  grid.validate(p, c);

  const std::size_t n = grid.intervals();
  const auto targets = reporting_times(grid, extra_times);
  detail::CrankNicolson cn(grid, spec, p, c);

  Solution sol;
  sol.surface.x_min = grid.x_min;
  sol.surface.delta_x = grid.delta_x;
  sol.surface.times = targets;

  double tau = 0.0;
  std::vector<double> u(n + 1, 0.0);
  std::vector<double> f0 = cn.source(0.0);
  std::vector<double> full, half, two_half;
  sol.surface.values.push_back(u);

  const bool adaptive = opts.stepping == Stepping::adaptive;
  double h = adaptive ? std::min(opts.initial_step, grid.delta_tau)
                      : (opts.fixed_step > 0.0 ? opts.fixed_step
                                               : grid.delta_tau);
  std::size_t attempts = 0;

  for (std::size_t k = 1; k < targets.size(); ++k) {
    const double target = targets[k];
    while (target - tau > 1e-14 * std::max(1.0, target)) {
      if (++attempts > opts.max_steps)
        throw solver_error("fd: step budget exhausted", tau);
      double step = std::min(h, target - tau);
      const bool clipped = step < h;
      double tau1 = tau + step;
      if (target - tau1 <= 1e-12 * std::max(1.0, target)) {
        tau1 = target;
        step = target - tau;
      }
      if (step < opts.min_step)
        throw solver_error("fd: step size underflow", tau);

      if (!adaptive) {
        auto f1 = cn.source(tau1);
        cn.step(u, f0, f1, tau1, step, full);
        u.swap(full);
        f0.swap(f1);
        tau = tau1;
        ++sol.stats.accepted;
        continue;
      }

      auto f_mid = cn.source(tau + 0.5 * step);
      auto f1 = cn.source(tau1);
      cn.step(u, f0, f1, tau1, step, full);
      cn.step(u, f0, f_mid, tau + 0.5 * step, 0.5 * step, half);
      cn.step(half, f_mid, f1, tau1, 0.5 * step, two_half);

      double err = 0.0;
      bool finite = true;
      for (std::size_t i = 0; i <= n; ++i) {
        const double scale =
            opts.atol + opts.rtol * std::max(std::abs(u[i]), std::abs(two_half[i]));
        const double e = std::abs(two_half[i] - full[i]) / 3.0 / scale;
        if (!std::isfinite(e)) finite = false;
        err = std::max(err, e);
      }
      if (!finite) throw solver_error("fd: non-finite state", tau);

      if (err <= 1.0) {
        u.swap(two_half);
        f0.swap(f1);
        tau = tau1;
        ++sol.stats.accepted;
        const double grow =
            err == 0.0 ? 4.0 : std::clamp(0.9 * std::cbrt(1.0 / err), 0.2, 4.0);
        h = clipped ? std::max(h, step * grow) : step * grow;
      } else {
        ++sol.stats.rejected;
        h = step * std::clamp(0.9 * std::cbrt(1.0 / err), 0.2, 0.9);
      }
    }
    tau = target;
    sol.surface.values.push_back(u);
  }
  sol.stats.source_evaluations = cn.source_evaluations;
  return sol;
}

}  // namespace xva::fd
