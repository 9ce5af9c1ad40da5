#pragma once

// Collateral, close-out values, hedge error and the xVA source term
//   f = f_CVA + f_DVA + f_FCA + f_COLVA
// for every supported collateral regime.

#include <algorithm>
#include <cmath>
#include <string>
#include <type_traits>
#include <variant>

#include "xva/error.hpp"
#include "xva/market.hpp"

namespace xva {

/// X = 0
struct NoCollateral {};

/// X = alpha V^+ + beta V^-
struct LinearCollateral {
  double alpha = 0.0;
  double beta = 0.0;
};

/// X = V(t - t0, S(t - t0)) with S(t - t0) approximated by
/// S(t) exp(-t0 rho).
struct DelayedCollateral {
  double t0 = 10.0 / 252.0;
};

using CollateralSpec =
    std::variant<NoCollateral, LinearCollateral, DelayedCollateral>;

inline CollateralSpec one_way_csa() { return LinearCollateral{0.0, -1.0}; }
inline CollateralSpec two_way_csa() { return LinearCollateral{1.0, -1.0}; }

inline void validate(const CollateralSpec& spec) {
  if (const auto* lin = std::get_if<LinearCollateral>(&spec)) {
    if (!std::isfinite(lin->alpha) || !std::isfinite(lin->beta))
      throw config_error("linear collateral coefficients must be finite");
  } else if (const auto* d = std::get_if<DelayedCollateral>(&spec)) {
    if (!(d->t0 > 0.0) || !std::isfinite(d->t0))
      throw config_error("margin period of risk t0 must be positive");
  }
}

inline std::string describe(const CollateralSpec& spec) {
  return std::visit(
      [](const auto& s) -> std::string {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, NoCollateral>) {
          return "none";
        } else if constexpr (std::is_same_v<T, LinearCollateral>) {
          return "linear(" + std::to_string(s.alpha) + "," +
                 std::to_string(s.beta) + ")";
        } else {
          return "delayed(" + std::to_string(s.t0) + ")";
        }
      },
      spec);
}

struct PosNeg {
  double plus;
  double minus;
};

/// phi^+ = max(phi, 0), phi^- = max(-phi, 0); both non-negative.
inline PosNeg pos_neg(double phi) noexcept {
  return {std::max(phi, 0.0), std::max(-phi, 0.0)};
}

/// Log-spot used for the past value of the delayed collateral.
inline double delayed_log_spot(double x, double t0, const MarketParams& p) {
  return x - t0 * p.rho();
}

inline double collateral_from_value(const CollateralSpec& spec, double value,
                                    double tau, double x,
                                    const MarketParams& p,
                                    const ContractSpec& c) {
  if (std::holds_alternative<NoCollateral>(spec)) return 0.0;
  if (const auto* lin = std::get_if<LinearCollateral>(&spec)) {
    const auto [vp, vm] = pos_neg(value);
    return lin->alpha * vp + lin->beta * vm;
  }
  const double t0 = std::get<DelayedCollateral>(spec).t0;
  return v(tau + t0, delayed_log_spot(x, t0, p), p, c);
}

/// Collateral X at (tau, x).
inline double collateral(const CollateralSpec& spec, double tau, double x,
                         const MarketParams& p, const ContractSpec& c) {
  if (std::holds_alternative<NoCollateral>(spec)) return 0.0;
  if (std::holds_alternative<DelayedCollateral>(spec))
    return collateral_from_value(spec, 0.0, tau, x, p, c);
  return collateral_from_value(spec, v(tau, x, p, c), tau, x, p, c);
}

/// Counterparty close-out value R_C (V-X)^+ - (V-X)^- + X.
inline double g_c(double value, double coll, double r_c) noexcept {
  const auto [ep, em] = pos_neg(value - coll);
  return r_c * ep - em + coll;
}

/// Issuer close-out value (V-X)^+ - R_B (V-X)^- + X.
inline double g_b(double value, double coll, double r_b) noexcept {
  const auto [ep, em] = pos_neg(value - coll);
  return ep - r_b * em + coll;
}

/// Hedge error of the no-shortfall semi-replication, (1-R_B)(V-X)^+.
inline double hedge_error(double value, double coll, double r_b) noexcept {
  return (1.0 - r_b) * pos_neg(value - coll).plus;
}

struct SourceBreakdown {
  double f_cva = 0.0;
  double f_dva = 0.0;
  double f_fca = 0.0;
  double f_colva = 0.0;
  double total = 0.0;
};

/// Source term from an already computed risk-free value and collateral.
inline SourceBreakdown source_from_values(double value, double coll,
                                          const MarketParams& p) noexcept {
  SourceBreakdown s;
  s.f_cva = -p.lambda_c * (g_c(value, coll, p.r_c) - value);
  s.f_dva = -p.lambda_b * (g_b(value, coll, p.r_b) - value);
  s.f_fca = p.lambda_b * hedge_error(value, coll, p.r_b);
  s.f_colva = p.s_x * coll;
  s.total = s.f_cva + s.f_dva + s.f_fca + s.f_colva;
  return s;
}

/// Source term f at (tau, x) for the given regime.
inline SourceBreakdown source_term(const CollateralSpec& spec, double tau,
                                   double x, const MarketParams& p,
                                   const ContractSpec& c) {
  const double value = v(tau, x, p, c);
  const double coll = collateral_from_value(spec, value, tau, x, p, c);
  return source_from_values(value, coll, p);
}

}  // namespace xva
