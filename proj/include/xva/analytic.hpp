#pragma once

// Exact solutions: the closed-form correction for non-negative payoffs
// without collateral (or one-way CSA on a call), and the Dirichlet value
// at S = 0.

#include <cmath>
#include <variant>

#include "xva/adjustments.hpp"
#include "xva/error.hpp"
#include "xva/market.hpp"

namespace xva {

struct ClosedFormInputs {
  MarketParams p;
  ContractSpec c;
  EvalPoint point;
};

/// True when the source reduces to c_f v for a call, i.e. X = 0 or
/// X = beta V^- (the V^- part vanishes for a non-negative price).
inline bool closed_form_applies(const CollateralSpec& spec) noexcept {
  if (std::holds_alternative<NoCollateral>(spec)) return true;
  if (const auto* lin = std::get_if<LinearCollateral>(&spec))
    return lin->alpha == 0.0;
  return false;
}

/// (e^{-a tau} - 1) / a, continuous through a = 0.
inline double expm1_ratio(double a, double tau) noexcept {
  if (std::abs(a) < 1e-12) return -tau;
  return std::expm1(-a * tau) / a;
}

/// u = c_f / (lambda_B + lambda_C) (e^{-(lambda_B+lambda_C) tau} - 1) v.
inline double closed_form_u(const ClosedFormInputs& in,
                            const CollateralSpec& spec = NoCollateral{}) {
  if (!closed_form_applies(spec))
    throw unsupported_regime("closed form needs X = 0 or one-way CSA, got " +
                             describe(spec));
  const double tau = in.point.tau;
  if (tau == 0.0) return 0.0;
  const double a = in.p.lambda_b + in.p.lambda_c;
  return in.p.c_f() * expm1_ratio(a, tau) * v(tau, in.point.x, in.p, in.c);
}

/// Dirichlet value of the correction at S = 0 in time-to-maturity form,
/// lambda_B eps_h / kappa (e^{-kappa tau} - 1), with eps_h held constant.
inline double boundary_u(double tau, double eps_h, const MarketParams& p) {
  const double kappa = p.kappa();
  if (!(kappa > 0.0))
    throw unsupported_regime("boundary solution needs r + lambda_B + "
                             "lambda_C > 0");
  return p.lambda_b * eps_h * std::expm1(-kappa * tau) / kappa;
}

/// Same value in calendar time t.
inline double dirichlet_boundary_u(double t, double eps_h,
                                   const MarketParams& p,
                                   const ContractSpec& c) {
  if (t < 0.0 || t > c.maturity)
    throw domain_error("dirichlet_boundary_u: t outside [0, T]");
  return boundary_u(c.maturity - t, eps_h, p);
}

}  // namespace xva
