#pragma once

// Model parameters and the risk-free Black-Scholes call price that every
// source-term evaluation is built on.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "xva/error.hpp"

namespace xva {

/// Market and credit constants. Rates are per year, sigma per sqrt(year).
struct MarketParams {
  double sigma = 0.25;     // volatility
  double r = 0.03;         // risk-free rate
  double q_s = 0.03;       // market-factor financing rate
  double gamma_s = 0.0;    // dividend-style yield
  double lambda_b = 0.02;  // issuer default intensity
  double lambda_c = 0.05;  // counterparty default intensity
  double r_b = 0.4;        // issuer recovery
  double r_c = 0.4;        // counterparty recovery
  double s_x = 0.012;      // collateral rate spread over r

  /// Log-space drift of the underlying, (q_S - gamma_S) - sigma^2/2.
  double rho() const noexcept { return q_s - gamma_s - 0.5 * sigma * sigma; }

  /// Effective discount rate of the correction, r + lambda_B + lambda_C.
  double kappa() const noexcept { return r + lambda_b + lambda_c; }

  /// Loss-given-default weighted intensity.
  double c_f() const noexcept {
    return lambda_c * (1.0 - r_c) + lambda_b * (1.0 - r_b);
  }

  /// Forward drift of S under the pricing measure.
  double forward_drift() const noexcept { return q_s - gamma_s; }

  void validate() const {
    auto finite = [](double v) { return std::isfinite(v); };
    if (!(finite(sigma) && finite(r) && finite(q_s) && finite(gamma_s) &&
          finite(lambda_b) && finite(lambda_c) && finite(r_b) &&
          finite(r_c) && finite(s_x)))
      throw config_error("market parameters must be finite");
    if (!(sigma > 0.0)) throw config_error("sigma must be positive");
    if (lambda_b < 0.0 || lambda_c < 0.0)
      throw config_error("default intensities must be non-negative");
    if (r_b < 0.0 || r_b > 1.0 || r_c < 0.0 || r_c > 1.0)
      throw config_error("recovery rates must lie in [0, 1]");
  }
};

/// European call.
struct ContractSpec {
  double strike = 15.0;
  double maturity = 2.0;

  void validate() const {
    if (!(strike > 0.0) || !std::isfinite(strike))
      throw config_error("strike must be positive");
    if (!(maturity > 0.0) || !std::isfinite(maturity))
      throw config_error("maturity must be positive");
  }
};

/// (time-to-maturity, log-spot)
struct EvalPoint {
  double tau = 0.0;
  double x = 0.0;

  double spot() const noexcept { return std::exp(x); }

  void validate(const ContractSpec& c) const {
    if (!std::isfinite(tau) || !std::isfinite(x))
      throw config_error("evaluation point must be finite");
    if (tau < 0.0 || tau > c.maturity * (1.0 + 1e-12))
      throw config_error("evaluation tau must lie in [0, T]");
  }
};

/// Standard normal CDF through erfc; absolute error at the level of double
/// rounding.
inline double norm_cdf(double z) {
  if (!std::isfinite(z)) throw domain_error("norm_cdf: non-finite argument");
  return 0.5 * std::erfc(-z * std::numbers::sqrt2 / 2.0);
}

struct D12 {
  double d1;
  double d2;
};

/// d1 and d2 at calendar time s for spot x_spot. The drift term uses the
/// forward drift q_S - gamma_S, which equals r for the usual parameter sets.
inline D12 d12(double s, double x_spot, const MarketParams& p,
               const ContractSpec& c) {
  if (!(x_spot > 0.0)) throw domain_error("d12: spot must be positive");
  const double ttm = c.maturity - s;
  if (!(ttm > 0.0))
    throw domain_error("d12: degenerate expiry, s must be before maturity");
  const double vol = p.sigma * std::sqrt(ttm);
  const double d1 =
      (std::log(x_spot / c.strike) +
       (p.forward_drift() + 0.5 * p.sigma * p.sigma) * ttm) /
      vol;
  return {d1, d1 - vol};
}

/// Call value S e^{(mu-r)tau} N(d1) - K e^{-r tau} N(d2) with time to
/// maturity tau. tau may exceed the contract maturity; the formula is used
/// as-is there (delayed collateral near inception needs it).
inline double bs_call(double tau, double spot, const MarketParams& p,
                      const ContractSpec& c) {
  if (!(spot >= 0.0) || !(tau >= 0.0))
    throw domain_error("bs_call: spot and tau must be non-negative");
  if (spot == 0.0) return 0.0;
  if (tau == 0.0) return std::max(spot - c.strike, 0.0);
  if (std::isinf(spot)) return spot;
  const double vol = p.sigma * std::sqrt(tau);
  const double d1 =
      (std::log(spot / c.strike) +
       (p.forward_drift() + 0.5 * p.sigma * p.sigma) * tau) /
      vol;
  const double d2 = d1 - vol;
  const double carry = std::exp((p.forward_drift() - p.r) * tau);
  const double value = spot * carry * norm_cdf(d1) -
                       c.strike * std::exp(-p.r * tau) * norm_cdf(d2);
  // Cancellation deep out of the money can leave a tiny negative residue.
  return std::max(value, 0.0);
}

/// Call value in (tau, log-spot) coordinates.
inline double v(double tau, double x, const MarketParams& p,
                const ContractSpec& c) {
  if (std::isnan(x)) throw domain_error("v: log-spot is NaN");
  return bs_call(tau, std::exp(x), p, c);
}

}  // namespace xva
