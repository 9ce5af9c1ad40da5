#pragma once

// Duhamel (heat-kernel) representation of the correction
//
//   u(tau, x) = -1/sqrt(pi) int_0^tau int_R e^{-y^2 - kappa (tau - s)}
//                 f(v(s, x + shift + sqrt(2 (tau - s)) sigma y)) dy ds
//
// evaluated with the composite tensor-product trapezoid rule.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "xva/adjustments.hpp"
#include "xva/error.hpp"
#include "xva/market.hpp"
#include "xva/parallel.hpp"

namespace xva::heat_kernel {

/// Drift shift applied to the spatial argument of the source.
/// corrected:  rho (tau - s), which is what undoing x -> x - rho tau at the
///             source's own time s gives.
/// as_printed: rho tau for every s.
enum class DriftShift { corrected, as_printed };

struct QuadratureSpec {
  double delta_s = 1.0 / 1024.0;
  double delta_y = 1.0 / 8.0;
  double y_max = 100.0;
  DriftShift mode = DriftShift::corrected;

  /// Quadrature at the resolution used as reference throughout.
  static QuadratureSpec benchmark() { return {}; }

  std::size_t time_steps(double tau) const {
    return static_cast<std::size_t>(std::llround(tau / delta_s));
  }

  std::size_t space_steps() const {
    return static_cast<std::size_t>(std::llround(2.0 * y_max / delta_y));
  }

  void validate(double tau) const {
    if (!(delta_s > 0.0) || !(delta_y > 0.0) || !(y_max > 0.0))
      throw config_error("quadrature steps and y_max must be positive");
    const double ns = tau / delta_s;
    if (std::llround(ns) < 1 || std::abs(ns - std::round(ns)) > 1e-9 * ns)
      throw config_error("tau / delta_s = " + std::to_string(ns) +
                         " is not a positive integer");
    const double ny = 2.0 * y_max / delta_y;
    if (std::llround(ny) < 1 || std::abs(ny - std::round(ny)) > 1e-9 * ny)
      throw config_error("2 y_max / delta_y is not a positive integer");
  }

  /// Copy with delta_s shrunk (if needed) so that it divides tau.
  QuadratureSpec snapped_to(double tau) const {
    QuadratureSpec q = *this;
    const double ns = std::max(1.0, std::ceil(tau / delta_s - 1e-9));
    q.delta_s = tau / ns;
    return q;
  }
};

inline double spatial_argument(double s, double y, double tau, double x,
                               const MarketParams& p, DriftShift mode) {
  const double lag = tau - s;
  const double shift = mode == DriftShift::corrected ? p.rho() * lag
                                                     : p.rho() * tau;
  return x + shift + std::sqrt(2.0 * lag) * p.sigma * y;
}

/// Integrand g(s, y; tau, x).
inline double integrand_g(double s, double y, double tau, double x,
                          const CollateralSpec& spec, const MarketParams& p,
                          const ContractSpec& c,
                          DriftShift mode = DriftShift::corrected) {
  const double weight = std::exp(-y * y - p.kappa() * (tau - s));
  if (weight == 0.0) return 0.0;
  const double z = spatial_argument(s, y, tau, x, p, mode);
  return weight * source_term(spec, s, z, p, c).total;
}

/// Trapezoid approximation of u(tau, x).
inline double quad_u(double tau, double x, const CollateralSpec& spec,
                     const MarketParams& p, const ContractSpec& c,
                     const QuadratureSpec& q = QuadratureSpec::benchmark(),
                     std::size_t workers = default_workers()) {
  if (tau == 0.0) return 0.0;
  if (!(tau > 0.0)) throw domain_error("quad_u: tau must be non-negative");
  q.validate(tau);
  validate(spec);

  const std::size_t ns = q.time_steps(tau);
  const std::size_t ny = q.space_steps();
  const double ds = tau / static_cast<double>(ns);
  const double dy = 2.0 * q.y_max / static_cast<double>(ny);

  // Each s-slice is summed over y; slices are combined pairwise so the
  // result does not depend on the number of workers.
  std::vector<double> slices(ns + 1);
  parallel_for(ns + 1, workers, [&](std::size_t i) {
    const double s = i == ns ? tau : static_cast<double>(i) * ds;
    std::vector<double> row(ny + 1);
    for (std::size_t j = 0; j <= ny; ++j) {
      const double y = -q.y_max + static_cast<double>(j) * dy;
      const double wy = (j == 0 || j == ny) ? 0.5 : 1.0;
      row[j] = wy * integrand_g(s, y, tau, x, spec, p, c, q.mode);
    }
    const double ws = (i == 0 || i == ns) ? 0.5 : 1.0;
    slices[i] = ws * pairwise_sum(row);
  });
  return -pairwise_sum(slices) * ds * dy / std::sqrt(std::numbers::pi);
}

}  // namespace xva::heat_kernel
