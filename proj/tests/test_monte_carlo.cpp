#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "xva/analytic.hpp"
#include "xva/monte_carlo.hpp"

using namespace xva;

namespace {

MarketParams params() { return oracle::paper_params(); }
ContractSpec contract() { return {15.0, 2.0}; }
const double kLn12 = std::log(12.0);

mc::McSpec small(std::size_t n = 4000, double ds = 1.0 / 32.0) {
  mc::McSpec s;
  s.n_paths = n;
  s.delta_s = ds;
  return s;
}

}  // namespace

TEST(McPaths, VanishingVolatilityFollowsDrift) {
  MarketParams p = params();
  p.sigma = 1e-9;
  p.q_s = 0.1;
  const auto paths = mc::simulate_paths(1.0, 0.5, p, small(3, 0.25));
  for (const auto& path : paths) {
    ASSERT_EQ(path.size(), 5u);
    for (std::size_t i = 0; i < path.size(); ++i)
      EXPECT_NEAR(path[i], 0.5 + p.rho() * 0.25 * static_cast<double>(i), 1e-8);
  }
}

TEST(McPaths, DiscountedSpotIsMartingale) {
  const auto p = params();
  const auto paths = mc::simulate_paths(2.0, kLn12, p, small(40000, 0.5));
  double sum = 0.0, sq = 0.0;
  for (const auto& path : paths) {
    const double s = std::exp(path.back());
    sum += s;
    sq += s * s;
  }
  const double n = static_cast<double>(paths.size());
  const double mean = sum / n;
  const double se = std::sqrt((sq / n - mean * mean) / n);
  EXPECT_NEAR(mean, 12.0 * std::exp((p.q_s - p.gamma_s) * 2.0), 4.0 * se);
}

TEST(McPaths, Deterministic) {
  const auto a = mc::simulate_paths(1.0, 0.0, params(), small(10, 0.125));
  const auto b = mc::simulate_paths(1.0, 0.0, params(), small(10, 0.125));
  EXPECT_EQ(a, b);
  auto s = small(10, 0.125);
  s.seed = 2;
  EXPECT_NE(a, mc::simulate_paths(1.0, 0.0, params(), s));
}

TEST(McPartition, Plans) {
  const auto part = mc::plan_partition(2.0, small(10, 1.0 / 32.0), NoCollateral{});
  EXPECT_EQ(part.steps, 64u);
  EXPECT_FALSE(part.hits_delay);
  const auto odd = mc::plan_partition(1.0, small(10, 0.3), NoCollateral{});
  EXPECT_EQ(odd.steps, 4u);
  EXPECT_DOUBLE_EQ(odd.delta, 0.25);
  const DelayedCollateral d{10.0 / 252.0};
  const auto dp = mc::plan_partition(2.0, small(10, 1.0 / 32.0), d);
  EXPECT_TRUE(dp.hits_delay);
  EXPECT_LE(dp.delta, 1.0 / 32.0);
  const double m = d.t0 / dp.delta;
  EXPECT_NEAR(m, std::round(m), 1e-9);
}

TEST(McEstimate, ZeroMaturityAndValidation) {
  const auto r = mc::estimate(0.0, kLn12, NoCollateral{}, params(), contract(), small());
  EXPECT_EQ(r.u_total, 0.0);
  EXPECT_EQ(r.se_total, 0.0);
  EXPECT_THROW(mc::estimate(1.0, kLn12, NoCollateral{}, params(), contract(), small(1)),
               config_error);
  auto anti = small(11);
  anti.antithetic = true;
  EXPECT_THROW(mc::estimate(1.0, kLn12, NoCollateral{}, params(), contract(), anti),
               config_error);
}

TEST(McEstimate, CallHasNoDebitTerm) {
  const auto r = mc::estimate(2.0, kLn12, NoCollateral{}, params(), contract(), small());
  EXPECT_EQ(r.u_dva, 0.0);
  EXPECT_EQ(r.u_colva, 0.0);
  EXPECT_LT(r.u_cva, 0.0);
  EXPECT_LT(r.u_fca, 0.0);
  EXPECT_NEAR(r.u_total, oracle::kClosedFormU, 4.0 * r.se_total);
  EXPECT_LT(r.ci_lo(), r.u_total);
  EXPECT_GT(r.ci_hi(), r.u_total);
}

TEST(McEstimate, PathTotalsAreSumOfTerms) {
  const auto samples =
      mc::path_samples(2.0, kLn12, one_way_csa(), params(), contract(), small(500));
  for (const auto& s : samples)
    EXPECT_DOUBLE_EQ(s.total, s.cva + s.dva + s.fca + s.colva);
}

TEST(McEstimate, GoldPlatedIsExactlyZero) {
  MarketParams p = params();
  p.s_x = 0.0;
  const auto r = mc::estimate(2.0, kLn12, two_way_csa(), p, contract(), small());
  EXPECT_EQ(r.u_total, 0.0);
  EXPECT_EQ(r.se_total, 0.0);
}

TEST(McEstimate, DelayIndifferencePathwise) {
  MarketParams p = params();
  p.s_x = p.lambda_b * (1.0 - p.r_b);
  const auto spec = small(2000);
  const auto d =
      mc::estimate_difference(2.0, kLn12, DelayedCollateral{}, two_way_csa(), p, contract(), spec);
  EXPECT_LT(std::abs(d.u_total), 1e-12);
  EXPECT_LT(d.se_total, 1e-12);
}

TEST(McEstimate, DifferenceSignWithWiderSpread) {
  MarketParams p = params();
  p.s_x = 0.02;
  const auto d = mc::estimate_difference(1.0, kLn12, two_way_csa(), DelayedCollateral{}, p,
                                         contract(), small(2000));
  EXPECT_GT(d.u_total, 0.0);
}

TEST(McEstimate, WorkerCountDoesNotChangeBits) {
  const auto a =
      mc::estimate(2.0, kLn12, DelayedCollateral{}, params(), contract(), small(3000), 1);
  const auto b =
      mc::estimate(2.0, kLn12, DelayedCollateral{}, params(), contract(), small(3000), 4);
  EXPECT_EQ(a.u_total, b.u_total);
  EXPECT_EQ(a.se_total, b.se_total);
}

TEST(McEstimate, AntitheticPairsReduceVariance) {
  auto spec = small(8000);
  const auto plain = mc::estimate(2.0, kLn12, NoCollateral{}, params(), contract(), spec);
  spec.antithetic = true;
  const auto anti = mc::estimate(2.0, kLn12, NoCollateral{}, params(), contract(), spec);
  EXPECT_LT(anti.se_total, plain.se_total);
  EXPECT_NEAR(anti.u_total, oracle::kClosedFormU, 4.0 * anti.se_total);
  const auto paths = mc::simulate_paths(1.0, 0.0, params(), [] {
    auto s = small(2, 0.25);
    s.antithetic = true;
    return s;
  }());
  for (std::size_t i = 1; i < paths[0].size(); ++i)
    EXPECT_NEAR(paths[0][i] + paths[1][i], 2.0 * params().rho() * 0.25 * i, 1e-12);
}
