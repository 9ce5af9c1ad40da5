#pragma once

// Builtin experiments. Each one is a config text in the same format that
// `xva run` reads, so `xva scenario NAME --dump-config` gives a starting
// point for custom runs.

#include <string>
#include <string_view>
#include <vector>

#include "xva/error.hpp"

namespace xva::harness {

struct Scenario {
  std::string name;
  std::string description;
  std::string config;
};

namespace detail {

inline const char* kBaseParameters = R"(market.sigma = 0.25
market.r = 0.03
market.q_s = 0.03
market.gamma_s = 0
market.lambda_b = 0.02
market.lambda_c = 0.05
market.r_b = 0.4
market.r_c = 0.4
market.s_x = 0.012
contract.strike = 15
contract.maturity = 2
)";

// Base parameter block followed by the scenario body; base lines whose key
// the body sets again are dropped.
inline std::string with_base(std::string_view name, std::string_view body) {
  auto key_of = [](std::string_view line) {
    const auto eq = line.find('=');
    auto key = line.substr(0, eq);
    while (!key.empty() && key.back() == ' ') key.remove_suffix(1);
    return std::string(key);
  };
  std::string body_keys = "\n";
  std::string_view rest = body;
  while (!rest.empty()) {
    const auto nl = rest.find('\n');
    body_keys += key_of(rest.substr(0, nl)) + "\n";
    rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
  }
  std::string out = "scenario = " + std::string(name) + "\n";
  rest = kBaseParameters;
  while (!rest.empty()) {
    const auto nl = rest.find('\n');
    const auto line = rest.substr(0, nl);
    if (body_keys.find("\n" + key_of(line) + "\n") == std::string::npos)
      out += std::string(line) + "\n";
    rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
  }
  return out + std::string(body);
}

}  // namespace detail

inline const std::vector<Scenario>& builtin_scenarios() {
  using detail::with_base;
  static const std::vector<Scenario> all = {
      {"oracle",
       "uncollateralized call, all solvers against the closed form at (2, ln 12)",
       with_base("oracle", R"(collateral = none
solvers = analytic, fd, hk, mc
benchmark = analytic
points.spot = 2:12
fd.x_min = -5
fd.x_max = 5
fd.delta_x = 2^-6
fd.delta_tau = 2^-6
mc.n_paths = 100000
mc.delta_s = 2^-10
)")},
      {"fig2-left",
       "finite differences, delta_x sweep at fixed delta_tau = 2^-6",
       with_base("fig2-left", R"(collateral = none
solvers = fd
benchmark = hk
points.spot = 2:12
fd.x_min = -5
fd.x_max = 5
fd.delta_tau = 2^-6
sweep.param = fd.delta_x
sweep.values = 2^-2, 2^-4, 2^-6, 2^-8
)")},
      {"fig2-right",
       "finite differences, delta_tau sweep at fixed delta_x = 2^-6",
       with_base("fig2-right", R"(collateral = none
solvers = fd
benchmark = hk
points.spot = 2:12
fd.x_min = -5
fd.x_max = 5
fd.delta_x = 2^-6
sweep.param = fd.delta_tau
sweep.values = 2^-2, 2^-4, 2^-6, 2^-8, 2^-10
)")},
      {"fig3",
       "finite differences, truncation x_max = 5..8 with x_min = -4",
       with_base("fig3", R"(collateral = none
solvers = fd
benchmark = hk
points.spot = 2:12
fd.x_min = -4
fd.delta_x = 2^-6
fd.delta_tau = 2^-6
fd.stepping = fixed
sweep.param = fd.x_max
sweep.values = 5, 6, 7, 8
)")},
      {"fig4",
       "Monte-Carlo error against the number of paths N = 10^(3 + j/2)",
       with_base("fig4", R"(collateral = none
solvers = mc
benchmark = hk
points.spot = 2:12
mc.delta_s = 2^-10
mc.seed = 1
sweep.param = mc.n_paths
sweep.values = 1000, 3162, 10000, 31623, 100000
)")},
      {"fig5-diff",
       "undelayed (X = V) minus ten-day delayed collateral, s_X = 0.02",
       with_base("fig5-diff", R"(market.s_x = 0.02
collateral = two-way
diff.collateral = delayed
diff.t0 = 10/252
solvers = fd
benchmark = hk
fd.x_min = -5
fd.x_max = 5
fd.delta_x = 2^-6
fd.delta_tau = 2^-3
points.tau_grid = 0.25:2:0.25
points.spot_grid = 8:24:2
)")},
      {"fig5-mc",
       "Monte-Carlo means with 95% intervals, delayed collateral, s_X = 0.02",
       with_base("fig5-mc", R"(market.s_x = 0.02
collateral = delayed
collateral.t0 = 10/252
solvers = mc
benchmark = hk
points.spot = 2:12
mc.delta_s = 2^-8
mc.seed = 1
sweep.param = mc.n_paths
sweep.values = 1000, 3162, 10000, 31623, 100000
)")},
  };
  return all;
}

inline const Scenario& find_scenario(std::string_view name) {
  for (const auto& s : builtin_scenarios())
    if (s.name == name) return s;
  throw config_error("unknown scenario '" + std::string(name) +
                     "' (see xva list-scenarios)");
}

}  // namespace xva::harness
