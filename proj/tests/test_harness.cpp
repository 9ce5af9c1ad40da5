#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "oracles.hpp"
#include "xva/harness/config.hpp"
#include "xva/harness/emit.hpp"
#include "xva/harness/runner.hpp"
#include "xva/harness/scenarios.hpp"

using namespace xva;
using namespace xva::harness;

namespace {

const char* kSmall = R"(# quick uncollateralized run
collateral = none
solvers = analytic, fd, mc
benchmark = analytic
points = 1:2.5, 2:2.5
fd.delta_x = 2^-4
fd.delta_tau = 1/4
mc.n_paths = 2000
mc.delta_s = 2^-4
)";

std::string to_csv(const ResultTable& t) {
  std::ostringstream os;
  write_csv(t, os);
  return os.str();
}

KeyValues scenario_kv(const std::string& name) {
  return parse_key_values(find_scenario(name).config);
}

std::filesystem::path temp_dir() {
  auto dir = std::filesystem::temp_directory_path() / "xva_harness_test";
  std::filesystem::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(XVA_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, KeyValueErrors) {
  EXPECT_THROW(parse_key_values("market.sigma 0.2\n"), config_error);
  EXPECT_THROW(parse_key_values("market.sigmaa = 0.2\n"), config_error);
  EXPECT_THROW(parse_key_values("market.r = 0.1\nmarket.r = 0.2\n"), config_error);
  const auto kv = parse_key_values("# comment\n\n  market.r = 0.05  \n");
  EXPECT_EQ(kv.at("market.r"), "0.05");
}

TEST(Config, NumberForms) {
  EXPECT_EQ(parse_number("2^-6", "k"), 1.0 / 64.0);
  EXPECT_EQ(parse_number("10/252", "k"), 10.0 / 252.0);
  EXPECT_EQ(parse_number(" 0.25 ", "k"), 0.25);
  EXPECT_EQ(parse_number("1e-3", "k"), 1e-3);
  EXPECT_THROW(parse_number("abc", "k"), config_error);
  EXPECT_THROW(parse_number("1/0", "k"), config_error);
}

TEST(Config, Validation) {
  EXPECT_THROW(parse_config_text("collateral = none\n"), config_error);  // no points
  EXPECT_THROW(parse_config_text("points = 3:2.5\n"), config_error);
  EXPECT_THROW(parse_config_text("points = 1:2.5\nsolvers = fd, quantum\n"), config_error);
  EXPECT_THROW(parse_config_text("points = 1:2.5\ncollateral = weird\n"), config_error);
  EXPECT_THROW(parse_config_text("points = 1:2.5\nfd.delta_x = 0.3\n"), config_error);
  EXPECT_THROW(parse_config_text("points = 1:2.5\nmarket.sigma = -1\n"), config_error);
  EXPECT_THROW(parse_config_text("points = 1:2.5\nsweep.param = fd.delta_x\n"),
               config_error);
  EXPECT_THROW(parse_config_text("points = 1:2.5\nsweep.param = fd.delta_x\n"
                                 "sweep.values = ,\n"),
               config_error);
  EXPECT_THROW(parse_config_text("points = 1:2.5\nsweep.param = output.path\n"
                                 "sweep.values = a\n"),
               config_error);
}

TEST(Config, PointForms) {
  const auto a = parse_config_text("points.spot = 2:12\n");
  ASSERT_EQ(a.points.size(), 1u);
  EXPECT_DOUBLE_EQ(a.points[0].x, std::log(12.0));
  const auto b = parse_config_text("points.tau_grid = 0.5:2:0.5\npoints.spot_grid = 8:12:2\n");
  EXPECT_EQ(b.points.size(), 12u);
  EXPECT_DOUBLE_EQ(b.grid.tau_end, 2.0);
  const auto c = parse_config_text("points = 0.5:1, 1:2\ncollateral = delayed\n"
                                   "collateral.t0 = 5/252\ndiff.collateral = two-way\n");
  EXPECT_DOUBLE_EQ(c.grid.tau_end, 1.0);
  EXPECT_TRUE(std::holds_alternative<DelayedCollateral>(c.collateral));
  ASSERT_TRUE(c.diff_collateral.has_value());
}

TEST(Emit, HeaderOnlyForEmptyTable) {
  const std::string csv = to_csv(ResultTable{});
  EXPECT_EQ(csv,
            "scenario,solver,sweep_param,sweep_value,tau,x,value,benchmark,"
            "abs_error,se,ci_lo,ci_hi,wall_ms\n");
}

TEST(Emit, DoublesRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, -0.0751706291790274, 1e-300, 12345.678})
    EXPECT_EQ(std::strtod(detail::format_double(v).c_str(), nullptr), v);
}

TEST(Runner, SmallRunRowsAndJson) {
  const auto cfg = parse_config_text(kSmall);
  const auto table = run_experiment(cfg);
  ASSERT_EQ(table.rows.size(), 6u);
  EXPECT_FALSE(table.any_failed());
  EXPECT_EQ(table.rows[0].solver, "analytic");
  EXPECT_EQ(table.rows[1].solver, "fd");
  EXPECT_EQ(table.rows[2].solver, "mc");
  for (const auto& r : table.rows) {
    ASSERT_TRUE(r.value && r.benchmark && r.abs_error);
    EXPECT_FALSE(r.wall_ms.has_value());
    EXPECT_DOUBLE_EQ(*r.abs_error, std::abs(*r.value - *r.benchmark));
  }
  EXPECT_TRUE(table.rows[2].se && table.rows[2].ci_lo && table.rows[2].ci_hi);
  EXPECT_FALSE(table.rows[0].se.has_value());

  const auto j = nlohmann::json::parse(to_json(table).dump());
  ASSERT_EQ(j.size(), 6u);
  EXPECT_EQ(j[1]["solver"], "fd");
  EXPECT_EQ(j[1]["value"].get<double>(), *table.rows[1].value);
  EXPECT_TRUE(j[0]["se"].is_null());
}

TEST(Runner, RerunIsByteIdentical) {
  const auto cfg = parse_config_text(kSmall);
  EXPECT_EQ(to_csv(run_experiment(cfg)), to_csv(run_experiment(cfg)));
  auto kv = parse_key_values(kSmall);
  kv["threads"] = "1";
  EXPECT_EQ(to_csv(run_experiment(parse_config(kv))), to_csv(run_experiment(cfg)));
}

TEST(Runner, TimingColumnWhenAsked) {
  auto kv = parse_key_values(kSmall);
  kv["output.timing"] = "true";
  kv["solvers"] = "fd";
  const auto table = run_experiment(parse_config(kv));
  for (const auto& r : table.rows) EXPECT_TRUE(r.wall_ms.has_value());
}

TEST(Runner, ReplicatesGetDistinctSeeds) {
  auto kv = parse_key_values(kSmall);
  kv["solvers"] = "mc";
  kv["mc.replicates"] = "3";
  kv["points"] = "2:2.5";
  const auto table = run_experiment(parse_config(kv));
  ASSERT_EQ(table.rows.size(), 3u);
  EXPECT_EQ(table.rows[0].solver, "mc[seed=1]");
  EXPECT_EQ(table.rows[2].solver, "mc[seed=3]");
  EXPECT_NE(*table.rows[0].value, *table.rows[1].value);
}

TEST(Runner, UnsupportedAnalyticMarksRow) {
  auto kv = parse_key_values(kSmall);
  kv["collateral"] = "two-way";
  kv["solvers"] = "analytic";
  kv["benchmark"] = "none";
  const auto table = run_experiment(parse_config(kv));
  EXPECT_TRUE(table.any_failed());
  EXPECT_FALSE(table.rows[0].error.empty());
}

TEST(Scenarios, AllParse) {
  for (const auto& s : builtin_scenarios()) EXPECT_NO_THROW(parse_config_text(s.config)) << s.name;
  EXPECT_THROW(find_scenario("nope"), config_error);
}

TEST(Scenarios, SpaceSweepErrorsShrink) {
  const auto table = run_experiment(parse_config(scenario_kv("fig2-left")));
  ASSERT_EQ(table.rows.size(), 4u);
  EXPECT_EQ(table.rows[0].sweep_param, "fd.delta_x");
  EXPECT_GT(*table.rows[0].abs_error, *table.rows[2].abs_error);
  EXPECT_GT(*table.rows[0].abs_error, *table.rows[3].abs_error);
  EXPECT_LT(*table.rows[2].abs_error, 1e-3);
}

TEST(Scenarios, DelayDifferenceIsPositive) {
  auto kv = scenario_kv("fig5-diff");
  kv["points.tau_grid"] = "1:2:1";
  kv["points.spot_grid"] = "8:24:8";
  const auto table = run_experiment(parse_config(kv));
  ASSERT_EQ(table.rows.size(), 6u);
  EXPECT_FALSE(table.any_failed());
  for (const auto& r : table.rows) {
    EXPECT_GT(*r.value, 0.0) << r.tau << " " << r.x;
    EXPECT_GT(*r.benchmark, 0.0) << r.tau << " " << r.x;
  }
}

TEST(Scenarios, OracleWithinTolerances) {
  const auto table = run_experiment(parse_config(scenario_kv("oracle")));
  ASSERT_EQ(table.rows.size(), 4u);
  EXPECT_NEAR(*table.rows[0].benchmark, oracle::kClosedFormU, 1e-14);
  EXPECT_LT(*table.rows[0].abs_error, 1e-14);
  EXPECT_LT(*table.rows[1].abs_error, 1e-3);
  EXPECT_LT(*table.rows[2].abs_error, 1e-4);
  EXPECT_LT(*table.rows[3].abs_error, 3.0 * *table.rows[3].se);
}

TEST(Scenarios, McIntervalsCoverMostSeeds) {
  auto kv = scenario_kv("fig4");
  kv.erase("sweep.param");
  kv.erase("sweep.values");
  kv["mc.n_paths"] = "2000";
  kv["mc.delta_s"] = "2^-4";
  kv["mc.replicates"] = "40";
  kv["benchmark"] = "analytic";
  const auto table = run_experiment(parse_config(kv));
  ASSERT_EQ(table.rows.size(), 40u);
  int covered = 0;
  for (const auto& r : table.rows)
    if (*r.ci_lo <= *r.benchmark && *r.benchmark <= *r.ci_hi) ++covered;
  EXPECT_GE(covered, 33);
}

TEST(Emit, UnwritablePath) {
  EXPECT_THROW(emit(ResultTable{}, Format::csv, "/nonexistent-dir/x/out.csv"), io_error);
}

TEST(Cli, ExitCodes) {
  const auto dir = temp_dir();
  EXPECT_EQ(run_cli("list-scenarios"), 0);
  EXPECT_EQ(run_cli("scenario oracle --dump-config"), 0);
  EXPECT_EQ(run_cli("scenario no-such-thing"), 1);
  EXPECT_EQ(run_cli("run " + (dir / "missing.cfg").string()), 1);
  EXPECT_EQ(run_cli(""), 1);

  const auto good = dir / "good.cfg";
  const auto out = dir / "good.csv";
  std::ofstream(good) << kSmall << "output.path = " << out.string() << "\n";
  std::filesystem::remove(out);
  EXPECT_EQ(run_cli("run " + good.string()), 0);
  EXPECT_TRUE(std::filesystem::exists(out));

  const auto bad = dir / "bad.cfg";
  std::ofstream(bad) << "points = 1:2.5\nfd.delta_x = 0.3\n";
  EXPECT_EQ(run_cli("run " + bad.string()), 1);

  const auto failing = dir / "failing.cfg";
  std::ofstream(failing) << "points = 1:2.5\ncollateral = two-way\nsolvers = analytic\n"
                            "benchmark = none\n";
  EXPECT_EQ(run_cli("run " + failing.string()), 2);

  const auto unwritable = dir / "unwritable.cfg";
  std::ofstream(unwritable) << "points = 1:2.5\nsolvers = analytic\n"
                               "output.path = /nonexistent-dir/x/out.csv\n";
  EXPECT_EQ(run_cli("run " + unwritable.string()), 1);
}
