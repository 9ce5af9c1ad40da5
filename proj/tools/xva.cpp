// xva: batch runner for the valuation-adjustment solvers.
//
//   xva run <config-file>
//   xva scenario <name> [--out DIR] [--seed S] [--format csv|json]
//   xva list-scenarios
//
// Exit codes: 0 success, 1 configuration or I/O error, 2 solver error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "xva/harness/config.hpp"
#include "xva/harness/emit.hpp"
#include "xva/harness/runner.hpp"
#include "xva/harness/scenarios.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kSolverError = 2;

int execute(const xva::harness::ExperimentConfig& cfg,
            const std::string& out_path) {
  using namespace xva::harness;
  const ResultTable table = run_experiment(cfg);
  if (out_path.empty()) {
    emit(table, cfg.format, std::cout);
  } else {
    emit(table, cfg.format, out_path);
    std::cerr << "wrote " << table.rows.size() << " rows to " << out_path << '\n';
  }
  int failed = 0;
  for (const auto& r : table.rows)
    if (!r.error.empty()) {
      std::cerr << "error: " << r.solver << " at tau=" << r.tau
                << " x=" << r.x << ": " << r.error << '\n';
      ++failed;
    }
  return failed ? kSolverError : kOk;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw xva::config_error("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  using namespace xva::harness;

  CLI::App app{"Valuation adjustments for European calls: finite differences, "
               "heat-kernel quadrature and Monte Carlo"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run an experiment from a config file");
  std::string config_path;
  run->add_option("config", config_path, "key = value config file")->required();

  auto* scen = app.add_subcommand("scenario", "run a builtin scenario");
  std::string name, out_dir, format;
  std::uint64_t seed = 0;
  bool dump = false, timing = false;
  scen->add_option("name", name, "scenario name")->required();
  scen->add_option("--out", out_dir, "directory for <name>.csv / <name>.json");
  auto* seed_opt = scen->add_option("--seed", seed, "Monte-Carlo seed");
  scen->add_option("--format", format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  scen->add_flag("--timing", timing, "fill the wall_ms column");
  scen->add_flag("--dump-config", dump, "print the scenario config and exit");

  auto* list = app.add_subcommand("list-scenarios", "list builtin scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (list->parsed()) {
      for (const auto& s : builtin_scenarios())
        std::cout << s.name << "\t" << s.description << '\n';
      return kOk;
    }
    if (run->parsed()) {
      const auto cfg = parse_config_text(read_file(config_path));
      return execute(cfg, cfg.output_path);
    }
    const Scenario& s = find_scenario(name);
    if (dump) {
      std::cout << s.config;
      return kOk;
    }
    KeyValues kv = parse_key_values(s.config);
    if (*seed_opt) kv["mc.seed"] = std::to_string(seed);
    if (!format.empty()) kv["output.format"] = format;
    if (timing) kv["output.timing"] = "true";
    const auto cfg = parse_config(kv);
    std::string out_path;
    if (!out_dir.empty()) {
      std::filesystem::create_directories(out_dir);
      out_path = (std::filesystem::path(out_dir) /
                  (s.name + (cfg.format == Format::csv ? ".csv" : ".json")))
                     .string();
    }
    return execute(cfg, out_path);
  } catch (const xva::config_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const io_error& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kSolverError;
  }
}
