#pragma once

// Runs an experiment: every (sweep value, evaluation point, solver) cell
// becomes one result row, with the error against a benchmark value.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <exception>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "xva/analytic.hpp"
#include "xva/fd.hpp"
#include "xva/harness/config.hpp"
#include "xva/heat_kernel.hpp"
#include "xva/monte_carlo.hpp"
#include "xva/parallel.hpp"

namespace xva::harness {

struct Row {
  std::string scenario;
  std::string solver;
  std::string sweep_param;
  std::string sweep_value;
  double tau = 0.0;
  double x = 0.0;
  std::optional<double> value;
  std::optional<double> benchmark;
  std::optional<double> abs_error;
  std::optional<double> se;
  std::optional<double> ci_lo;
  std::optional<double> ci_hi;
  std::optional<double> wall_ms;
  std::string error;  // non-empty when the solver failed for this row
};

struct ResultTable {
  std::vector<Row> rows;

  bool any_failed() const {
    return std::any_of(rows.begin(), rows.end(),
                       [](const Row& r) { return !r.error.empty(); });
  }
};

namespace detail {

using Clock = std::chrono::steady_clock;

inline double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

/// u for the configured regime, or u[collateral] - u[diff] in diff mode.
template <typename Fn>
double regime_value(const ExperimentConfig& cfg, Fn&& solve_one) {
  const double a = solve_one(cfg.collateral);
  if (!cfg.diff_collateral) return a;
  return a - solve_one(*cfg.diff_collateral);
}

inline bool analytic_valid(const ExperimentConfig& cfg) {
  return closed_form_applies(cfg.collateral) &&
         (!cfg.diff_collateral || closed_form_applies(*cfg.diff_collateral));
}

inline double analytic_value(const ExperimentConfig& cfg, const EvalPoint& pt) {
  return regime_value(cfg, [&](const CollateralSpec& s) {
    return closed_form_u({cfg.market, cfg.contract, pt}, s);
  });
}

inline double hk_value(const ExperimentConfig& cfg, const EvalPoint& pt,
                       const heat_kernel::QuadratureSpec& q,
                       std::size_t workers) {
  return regime_value(cfg, [&](const CollateralSpec& s) {
    return heat_kernel::quad_u(pt.tau, pt.x, s, cfg.market, cfg.contract, q,
                               workers);
  });
}

inline std::optional<double> benchmark_value(const ExperimentConfig& cfg,
                                             const EvalPoint& pt,
                                             std::size_t workers) {
  BenchmarkKind kind = cfg.benchmark;
  if (kind == BenchmarkKind::none) return std::nullopt;
  if (kind == BenchmarkKind::automatic)
    kind = analytic_valid(cfg) ? BenchmarkKind::analytic : BenchmarkKind::hk;
  if (kind == BenchmarkKind::analytic) return analytic_value(cfg, pt);
  if (pt.tau == 0.0) return 0.0;
  auto q = heat_kernel::QuadratureSpec::benchmark().snapped_to(pt.tau);
  return hk_value(cfg, pt, q, workers);
}

struct Cell {
  std::string sweep_param;
  std::string sweep_value;
  ExperimentConfig cfg;
};

inline std::vector<Cell> expand(const ExperimentConfig& base) {
  std::vector<Cell> cells;
  if (!base.sweep) {
    cells.push_back({"", "", base});
    return cells;
  }
  for (const auto& value : base.sweep->values) {
    KeyValues kv = base.raw;
    kv[base.sweep->param] = value;
    cells.push_back({base.sweep->param, value, parse_config(kv)});
  }
  return cells;
}

/// One unit of work: a solver (or the benchmark) over all points of a cell.
struct Task {
  std::size_t cell = 0;
  std::optional<SolverKind> solver;  // empty -> benchmark
  std::size_t replicate = 0;
};

struct Outcome {
  std::optional<double> value, se;
  double wall_ms = 0.0;
  std::string error;
};

inline std::string describe_error() {
  try {
    throw;
  } catch (const std::exception& e) {
    return e.what();
  } catch (...) {
    return "unknown error";
  }
}

inline std::vector<Outcome> run_task(const Cell& cell, const Task& task,
                                     std::size_t workers) {
  const auto& cfg = cell.cfg;
  std::vector<Outcome> out(cfg.points.size());

  auto per_point = [&](auto&& fn) {
    for (std::size_t k = 0; k < cfg.points.size(); ++k) {
      const auto start = Clock::now();
      try {
        fn(cfg.points[k], out[k]);
      } catch (...) {
        out[k] = Outcome{};
        out[k].error = describe_error();
      }
      out[k].wall_ms = elapsed_ms(start);
    }
  };

  if (!task.solver) {
    per_point([&](const EvalPoint& pt, Outcome& o) {
      o.value = benchmark_value(cfg, pt, workers);
    });
    return out;
  }

  switch (*task.solver) {
    case SolverKind::analytic:
      per_point([&](const EvalPoint& pt, Outcome& o) {
        o.value = analytic_value(cfg, pt);
      });
      break;
    case SolverKind::hk:
      per_point([&](const EvalPoint& pt, Outcome& o) {
        o.value = hk_value(cfg, pt, cfg.quadrature, workers);
      });
      break;
    case SolverKind::mc:
      per_point([&](const EvalPoint& pt, Outcome& o) {
        mc::McSpec spec = cfg.mc;
        spec.seed = cfg.mc.seed + task.replicate;
        const auto r =
            cfg.diff_collateral
                ? mc::estimate_difference(pt.tau, pt.x, cfg.collateral,
                                          *cfg.diff_collateral, cfg.market,
                                          cfg.contract, spec, workers)
                : mc::estimate(pt.tau, pt.x, cfg.collateral, cfg.market,
                               cfg.contract, spec, workers);
        o.value = r.u_total;
        o.se = r.se_total;
      });
      break;
    case SolverKind::fd: {
      // One solve per regime covers every point of the cell.
      const auto start = Clock::now();
      std::vector<double> taus;
      for (const auto& pt : cfg.points) taus.push_back(pt.tau);
      try {
        const auto solve = [&](const CollateralSpec& s) {
          return fd::solve(cfg.grid, s, cfg.market, cfg.contract,
                           cfg.integrator, taus);
        };
        const auto primary = solve(cfg.collateral);
        std::optional<fd::Solution> other;
        if (cfg.diff_collateral) other = solve(*cfg.diff_collateral);
        const double ms = elapsed_ms(start);
        for (std::size_t k = 0; k < cfg.points.size(); ++k) {
          const auto& pt = cfg.points[k];
          try {
            double val = primary.at(pt.tau, pt.x);
            if (other) val -= other->at(pt.tau, pt.x);
            out[k].value = val;
          } catch (...) {
            out[k].error = describe_error();
          }
          out[k].wall_ms = ms;
        }
      } catch (...) {
        const std::string msg = describe_error();
        for (auto& o : out) {
          o.error = msg;
          o.wall_ms = elapsed_ms(start);
        }
      }
      break;
    }
  }
  return out;
}

}  // namespace detail

/// Runs every cell. Tasks execute on a worker pool; rows are assembled in
/// sweep-major, point-minor, solver order independent of scheduling.
inline ResultTable run_experiment(const ExperimentConfig& cfg) {
  if (cfg.solvers.empty()) throw config_error("no solvers selected");
  const auto cells = detail::expand(cfg);

  std::vector<detail::Task> tasks;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    tasks.push_back({c, std::nullopt, 0});
    for (auto s : cells[c].cfg.solvers) {
      const std::size_t reps =
          s == SolverKind::mc ? cells[c].cfg.mc_replicates : 1;
      for (std::size_t k = 0; k < reps; ++k) tasks.push_back({c, s, k});
    }
  }

  const std::size_t threads = cfg.threads ? cfg.threads : default_workers();
  const std::size_t pool = std::min(threads, tasks.size());
  const std::size_t inner = std::max<std::size_t>(1, threads / std::max<std::size_t>(pool, 1));
  std::vector<std::vector<detail::Outcome>> results(tasks.size());
  parallel_for(tasks.size(), pool, [&](std::size_t t) {
    results[t] = detail::run_task(cells[tasks[t].cell], tasks[t], inner);
  });

  ResultTable table;
  std::size_t t = 0;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto& cell = cells[c];
    const auto& bench = results[t];
    const std::size_t first_solver_task = t + 1;
    std::size_t n_solver_tasks = 0;
    for (auto s : cell.cfg.solvers)
      n_solver_tasks += s == SolverKind::mc ? cell.cfg.mc_replicates : 1;

    for (std::size_t k = 0; k < cell.cfg.points.size(); ++k) {
      for (std::size_t j = 0; j < n_solver_tasks; ++j) {
        const auto& task = tasks[first_solver_task + j];
        const auto& o = results[first_solver_task + j][k];
        Row row;
        row.scenario = cell.cfg.scenario;
        row.solver = to_string(*task.solver);
        if (*task.solver == SolverKind::mc && cell.cfg.mc_replicates > 1)
          row.solver += "[seed=" + std::to_string(cell.cfg.mc.seed + task.replicate) + "]";
        row.sweep_param = cell.sweep_param;
        row.sweep_value = cell.sweep_value;
        row.tau = cell.cfg.points[k].tau;
        row.x = cell.cfg.points[k].x;
        row.value = o.value;
        row.benchmark = bench[k].value;
        if (row.value && row.benchmark)
          row.abs_error = std::abs(*row.value - *row.benchmark);
        if (o.se) {
          row.se = o.se;
          row.ci_lo = *o.value - 1.96 * *o.se;
          row.ci_hi = *o.value + 1.96 * *o.se;
        }
        if (cell.cfg.timing) row.wall_ms = o.wall_ms;
        row.error = o.error;
        if (row.error.empty() && !bench[k].error.empty())
          row.error = "benchmark: " + bench[k].error;
        table.rows.push_back(std::move(row));
      }
    }
    t = first_solver_task + n_solver_tasks;
  }
  return table;
}

}  // namespace xva::harness
