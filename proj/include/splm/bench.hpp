#pragma once

#include "splm/alm.hpp"
#include "splm/constants.hpp"
#include "splm/param_rules.hpp"
#include "splm/qp.hpp"
#include "splm/solver.hpp"
#include "splm/types.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace splm {

struct BenchCell {
  int n = 0;
  int m = 0;
  double min_eig = 0.0;

  std::string tag() const {
    return "n" + std::to_string(n) + "_m" + std::to_string(m) + "_eig" +
           detail::csv_double(min_eig);
  }
};

/// Experiment grid: cells x trials, one seeded instance per (cell, trial),
/// shared across solver selections.
struct BenchConfig {
  std::vector<BenchCell> cells;
  int trials = 5;
  std::uint64_t base_seed = 1;
  double eps = 1e-5;
  std::vector<std::string> solvers{"splm", "alm"};
  std::string out_dir;
  int trace_stride = 1;
  bool zero_time = false;           // report 0.0 in time columns (regression diffs)
  long splm_max_grad_evals = 100000;
  long alm_max_grad_evals = 400000;

  void validate() const {
    if (cells.empty()) throw ContractViolation("bench config: cells must be nonempty");
    if (trials < 1) throw ContractViolation("bench config: trials must be >= 1");
    if (!(eps > 0.0)) throw ContractViolation("bench config: eps must be positive");
    if (trace_stride < 1) throw ContractViolation("bench config: trace_stride >= 1");
    if (solvers.empty()) throw ContractViolation("bench config: no solvers selected");
    for (const auto& s : solvers)
      if (s != "splm" && s != "alm")
        throw ContractViolation("bench config: unknown solver '" + s + "'");
    for (const auto& c : cells)
      if (c.n < 1 || c.m < 0 || !(c.min_eig < 0.0))
        throw ContractViolation("bench config: bad cell");
  }

  static BenchConfig from_json(const nlohmann::json& j) {
    BenchConfig cfg;
    if (j.contains("cells"))
      for (const auto& c : j.at("cells"))
        cfg.cells.push_back(BenchCell{c.at(0).get<int>(), c.at(1).get<int>(),
                                      c.at(2).get<double>()});
    cfg.trials = j.value("trials", cfg.trials);
    cfg.base_seed = j.value("base_seed", cfg.base_seed);
    cfg.eps = j.value("eps", cfg.eps);
    if (j.contains("solvers")) cfg.solvers = j.at("solvers").get<std::vector<std::string>>();
    cfg.out_dir = j.value("out_dir", cfg.out_dir);
    cfg.trace_stride = j.value("trace_stride", cfg.trace_stride);
    cfg.zero_time = j.value("zero_time", cfg.zero_time);
    cfg.splm_max_grad_evals = j.value("splm_max_grad_evals", cfg.splm_max_grad_evals);
    cfg.alm_max_grad_evals = j.value("alm_max_grad_evals", cfg.alm_max_grad_evals);
    return cfg;
  }
};

/// Writes (cumulative grad_evals, gap) pairs for external plotting.
inline void emit_convergence_data(const SolveTrace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << "grad_evals,gap\n";
  for (const TraceRow& r : trace.rows)
    out << r.grad_evals << ',' << detail::csv_double(r.gap) << '\n';
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

struct BenchRunRow {
  int trial = 0;
  std::string solver;
  double gap = 0.0;
  double time_s = 0.0;
  long grad_evals = 0;
  long obj_evals = 0;
  bool oracle_error = false;
};

namespace detail {

inline void write_trace_csv_strided(const SolveTrace& trace, const std::string& path,
                                    int stride, bool zero_time) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << "iter,dual_res,primal_infeas,compl_slack,gap,grad_evals,h_evals,wall_ms\n";
  const size_t count = trace.rows.size();
  for (size_t i = 0; i < count; ++i) {
    if (i % static_cast<size_t>(stride) != 0 && i + 1 != count) continue;
    const TraceRow& r = trace.rows[i];
    out << r.iter << ',' << csv_double(r.dual_res) << ',' << csv_double(r.primal_infeas)
        << ',' << csv_double(r.compl_slack) << ',' << csv_double(r.gap) << ','
        << r.grad_evals << ',' << r.h_evals << ','
        << csv_double(zero_time ? 0.0 : r.wall_ms) << '\n';
  }
}

}  // namespace detail

/// Runs the full grid and writes one summary CSV per cell plus per-run trace
/// and convergence-curve CSVs. Returns 0 on success, 2 when any run aborted
/// on an oracle error. Rows are ordered by (trial, solver), so output bytes
/// do not depend on scheduling.
inline int run_bench(const BenchConfig& cfg) {
  cfg.validate();
  std::string out_dir = cfg.out_dir;
  if (out_dir.empty()) {
    if (const char* env = std::getenv("SPLM_BENCH_OUT")) out_dir = env;
    if (out_dir.empty()) out_dir = "bench_out";
  }
  std::filesystem::create_directories(out_dir);

  std::vector<std::string> solvers = cfg.solvers;
  std::sort(solvers.begin(), solvers.end());
  int exit_code = 0;

  for (const BenchCell& cell : cfg.cells) {
    std::vector<BenchRunRow> rows;
    for (int trial = 0; trial < cfg.trials; ++trial) {
      const std::uint64_t seed = cfg.base_seed + static_cast<std::uint64_t>(trial);
      const auto inst =
          std::make_shared<const QpInstance>(generate_qp(cell.n, cell.m, cell.min_eig, seed));
      const Problem problem = to_problem(inst);

      for (const std::string& solver_name : solvers) {
        BenchRunRow row;
        row.trial = trial;
        row.solver = solver_name;
        SolveTrace trace;
        if (solver_name == "splm") {
          SplmParams params = practical_defaults(*inst);
          params.target_gap = cfg.eps;
          params.max_iters = std::max<long>(1, cfg.splm_max_grad_evals / 2);
          auto [state, tr] = solve(problem, params);
          trace = std::move(tr);
        } else {
          AlmParams params;
          params.target_gap = cfg.eps;
          params.max_total_inner = std::max<long>(1, cfg.alm_max_grad_evals / 2);
          const ProblemConstants constants = estimate_constants(
              problem, ConstantsMode::AnalyticQp, 100, seed ^ 0x5eedULL);
          auto [x, y, tr] = solve_alm(problem, params, constants);
          trace = std::move(tr);
        }
        row.gap = trace.final_gap;
        row.time_s = trace.wall_ms_total / 1000.0;
        row.grad_evals = trace.tally.grad_evals;
        row.obj_evals = trace.tally.obj_evals;
        row.oracle_error = trace.status == SolveStatus::OracleError;
        if (row.oracle_error) exit_code = 2;

        const std::string stem =
            out_dir + "/" + cell.tag() + "_t" + std::to_string(trial) + "_" + solver_name;
        detail::write_trace_csv_strided(trace, stem + "_trace.csv", cfg.trace_stride,
                                        cfg.zero_time);
        emit_convergence_data(trace, stem + "_curve.csv");
        rows.push_back(std::move(row));
      }
    }

    std::ofstream out(out_dir + "/summary_" + cell.tag() + ".csv", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write summary for cell " + cell.tag());
    out << "trial,solver,gap,time_s,grad_evals,obj_evals\n";
    for (const BenchRunRow& r : rows) {
      out << r.trial << ',' << r.solver << ',' << detail::csv_double(r.gap) << ','
          << detail::csv_double(cfg.zero_time ? 0.0 : r.time_s) << ',' << r.grad_evals
          << ',' << r.obj_evals << '\n';
    }
  }
  return exit_code;
}

}  // namespace splm
