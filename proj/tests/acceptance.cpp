// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one pass/fail line per criterion. Exit code is the number of
// failed criteria.

#include "splm/alm.hpp"
#include "splm/bench.hpp"
#include "splm/constants.hpp"
#include "splm/diagnostics.hpp"
#include "splm/param_rules.hpp"
#include "splm/qp.hpp"
#include "splm/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include "test_support.hpp"

using namespace splm;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::cout << (pass ? "[PASS]" : "[FAIL]") << " criterion " << criterion << ": "
            << detail << std::endl;
  if (!pass) ++failures;
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct TinySpec {
  int n;
  int m;
  std::uint64_t seed;
};

std::vector<TinySpec> tiny_specs(int count) {
  std::vector<TinySpec> specs;
  for (int k = 0; k < count; ++k)
    specs.push_back(TinySpec{2 + (k % 4), 1 + (k % 2), static_cast<std::uint64_t>(100 + k)});
  return specs;
}

// ---------------------------------------------------------------------------
// 1. Convex-toy KKT exactness
void criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  const Problem p = testing::convex_toy();
  SplmParams params;
  params.p = 1.0;
  params.c = 0.1;
  params.alpha = 0.1;
  params.beta = 0.5;
  params.dual_bound = 1e4;
  params.target_gap = 1e-8;
  params.max_iters = 1000000;
  const auto [state, trace] = solve(p, params);
  const double secs = seconds_since(t0);
  const bool pass = trace.status == SolveStatus::Converged && trace.final_gap <= 1e-8 &&
                    std::abs(state.x[0] - 1.0) <= 1e-6 &&
                    std::abs(state.y[0] - 1.0) <= 1e-4 && secs < 1.0;
  std::ostringstream os;
  os << "convex toy: gap " << trace.final_gap << ", |x-1| = " << std::abs(state.x[0] - 1.0)
     << ", |y-1| = " << std::abs(state.y[0] - 1.0) << ", " << trace.rows.size()
     << " iters, " << secs << " s";
  report(1, pass, os.str());
}

// ---------------------------------------------------------------------------
// 2. Experimental-scale reproduction; 3. zero objective evaluations; 4.
// baseline dominance. Shared runs.
void criteria234() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint64_t base_seed = 1;
  const int trials = 5;
  const std::vector<int> sizes{50, 100, 200};
  const std::vector<double> eigs{-0.1, -1.0, -10.0};

  bool all_cells_ok = true;
  bool all_obj_zero = true;
  long probe_obj_calls = 0;
  std::vector<long> splm_grads_50_neg10;
  std::ostringstream cells_detail;

  for (const int n : sizes) {
    for (const double eig : eigs) {
      int converged = 0;
      std::vector<long> grads;
      for (int trial = 0; trial < trials; ++trial) {
        const QpInstance inst =
            generate_qp(n, 20, eig, base_seed + static_cast<std::uint64_t>(trial));
        testing::ProbeLog log;
        const Problem problem = testing::with_probes(to_problem(inst), log);
        SplmParams params = practical_defaults(inst);
        params.target_gap = 1e-5;
        params.max_iters = 100000 / 2;  // grad budget 1e5, two first-order calls/iter
        const auto [state, trace] = solve(problem, params);
        if (trace.status == SolveStatus::Converged && trace.final_gap <= 1e-5 &&
            trace.tally.grad_evals <= 100000) {
          ++converged;
          grads.push_back(trace.tally.grad_evals);
        }
        all_obj_zero &= trace.tally.obj_evals == 0;
        probe_obj_calls += log.obj;
        if (n == 50 && eig == -10.0)
          splm_grads_50_neg10.push_back(trace.tally.grad_evals);
      }
      if (converged < 4) all_cells_ok = false;
      long med = -1;
      if (!grads.empty()) {
        std::sort(grads.begin(), grads.end());
        med = grads[grads.size() / 2];
      }
      cells_detail << "(" << n << "," << eig << "):" << converged << "/5 med " << med
                   << "  ";
    }
  }

  // median for (n=50, eig=-10) within a factor 5 of the reported 5118-7094 band
  std::vector<long> g = splm_grads_50_neg10;
  std::sort(g.begin(), g.end());
  const long median_50 = g[g.size() / 2];
  const bool band_ok = median_50 >= 5118 / 5 && median_50 <= 7094 * 5;
  const double secs = seconds_since(t0);
  const bool pass2 = all_cells_ok && band_ok && secs < 300.0;
  std::ostringstream os2;
  os2 << "grid " << cells_detail.str() << "| (50,-10) median " << median_50
      << " vs band [1024, 35470], " << secs << " s";
  report(2, pass2, os2.str());

  std::ostringstream os3;
  os3 << "objective value calls across all runs: tally 0 everywhere = "
      << (all_obj_zero ? "yes" : "no") << ", probe counter " << probe_obj_calls;
  report(3, all_obj_zero && probe_obj_calls == 0, os3.str());

  // criterion 4: classical ALM baseline on the (50, 20, -10) cell
  int dominance = 0;
  int alm_converged = 0;
  std::ostringstream os4;
  for (int trial = 0; trial < trials; ++trial) {
    const QpInstance inst =
        generate_qp(50, 20, -10.0, base_seed + static_cast<std::uint64_t>(trial));
    const Problem problem = to_problem(inst);
    AlmParams params;
    params.target_gap = 1e-5;
    params.max_total_inner = 200000;  // grad budget ~4e5
    const ProblemConstants constants =
        estimate_constants(problem, ConstantsMode::AnalyticQp, 100, inst.seed ^ 0x5eedULL);
    const auto [x, y, trace] = solve_alm(problem, params, constants);
    const long splm_grads = splm_grads_50_neg10[static_cast<size_t>(trial)];
    if (trace.status == SolveStatus::Converged) ++alm_converged;
    if (trace.tally.grad_evals >= 2 * splm_grads) ++dominance;
    os4 << trace.tally.grad_evals << (trace.status == SolveStatus::Converged ? "" : "*")
        << "/" << splm_grads << " ";
  }
  os4 << "(alm/splm grads, * = gap not reached; alm converged " << alm_converged
      << "/5)";
  report(4, dominance >= 4, os4.str());
}

// ---------------------------------------------------------------------------
// 5. Potential descent suite
void criterion5() {
  const auto t0 = std::chrono::steady_clock::now();
  bool pass = true;
  double worst_increase = -1e300;
  double worst_floor = 1e300;
  int done = 0;
  for (const TinySpec& spec : tiny_specs(20)) {
    const QpInstance inst = make_diagnostic_qp(spec.n, spec.m, -0.25, spec.seed);
    const Problem problem = to_problem(inst);
    const ProblemConstants k =
        estimate_constants(problem, ConstantsMode::AnalyticQp, 200, spec.seed ^ 0x5eedULL);
    const SplmParams params = theoretical_params(k, 0.75, spec.m, 2.0, 0.1);
    InnerSolveConfig cfg;
    cfg.tol = 1e-8;
    const PhiDescentReport rep = check_phi_descent(problem, params, k, cfg, 200);
    pass &= rep.monotonicity_violations == 0 && rep.floor_violations == 0 &&
            !rep.cap_binding_any;
    worst_increase = std::max(worst_increase, rep.worst_increase);
    worst_floor = std::min(worst_floor, rep.min_floor_margin);
    ++done;
  }
  const double secs = seconds_since(t0);
  pass &= secs < 120.0;
  std::ostringstream os;
  os << done << " instances x 200 steps: worst increase " << worst_increase
     << " (slack 1e-7), min floor margin " << worst_floor << ", " << secs << " s";
  report(5, pass, os.str());
}

// ---------------------------------------------------------------------------
// 6. Error-bound suite
void criterion6() {
  bool pass = true;
  double worst = 0.0;
  for (const TinySpec& spec : tiny_specs(5)) {
    const QpInstance inst = make_diagnostic_qp(spec.n, spec.m, -0.25, spec.seed + 50);
    const Problem problem = to_problem(inst);
    const ProblemConstants k = estimate_constants(problem, ConstantsMode::AnalyticQp, 200,
                                                  spec.seed ^ 0xabcULL);
    const SplmParams params = theoretical_params(k, 0.75, spec.m, 2.0, 0.1);
    InnerSolveConfig cfg;
    cfg.tol = 1e-8;
    const EbReport rep = check_error_bounds(problem, params, k, cfg, 100, spec.seed + 7);
    pass &= rep.pass();
    worst = std::max({worst, rep.eb1.worst_adjusted, rep.eb2.worst_adjusted,
                      rep.eb3.worst_adjusted, rep.eb4.worst_adjusted});
  }
  std::ostringstream os;
  os << "eb1-eb4 over 5 instances x 100 probes: worst slack-adjusted ratio " << worst;
  report(6, pass && worst < 1.0, os.str());
}

// ---------------------------------------------------------------------------
// 7. Danskin and minimax checks on the scalar toy
void criterion7() {
  const Problem p = testing::convex_toy();
  const ProblemConstants k = estimate_constants(p, ConstantsMode::Sampled, 200, 4);
  SplmParams params;
  params.p = 1.5;
  params.dual_bound = 1e4;
  InnerSolveConfig cfg;

  // finite-difference gradient of d in y vs h(x(y,z))
  double worst_fd = 0.0;
  Rng rng(70);
  for (int trial = 0; trial < 5; ++trial) {
    const double y = rng.uniform(0.1, 3.0);
    const double z = rng.uniform(-1.0, 1.0);
    const double delta = 1e-4;
    const double fd = (dual_function(Vec::Constant(1, y + delta), Vec::Constant(1, z),
                                     params, p, k, cfg) -
                       dual_function(Vec::Constant(1, y - delta), Vec::Constant(1, z),
                                     params, p, k, cfg)) /
                      (2.0 * delta);
    const Vec x = solve_inner_x(Vec::Constant(1, y), Vec::Constant(1, z), params, p, k, cfg);
    worst_fd = std::max(worst_fd, std::abs(fd - p.constraints(x)[0]));
  }

  // nested-grid min-max vs max-min vs the ascent value of P(z) at z = 0
  const Vec z0 = Vec::Zero(1);
  const ProxValueResult pv = prox_value_P(z0, params, p, k, cfg);
  const double x_step = 1e-3, y_step = 1e-3, y_cap = 5.0;
  double minmax = std::numeric_limits<double>::infinity();
  for (double x = -10.0; x <= 10.0 + 1e-12; x += x_step) {
    double inner = -std::numeric_limits<double>::infinity();
    const double fx = 0.5 * x * x + 0.5 * params.p * x * x;
    const double hx = 1.0 - x;
    for (double y = 0.0; y <= y_cap + 1e-12; y += y_step)
      inner = std::max(inner, fx + y * hx);
    minmax = std::min(minmax, inner);
  }
  double maxmin = -std::numeric_limits<double>::infinity();
  for (double y = 0.0; y <= y_cap + 1e-12; y += y_step) {
    double inner = std::numeric_limits<double>::infinity();
    for (double x = -10.0; x <= 10.0 + 1e-12; x += x_step) {
      const double val = 0.5 * x * x + y * (1.0 - x) + 0.5 * params.p * x * x;
      inner = std::min(inner, val);
    }
    maxmin = std::max(maxmin, inner);
  }
  const double ident_err = std::abs(minmax - maxmin);
  const double ascent_err = std::abs(maxmin - pv.value);
  const bool pass = worst_fd <= 1e-4 && ident_err <= 2e-4 && ascent_err <= 2e-4;
  std::ostringstream os;
  os << "worst FD mismatch " << worst_fd << ", |minmax - maxmin| = " << ident_err
     << ", |maxmin - P(z)| = " << ascent_err;
  report(7, pass, os.str());
}

// ---------------------------------------------------------------------------
// 8. lambda1 certificate bound along diagnostic runs
void criterion8() {
  long violations = 0;
  double worst = 0.0;
  for (const TinySpec& spec : tiny_specs(5)) {
    const QpInstance inst = make_diagnostic_qp(spec.n, spec.m, -0.25, spec.seed + 300);
    const Problem problem = to_problem(inst);
    const ProblemConstants k = estimate_constants(problem, ConstantsMode::AnalyticQp, 200,
                                                  spec.seed ^ 0x77ULL);
    // one theoretically parameterized run and one practical-style run
    const SplmParams theo = theoretical_params(k, 0.75, spec.m, 2.0, 0.1);
    const CertificateBoundReport r1 = check_certificate_bound(problem, theo, k, 300);
    SplmParams prac = practical_defaults(inst);
    prac.p = 2.0 * k.lip_grad_f;
    prac.c = 0.5 / (k.lip_grad_f + prac.p);
    const CertificateBoundReport r2 = check_certificate_bound(problem, prac, k, 300);
    violations += r1.violations + r2.violations;
    worst = std::max({worst, r1.worst_ratio, r2.worst_ratio});
  }
  std::ostringstream os;
  os << "||xi|| <= lambda1 * max(||dx||,||dz||): worst ratio " << worst << ", violations "
     << violations;
  report(8, violations == 0, os.str());
}

// ---------------------------------------------------------------------------
// 9. Benchmark determinism
void criterion9() {
  const fs::path dir1 = fs::temp_directory_path() / "splm_accept_det1";
  const fs::path dir2 = fs::temp_directory_path() / "splm_accept_det2";
  fs::remove_all(dir1);
  fs::remove_all(dir2);
  BenchConfig cfg;
  cfg.cells = {{5, 2, -1.0}, {8, 3, -0.5}};
  cfg.trials = 3;
  cfg.eps = 1e-4;
  cfg.zero_time = true;  // timing columns are the one nondeterministic field
  cfg.alm_max_grad_evals = 100000;
  cfg.out_dir = dir1.string();
  const int rc1 = run_bench(cfg);
  cfg.out_dir = dir2.string();
  const int rc2 = run_bench(cfg);

  bool identical = rc1 == 0 && rc2 == 0;
  int compared = 0;
  for (const auto& entry : fs::directory_iterator(dir1)) {
    const fs::path other = dir2 / entry.path().filename();
    std::ifstream a(entry.path(), std::ios::binary), b(other, std::ios::binary);
    std::ostringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    if (sa.str() != sb.str() || sa.str().empty()) identical = false;
    ++compared;
  }
  std::ostringstream os;
  os << "rerun of a 2-cell config: " << compared
     << " output files compared byte-for-byte (stable-time mode), identical = "
     << (identical ? "yes" : "no");
  report(9, identical && compared > 0, os.str());
  fs::remove_all(dir1);
  fs::remove_all(dir2);
}

}  // namespace

int main() {
  std::cout << "acceptance suite\n";
  criterion1();
  criteria234();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  std::cout << (failures == 0 ? "ALL CRITERIA PASSED" : "FAILURES PRESENT") << " ("
            << (9 - failures) << "/9)\n";
  return failures;
}
