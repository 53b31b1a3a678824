#pragma once

#include "splm/box.hpp"
#include "splm/problem.hpp"
#include "splm/rng.hpp"
#include "splm/stationarity.hpp"
#include "splm/types.hpp"

#include <charconv>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace splm {

/// Algorithm parameters: alpha (dual step), beta (proximal mixing in (0,1]),
/// c (primal step), p (proximal weight), dual_bound B defining Y = [0,B]^m,
/// plus termination controls.
struct SplmParams {
  double alpha = 0.01;
  double beta = 0.05;
  double c = 0.01;
  double p = 1.0;
  double dual_bound = 1e4;
  long max_iters = 100000;
  double target_gap = 1e-5;
  // Stationarity is evaluated every gap_stride iterations (and on the final
  // one); trace rows are recorded at the same cadence.
  int gap_stride = 1;

  void validate() const {
    if (!(alpha > 0.0)) throw ContractViolation("params: alpha must be positive");
    if (!(beta > 0.0 && beta <= 1.0)) throw ContractViolation("params: beta in (0,1]");
    if (!(c > 0.0)) throw ContractViolation("params: c must be positive");
    if (!(p > 0.0)) throw ContractViolation("params: p must be positive");
    if (!(dual_bound > 0.0)) throw ContractViolation("params: dual bound must be positive");
    if (max_iters < 1) throw ContractViolation("params: max_iters must be >= 1");
    if (!(target_gap >= 0.0)) throw ContractViolation("params: target_gap must be >= 0");
    if (gap_stride < 1) throw ContractViolation("params: gap_stride must be >= 1");
  }
};

/// Primal/proximal/dual triple evolved by the iteration.
struct IterateState {
  Vec x;
  Vec z;
  Vec y;
  long iter = 0;
};

enum class SolveStatus { Converged, MaxIters, OracleError };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIters: return "max_iters";
    case SolveStatus::OracleError: return "oracle_error";
  }
  return "unknown";
}

struct TraceRow {
  long iter = 0;
  double dual_res = 0.0;
  double primal_infeas = 0.0;
  double compl_slack = 0.0;
  double gap = 0.0;
  long grad_evals = 0;
  long h_evals = 0;
  double wall_ms = 0.0;
};

struct SolveTrace {
  std::vector<TraceRow> rows;
  SolveStatus status = SolveStatus::MaxIters;
  OracleTally tally;
  double wall_ms_total = 0.0;
  double final_gap = std::numeric_limits<double>::infinity();
};

/// One projected primal step: Pi_X(x - c grad_x K(x,z;y)).
inline Vec primal_step(const IterateState& state, const SplmParams& params,
                       const Problem& problem) {
  Vec g = problem.gradient(state.x);
  detail::require_finite(g, "objective gradient");
  g += params.p * (state.x - state.z);
  if (problem.num_m > 0) {
    Mat jac = problem.jacobian(state.x);
    detail::require_finite(jac, "constraint Jacobian");
    g.noalias() += jac.transpose() * state.y;
  }
  return project_box(state.x - params.c * g, problem.box);
}

/// Clipped dual ascent: clamp(y + alpha h_new, [0, B]) componentwise.
inline Vec dual_step(const Vec& y, const Vec& h_new, const SplmParams& params) {
  if (y.size() != h_new.size()) throw ContractViolation("dual_step: dimension mismatch");
  return (y + params.alpha * h_new).cwiseMax(0.0).cwiseMin(params.dual_bound);
}

/// Proximal-center update: z + beta (x_new - z).
inline Vec prox_step(const Vec& z, const Vec& x_new, double beta) {
  if (!(beta > 0.0 && beta <= 1.0)) throw ContractViolation("prox_step: beta in (0,1]");
  if (z.size() != x_new.size()) throw ContractViolation("prox_step: dimension mismatch");
  return z + beta * (x_new - z);
}

namespace detail {

inline IterateState default_init(const Problem& problem, const SplmParams& params,
                                 std::optional<std::uint64_t> random_seed) {
  IterateState s;
  if (random_seed) {
    Rng rng(*random_seed);
    s.x.resize(problem.dim_n);
    for (int j = 0; j < problem.dim_n; ++j)
      s.x[j] = rng.uniform(problem.box.lower[j], problem.box.upper[j]);
  } else {
    s.x = problem.box.center();
  }
  s.z = s.x;
  s.y = Vec::Zero(problem.num_m);
  s.iter = 0;
  return s;
}

}  // namespace detail

/// Runs the single-loop iteration (primal projected-gradient step, clipped
/// dual ascent, proximal-center step, in that order) until the stationarity
/// gap measured at (x^{t+1}, y^t) drops to target_gap or the budget runs out.
///
/// Gradients are evaluated once per point: the pair needed to form the dual
/// certificate at iteration t is the same pair the next primal step consumes,
/// so the per-iteration oracle cost is exactly one objective gradient, one
/// constraint Jacobian, and one constraint evaluation.
inline std::pair<IterateState, SolveTrace> solve(
    const Problem& problem, const SplmParams& params,
    std::optional<IterateState> init = std::nullopt,
    std::optional<std::uint64_t> random_init_seed = std::nullopt) {
  params.validate();
  problem.validate_shape();

  IterateState s =
      init ? std::move(*init) : detail::default_init(problem, params, random_init_seed);
  if (s.x.size() != problem.dim_n || s.z.size() != problem.dim_n ||
      s.y.size() != problem.num_m)
    throw ContractViolation("solve: initial state dimension mismatch");
  if (!problem.box.contains(s.x) || !problem.box.contains(s.z))
    throw ContractViolation("solve: initial x and z must lie in the box");
  if ((s.y.array() < 0.0).any() || (s.y.array() > params.dual_bound).any())
    throw ContractViolation("solve: initial y must lie in [0, B]^m");

  SolveTrace trace;
  const auto t_start = std::chrono::steady_clock::now();
  auto elapsed_ms = [&t_start] {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                     t_start)
        .count();
  };

  const int m = problem.num_m;
  const bool has_h = m > 0;

  Vec grad_f, h_new, grad_f_new;
  Mat jac, jac_new;
  auto eval_first_order = [&](const Vec& at, Vec& g_out, Mat& j_out) -> bool {
    g_out = problem.gradient(at);
    ++trace.tally.grad_evals;
    if (!g_out.allFinite()) return false;
    if (has_h) {
      j_out = problem.jacobian(at);
      ++trace.tally.grad_evals;
      if (!j_out.allFinite()) return false;
    }
    return true;
  };

  if (!eval_first_order(s.x, grad_f, jac)) {
    trace.status = SolveStatus::OracleError;
    trace.wall_ms_total = elapsed_ms();
    return {std::move(s), std::move(trace)};
  }

  trace.status = SolveStatus::MaxIters;
  const Vec empty_h = Vec::Zero(0);

  for (long t = 0; t < params.max_iters; ++t) {
    // x^{t+1} = Pi_X(x^t - c (grad f + J^T y + p(x - z)))
    Vec step_dir = grad_f + params.p * (s.x - s.z);
    if (has_h) step_dir.noalias() += jac.transpose() * s.y;
    Vec x_new = project_box(s.x - params.c * step_dir, problem.box);
    if (!x_new.allFinite()) {
      trace.status = SolveStatus::OracleError;
      break;
    }

    // y^{t+1} = Pi_Y(y^t + alpha h(x^{t+1}))
    Vec y_new;
    if (has_h) {
      h_new = problem.constraints(x_new);
      ++trace.tally.h_evals;
      if (!h_new.allFinite()) {
        trace.status = SolveStatus::OracleError;
        break;
      }
      y_new = dual_step(s.y, h_new, params);
    } else {
      y_new = s.y;
    }

    // z^{t+1} = z^t + beta (x^{t+1} - z^t); clamp absorbs roundoff at the faces
    Vec z_new = project_box(prox_step(s.z, x_new, params.beta), problem.box);

    // First-order data at x^{t+1}: consumed by the certificate now and by the
    // next primal step afterwards.
    if (!eval_first_order(x_new, grad_f_new, jac_new)) {
      trace.status = SolveStatus::OracleError;
      break;
    }

    const bool measure = ((t + 1) % params.gap_stride == 0) || (t + 1 == params.max_iters);
    if (measure) {
      Vec xi = certificate_xi_from_parts(grad_f, grad_f_new, jac, jac_new, s.x, x_new, s.z,
                                         s.y, params.c, params.p);
      const Vec& h_at_new = has_h ? h_new : empty_h;
      const StationarityGap gap = StationarityGap::from_parts(
          xi.norm(), primal_infeasibility(h_at_new),
          has_h ? std::abs(s.y.dot(h_at_new)) : 0.0);
      trace.rows.push_back(TraceRow{t + 1, gap.dual_residual, gap.primal_infeas,
                                    gap.compl_slack, gap.gap, trace.tally.grad_evals,
                                    trace.tally.h_evals, elapsed_ms()});
      trace.final_gap = gap.gap;
      if (gap.gap <= params.target_gap) {
        s.x = std::move(x_new);
        s.y = std::move(y_new);
        s.z = std::move(z_new);
        s.iter = t + 1;
        trace.status = SolveStatus::Converged;
        trace.wall_ms_total = elapsed_ms();
        return {std::move(s), std::move(trace)};
      }
    }

    s.x = std::move(x_new);
    s.y = std::move(y_new);
    s.z = std::move(z_new);
    s.iter = t + 1;
    grad_f = std::move(grad_f_new);
    jac = std::move(jac_new);
  }

  trace.wall_ms_total = elapsed_ms();
  return {std::move(s), std::move(trace)};
}

namespace detail {
inline std::string csv_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}
}  // namespace detail

/// Trace export, one row per recorded iteration.
inline void write_trace_csv(const SolveTrace& trace, const std::string& path,
                            bool zero_time = false) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << "iter,dual_res,primal_infeas,compl_slack,gap,grad_evals,h_evals,wall_ms\n";
  for (const TraceRow& r : trace.rows) {
    out << r.iter << ',' << detail::csv_double(r.dual_res) << ','
        << detail::csv_double(r.primal_infeas) << ',' << detail::csv_double(r.compl_slack)
        << ',' << detail::csv_double(r.gap) << ',' << r.grad_evals << ',' << r.h_evals
        << ',' << detail::csv_double(zero_time ? 0.0 : r.wall_ms) << '\n';
  }
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace splm
