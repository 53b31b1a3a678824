#pragma once

#include "splm/box.hpp"
#include "splm/constants.hpp"
#include "splm/problem.hpp"
#include "splm/solver.hpp"
#include "splm/stationarity.hpp"
#include "splm/types.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <tuple>

namespace splm {

/// Classical safeguarded augmented-Lagrangian baseline with increasing
/// penalty: inner projected-gradient solves of the shifted-penalty function,
/// clipped multiplier updates, penalty growth when infeasibility stalls.
struct AlmParams {
  double rho0 = 0.01;            // initial penalty
  double sigma = 3.0;            // penalty growth factor
  double eps_inner0 = 1e-2;      // inner tolerance schedule eps_k = max(floor, eps0 decay^k)
  double eps_inner_decay = 0.5;
  double eps_inner_floor = 1e-8;
  double dual_bound = 1e4;       // B, multiplier clip
  long max_outer = 500;
  long max_inner = 200000;       // per outer iteration
  long max_total_inner = 2000000;
  double rho_max = 1e12;         // divergence guard
  double infeas_decrease = 0.5;  // grow rho unless ||max(h,0)|| fell by this factor
  double target_gap = 1e-5;
  double metric_step = 0.01;     // projected-gradient residual step (SPLM's c)
  int step_halvings = 40;

  void validate() const {
    if (!(rho0 > 0.0)) throw ContractViolation("alm: rho0 must be positive");
    if (!(sigma > 1.0)) throw ContractViolation("alm: sigma must exceed 1");
    if (!(eps_inner0 > 0.0) || !(eps_inner_decay > 0.0) || eps_inner_decay >= 1.0)
      throw ContractViolation("alm: inner tolerance schedule must decrease");
    if (!(dual_bound > 0.0)) throw ContractViolation("alm: dual bound must be positive");
  }
};

namespace detail {

struct AlValue {
  double value = 0.0;
  Vec h;  // h(x), empty when m = 0
};

// f(x) + (rho/2) || max(0, h(x) + y/rho) ||^2, metered via tally.
inline AlValue al_value(const Vec& x, const Vec& y, double rho, const Problem& problem,
                        OracleTally& tally) {
  AlValue out;
  out.value = problem.value(x);
  ++tally.obj_evals;
  if (problem.num_m > 0) {
    out.h = problem.constraints(x);
    ++tally.h_evals;
    out.value += 0.5 * rho * (out.h + y / rho).cwiseMax(0.0).squaredNorm();
  }
  return out;
}

}  // namespace detail

/// Runs the baseline until the stationarity gap (projected-gradient residual,
/// positive-part infeasibility, complementarity) reaches target_gap. Gap
/// measurements are metered separately from stepping oracle calls.
///
/// The inner step is a fixed 1/L estimate per outer round, L taken from the
/// local Jacobian rows at the round's start (the certified corner bounds are
/// far too pessimistic on large boxes); halving on non-descent keeps the
/// estimate safe.
inline std::tuple<Vec, Vec, SolveTrace> solve_alm(const Problem& problem,
                                                  const AlmParams& params,
                                                  const ProblemConstants& constants,
                                                  std::vector<double>* rho_log = nullptr) {
  params.validate();
  problem.validate_shape();
  const int m = problem.num_m;

  SolveTrace trace;
  const auto t_start = std::chrono::steady_clock::now();
  auto elapsed_ms = [&t_start] {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                     t_start)
        .count();
  };

  Vec x = problem.box.center();
  Vec y = Vec::Zero(m);
  double rho = params.rho0;
  double infeas_prev = std::numeric_limits<double>::infinity();
  long total_inner = 0;
  trace.status = SolveStatus::MaxIters;

  for (long outer = 0; outer < params.max_outer; ++outer) {
    if (rho_log) rho_log->push_back(rho);
    const double eps_k = std::max(params.eps_inner_floor,
                                  params.eps_inner0 *
                                      std::pow(params.eps_inner_decay,
                                               static_cast<double>(outer)));

    detail::AlValue cur = detail::al_value(x, y, rho, problem, trace.tally);

    double lip_local = constants.lip_grad_f;
    if (m > 0) {
      const Mat jac0 = problem.jacobian(x);
      ++trace.tally.grad_evals;
      const Vec mult0 = (y + rho * cur.h).cwiseMax(0.0);
      lip_local += rho * jac0.rowwise().squaredNorm().sum() +
                   mult0.norm() * constants.lip_grad_h;
    }
    double step = 1.0 / std::max(lip_local, 1e-12);

    bool inner_done = false;
    for (long it = 0; it < params.max_inner && total_inner < params.max_total_inner;
         ++it, ++total_inner) {
      Vec grad = problem.gradient(x);
      ++trace.tally.grad_evals;
      if (m > 0) {
        const Vec mult = (y + rho * cur.h).cwiseMax(0.0);
        grad.noalias() += problem.jacobian(x).transpose() * mult;
        ++trace.tally.grad_evals;
      }
      if (!grad.allFinite()) {
        trace.status = SolveStatus::OracleError;
        trace.wall_ms_total = elapsed_ms();
        return {std::move(x), std::move(y), std::move(trace)};
      }

      Vec x_cand = project_box(x - step * grad, problem.box);
      const double residual = (x - x_cand).norm() / step;
      if (residual <= eps_k) {
        inner_done = true;
        break;
      }

      detail::AlValue cand = detail::al_value(x_cand, y, rho, problem, trace.tally);
      int halvings = 0;
      while (cand.value > cur.value && halvings < params.step_halvings) {
        step *= 0.5;
        x_cand = project_box(x - step * grad, problem.box);
        cand = detail::al_value(x_cand, y, rho, problem, trace.tally);
        ++halvings;
      }
      x = std::move(x_cand);
      cur = std::move(cand);
    }

    // Multiplier update and penalty schedule.
    Vec h_x = m > 0 ? cur.h : Vec::Zero(0);
    if (m > 0) y = (y + rho * h_x).cwiseMax(0.0).cwiseMin(params.dual_bound);
    const double infeas = primal_infeasibility(h_x);

    // Stationarity at (x, y), measured with the shared metric.
    {
      Vec g = problem.gradient(x);
      ++trace.tally.metric_grad_evals;
      if (m > 0) {
        g.noalias() += problem.jacobian(x).transpose() * y;
        ++trace.tally.metric_grad_evals;
      }
      const double pg_res =
          (x - project_box(x - params.metric_step * g, problem.box)).norm() /
          params.metric_step;
      const double compl_p = m > 0 ? std::abs(y.dot(h_x)) : 0.0;
      const StationarityGap gap = StationarityGap::from_parts(pg_res, infeas, compl_p);
      trace.rows.push_back(TraceRow{total_inner, gap.dual_residual, gap.primal_infeas,
                                    gap.compl_slack, gap.gap, trace.tally.grad_evals,
                                    trace.tally.h_evals, elapsed_ms()});
      trace.final_gap = gap.gap;
      if (gap.gap <= params.target_gap) {
        trace.status = SolveStatus::Converged;
        break;
      }
    }

    if (total_inner >= params.max_total_inner) break;
    if (infeas > params.infeas_decrease * infeas_prev) {
      rho *= params.sigma;
      if (rho > params.rho_max) break;  // divergence guard
    }
    infeas_prev = std::max(infeas, 1e-300);
  }

  trace.wall_ms_total = elapsed_ms();
  return {std::move(x), std::move(y), std::move(trace)};
}

}  // namespace splm
