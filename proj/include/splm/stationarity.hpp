#pragma once

#include "splm/box.hpp"
#include "splm/problem.hpp"
#include "splm/types.hpp"

#include <algorithm>
#include <cmath>

namespace splm {

/// The three residuals of approximate stationarity: norm of the dual
/// certificate, norm of the positive part of h, and the absolute
/// complementarity product. gap is their maximum.
struct StationarityGap {
  double dual_residual = 0.0;
  double primal_infeas = 0.0;
  double compl_slack = 0.0;
  double gap = 0.0;

  static StationarityGap from_parts(double dual, double primal, double compl_p) {
    StationarityGap g;
    g.dual_residual = dual;
    g.primal_infeas = primal;
    g.compl_slack = compl_p;
    g.gap = std::max({dual, primal, compl_p});
    return g;
  }
};

/// || max(h, 0) ||.
inline double primal_infeasibility(const Vec& h_vals) {
  return h_vals.cwiseMax(0.0).norm();
}

/// | <y, h> | for y >= 0.
inline double complementarity(const Vec& y, const Vec& h_vals) {
  if (y.size() != h_vals.size())
    throw ContractViolation("complementarity: dimension mismatch");
  if ((y.array() < 0.0).any())
    throw ContractViolation("complementarity: multipliers must be nonnegative");
  return std::abs(y.dot(h_vals));
}

/// Normal-cone certificate of the projected primal step, assembled from
/// gradients already in hand. Valid only when x_new was produced from
/// (x_prev, z, y) by one projected step with the same (c, p):
///   xi = grad f(x_new) - grad f(x_prev) + (J(x_new) - J(x_prev))^T y
///        - p (x_prev - z) - (1/c)(x_new - x_prev),
/// and then xi lies in grad f(x_new) + J(x_new)^T y + N_X(x_new).
inline Vec certificate_xi_from_parts(const Vec& grad_f_prev, const Vec& grad_f_new,
                                     const Mat& jac_prev, const Mat& jac_new,
                                     const Vec& x_prev, const Vec& x_new, const Vec& z,
                                     const Vec& y, double c, double p) {
  if (x_prev.size() != x_new.size() || x_prev.size() != z.size())
    throw ContractViolation("certificate_xi: primal dimension mismatch");
  Vec xi = grad_f_new - grad_f_prev - p * (x_prev - z) - (1.0 / c) * (x_new - x_prev);
  if (y.size() > 0) xi.noalias() += (jac_new - jac_prev).transpose() * y;
  return xi;
}

struct SplmParams;  // solver.hpp

/// Oracle-calling form; costs one gradient and one Jacobian at each of the
/// two points.
inline Vec certificate_xi(const Vec& x_prev, const Vec& x_new, const Vec& z, const Vec& y,
                          double c, double p, const Problem& problem) {
  Vec gf_prev = problem.gradient(x_prev);
  Vec gf_new = problem.gradient(x_new);
  Mat j_prev, j_new;
  if (problem.num_m > 0) {
    j_prev = problem.jacobian(x_prev);
    j_new = problem.jacobian(x_new);
  }
  return certificate_xi_from_parts(gf_prev, gf_new, j_prev, j_new, x_prev, x_new, z, y, c,
                                   p);
}

/// Trajectory-independent dual-feasibility measure usable at any point:
///   || x - Pi_X(x - step (grad f(x) + J(x)^T y)) || / step.
/// Zero exactly at box-constrained first-order points of the Lagrangian.
inline double projected_gradient_residual(const Vec& x, const Vec& y,
                                          const Problem& problem, double step) {
  if (!(step > 0.0))
    throw ContractViolation("projected_gradient_residual: step must be positive");
  Vec g = problem.gradient(x);
  if (problem.num_m > 0) g.noalias() += problem.jacobian(x).transpose() * y;
  return (x - project_box(x - step * g, problem.box)).norm() / step;
}

}  // namespace splm
