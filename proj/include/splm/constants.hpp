#pragma once

#include "splm/problem.hpp"
#include "splm/qp.hpp"
#include "splm/rng.hpp"
#include "splm/types.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cstdint>

namespace splm {

/// Smoothness and boundedness constants of a problem over its box:
/// Lipschitz moduli of the gradients, gradient/value sup-norms, box diameter,
/// and a lower bound on f. Certified entries are upper bounds valid on the
/// whole box; sampled entries are empirical maxima and may undershoot.
struct ProblemConstants {
  double lip_grad_f = 0.0;     // L_f
  double lip_grad_h = 0.0;     // L_h = sqrt(sum L_{h_i}^2)
  double lip_h = 0.0;          // K_h = sqrt(sum K_{h_i}^2)
  double sup_grad_f = 0.0;     // max ||grad f|| over the box
  double diameter = 0.0;       // ||upper - lower||
  double sup_h_norm = 0.0;     // max ||h|| over the box
  double f_lower = 0.0;        // lower bound on f over the box
  Vec per_constraint_lip;      // K_{h_i}
  Vec per_constraint_lip_grad; // L_{h_i}
  bool certified = false;      // true for analytic-QP bounds
  bool f_lower_certified = false;  // f_lower is always sample-based, kept heuristic
  std::uint64_t sample_seed = 0;
  int sample_count = 0;
};

enum class ConstantsMode { AnalyticQp, Sampled };

namespace detail {

// Largest ||x|| over the box, attained at the corner of largest magnitude.
inline double box_max_norm(const BoxSet& box) {
  double s = 0.0;
  for (int j = 0; j < box.dim(); ++j) {
    const double a = std::max(std::abs(box.lower[j]), std::abs(box.upper[j]));
    s += a * a;
  }
  return std::sqrt(s);
}

inline Vec sample_box(const BoxSet& box, Rng& rng) {
  Vec x(box.dim());
  for (int j = 0; j < box.dim(); ++j) x[j] = rng.uniform(box.lower[j], box.upper[j]);
  return x;
}

}  // namespace detail

/// Analytic-QP mode returns certified upper bounds from the instance data
/// (spectral norms and corner box magnitudes); f_lower alone is heuristic,
/// derived from sampled values minus the certified gradient sweep. Sampled
/// mode estimates everything from pairwise difference quotients at uniform
/// box samples and is flagged non-certified.
inline ProblemConstants estimate_constants(const Problem& problem, ConstantsMode mode,
                                           int sample_count, std::uint64_t rng_seed) {
  problem.validate_shape();
  ProblemConstants k;
  k.diameter = problem.box.diameter();
  k.sample_seed = rng_seed;
  k.sample_count = sample_count;
  Rng rng(rng_seed);

  if (mode == ConstantsMode::AnalyticQp) {
    if (!problem.qp)
      throw UnsupportedStructure("estimate_constants: analytic mode needs QP data");
    if (sample_count < 1)
      throw ContractViolation("estimate_constants: need at least one sample for f_lower");
    const QpInstance& qp = *problem.qp;
    const int m = qp.m();
    const double radius = detail::box_max_norm(qp.box);

    Eigen::SelfAdjointEigenSolver<Mat> es(qp.Q, Eigen::EigenvaluesOnly);
    const double q_norm = es.eigenvalues().cwiseAbs().maxCoeff();
    k.lip_grad_f = q_norm;
    k.sup_grad_f = q_norm * radius + qp.r.norm();

    k.per_constraint_lip.resize(m);
    k.per_constraint_lip_grad.resize(m);
    double sup_h_sq = 0.0;
    for (int i = 0; i < m; ++i) {
      Eigen::SelfAdjointEigenSolver<Mat> esa(qp.A[static_cast<size_t>(i)],
                                             Eigen::EigenvaluesOnly);
      const double a_norm = esa.eigenvalues().cwiseAbs().maxCoeff();
      const double b_norm = qp.b[static_cast<size_t>(i)].norm();
      k.per_constraint_lip_grad[i] = a_norm;
      k.per_constraint_lip[i] = a_norm * radius + b_norm;
      const double hi_abs = 0.5 * a_norm * radius * radius + b_norm * radius +
                            std::abs(qp.c[i]);
      sup_h_sq += hi_abs * hi_abs;
    }
    k.lip_grad_h = std::sqrt(k.per_constraint_lip_grad.squaredNorm());
    k.lip_h = std::sqrt(k.per_constraint_lip.squaredNorm());
    k.sup_h_norm = std::sqrt(sup_h_sq);
    k.certified = true;

    double best = std::numeric_limits<double>::infinity();
    for (int s = 0; s < sample_count; ++s) {
      const double v = problem.value(detail::sample_box(problem.box, rng));
      detail::require_finite(v, "objective");
      best = std::min(best, v);
    }
    k.f_lower = best - k.sup_grad_f * k.diameter;
    k.f_lower_certified = false;
    return k;
  }

  if (sample_count < 100)
    throw ContractViolation("estimate_constants: sampled mode needs sample_count >= 100");

  const int m = problem.num_m;
  std::vector<Vec> xs(static_cast<size_t>(sample_count));
  std::vector<Vec> grads(static_cast<size_t>(sample_count));
  std::vector<Mat> jacs;
  if (m > 0) jacs.resize(static_cast<size_t>(sample_count));
  double best_f = std::numeric_limits<double>::infinity();
  for (int s = 0; s < sample_count; ++s) {
    xs[static_cast<size_t>(s)] = detail::sample_box(problem.box, rng);
    const Vec& x = xs[static_cast<size_t>(s)];
    grads[static_cast<size_t>(s)] = problem.gradient(x);
    detail::require_finite(grads[static_cast<size_t>(s)], "objective gradient");
    best_f = std::min(best_f, problem.value(x));
    k.sup_grad_f = std::max(k.sup_grad_f, grads[static_cast<size_t>(s)].norm());
    if (m > 0) {
      jacs[static_cast<size_t>(s)] = problem.jacobian(x);
      detail::require_finite(jacs[static_cast<size_t>(s)], "constraint Jacobian");
      const Vec h = problem.constraints(x);
      detail::require_finite(h, "constraints");
      k.sup_h_norm = std::max(k.sup_h_norm, h.norm());
    }
  }
  k.per_constraint_lip = Vec::Zero(m);
  k.per_constraint_lip_grad = Vec::Zero(m);
  for (int s = 0; s < sample_count; ++s)
    for (int i = 0; i < m; ++i)
      k.per_constraint_lip[i] = std::max(
          k.per_constraint_lip[i], jacs[static_cast<size_t>(s)].row(i).norm());
  for (int a = 0; a < sample_count; ++a) {
    for (int b2 = a + 1; b2 < sample_count; ++b2) {
      const double dist = (xs[static_cast<size_t>(a)] - xs[static_cast<size_t>(b2)]).norm();
      if (dist < 1e-12) continue;
      k.lip_grad_f = std::max(
          k.lip_grad_f,
          (grads[static_cast<size_t>(a)] - grads[static_cast<size_t>(b2)]).norm() / dist);
      for (int i = 0; i < m; ++i)
        k.per_constraint_lip_grad[i] =
            std::max(k.per_constraint_lip_grad[i],
                     (jacs[static_cast<size_t>(a)].row(i) - jacs[static_cast<size_t>(b2)].row(i))
                             .norm() /
                         dist);
    }
  }
  k.lip_h = std::sqrt(k.per_constraint_lip.squaredNorm());
  k.lip_grad_h = std::sqrt(k.per_constraint_lip_grad.squaredNorm());
  k.f_lower = best_f - k.sup_grad_f * k.diameter;
  k.certified = false;
  k.f_lower_certified = false;
  return k;
}

}  // namespace splm
