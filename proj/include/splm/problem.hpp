#pragma once

#include "splm/box.hpp"
#include "splm/types.hpp"

#include <functional>
#include <memory>
#include <utility>

namespace splm {

struct QpInstance;  // qp.hpp

/// Oracle-based problem: minimize f(x) subject to h(x) <= 0 over a box.
/// The four oracles are metered separately so value calls and first-order
/// calls can be counted independently; f's value is never required by the
/// smoothed proximal Lagrangian iteration itself.
///
/// Oracles must be pure functions of x and finite on the box. Instances are
/// immutable after construction and safe to share across concurrent solves.
struct Problem {
  int dim_n = 0;
  int num_m = 0;
  std::function<double(const Vec&)> value;       // f(x)
  std::function<Vec(const Vec&)> gradient;       // grad f(x), n-vector
  std::function<Vec(const Vec&)> constraints;    // h(x), m-vector
  std::function<Mat(const Vec&)> jacobian;       // dh/dx, m x n
  BoxSet box;
  // Present when the problem was built from concrete QP data; enables
  // certified constant estimation.
  std::shared_ptr<const QpInstance> qp;

  void validate_shape() const {
    if (dim_n <= 0) throw ContractViolation("problem dimension must be positive");
    if (num_m < 0) throw ContractViolation("constraint count must be nonnegative");
    if (box.dim() != dim_n) throw ContractViolation("box dimension mismatch");
    if (!gradient || !value) throw ContractViolation("objective oracle missing");
    if (num_m > 0 && (!constraints || !jacobian))
      throw ContractViolation("constraint oracle missing");
  }
};

/// Per-solve oracle call counts. Gradient-type calls (grad f and the
/// constraint Jacobian) accumulate in grad_evals; value-type calls are kept
/// apart so that a solver's claim of never reading f(x) is checkable.
struct OracleTally {
  long obj_evals = 0;      // f value calls
  long grad_evals = 0;     // grad f calls + Jacobian calls
  long h_evals = 0;        // h value calls
  // Calls spent measuring stationarity of a point rather than stepping;
  // excluded from the reported stepping cost.
  long metric_grad_evals = 0;
  long metric_h_evals = 0;
  long metric_obj_evals = 0;
};

namespace detail {
inline void require_finite(const Vec& v, const char* what) {
  if (!v.allFinite()) throw OracleError(std::string(what) + " returned a non-finite value");
}
inline void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw OracleError(std::string(what) + " returned a non-finite value");
}
inline void require_finite(const Mat& v, const char* what) {
  if (!v.allFinite()) throw OracleError(std::string(what) + " returned a non-finite value");
}
}  // namespace detail

/// Proximal Lagrangian K(x,z;y) = f(x) + <y,h(x)> + (p/2)||x-z||^2.
inline double eval_lagrangian(const Vec& x, const Vec& z, const Vec& y, double p,
                              const Problem& problem) {
  if (x.size() != problem.dim_n || z.size() != problem.dim_n)
    throw ContractViolation("eval_lagrangian: primal dimension mismatch");
  if (y.size() != problem.num_m)
    throw ContractViolation("eval_lagrangian: multiplier dimension mismatch");
  if ((y.array() < 0.0).any())
    throw ContractViolation("eval_lagrangian: multipliers must be nonnegative");
  if (!(p > 0.0)) throw ContractViolation("eval_lagrangian: p must be positive");
  double val = problem.value(x);
  detail::require_finite(val, "objective");
  if (problem.num_m > 0) {
    Vec h = problem.constraints(x);
    detail::require_finite(h, "constraints");
    val += y.dot(h);
  }
  return val + 0.5 * p * (x - z).squaredNorm();
}

/// grad_x K(x,z;y) = grad f(x) + dh(x)^T y + p (x - z).
inline Vec eval_lagrangian_grad_x(const Vec& x, const Vec& z, const Vec& y, double p,
                                  const Problem& problem) {
  if (x.size() != problem.dim_n || z.size() != problem.dim_n)
    throw ContractViolation("eval_lagrangian_grad_x: primal dimension mismatch");
  if (y.size() != problem.num_m)
    throw ContractViolation("eval_lagrangian_grad_x: multiplier dimension mismatch");
  if ((y.array() < 0.0).any())
    throw ContractViolation("eval_lagrangian_grad_x: multipliers must be nonnegative");
  if (!(p > 0.0)) throw ContractViolation("eval_lagrangian_grad_x: p must be positive");
  Vec g = problem.gradient(x);
  detail::require_finite(g, "objective gradient");
  g += p * (x - z);
  if (problem.num_m > 0) {
    Mat jac = problem.jacobian(x);
    detail::require_finite(jac, "constraint Jacobian");
    g.noalias() += jac.transpose() * y;
  }
  return g;
}

}  // namespace splm
