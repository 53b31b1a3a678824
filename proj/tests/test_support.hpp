#pragma once

#include "splm/problem.hpp"
#include "splm/rng.hpp"
#include "splm/types.hpp"

#include <functional>
#include <vector>

namespace splm::testing {

/// f = x^2/2, h = x - 1 over [-10, 10]; the evaluation example problem.
inline Problem quadratic_toy() {
  Problem p;
  p.dim_n = 1;
  p.num_m = 1;
  p.box = BoxSet::cube(1, -10.0, 10.0);
  p.value = [](const Vec& x) { return 0.5 * x[0] * x[0]; };
  p.gradient = [](const Vec& x) { return Vec::Constant(1, x[0]); };
  p.constraints = [](const Vec& x) { return Vec::Constant(1, x[0] - 1.0); };
  p.jacobian = [](const Vec&) { return Mat::Constant(1, 1, 1.0); };
  return p;
}

/// min x^2/2 s.t. 1 - x <= 0 over [-10, 10]; KKT point x* = 1, y* = 1.
inline Problem convex_toy() {
  Problem p;
  p.dim_n = 1;
  p.num_m = 1;
  p.box = BoxSet::cube(1, -10.0, 10.0);
  p.value = [](const Vec& x) { return 0.5 * x[0] * x[0]; };
  p.gradient = [](const Vec& x) { return Vec::Constant(1, x[0]); };
  p.constraints = [](const Vec& x) { return Vec::Constant(1, 1.0 - x[0]); };
  p.jacobian = [](const Vec&) { return Mat::Constant(1, 1, -1.0); };
  return p;
}

/// x^2/2 with no constraints.
inline Problem unconstrained_quadratic(int n = 1) {
  Problem p;
  p.dim_n = n;
  p.num_m = 0;
  p.box = BoxSet::cube(n, -10.0, 10.0);
  p.value = [](const Vec& x) { return 0.5 * x.squaredNorm(); };
  p.gradient = [](const Vec& x) { return Vec(x); };
  p.constraints = [](const Vec&) { return Vec::Zero(0); };
  p.jacobian = [n](const Vec&) { return Mat::Zero(0, n); };
  return p;
}

struct ProbeLog {
  long obj = 0, grad = 0, h = 0, jac = 0;
  std::vector<Vec> h_args, grad_args, jac_args;
};

/// Wraps a problem so every oracle call is counted and its argument recorded.
inline Problem with_probes(const Problem& base, ProbeLog& log) {
  Problem p = base;
  p.value = [&log, f = base.value](const Vec& x) {
    ++log.obj;
    return f(x);
  };
  p.gradient = [&log, f = base.gradient](const Vec& x) {
    ++log.grad;
    log.grad_args.push_back(x);
    return f(x);
  };
  p.constraints = [&log, f = base.constraints](const Vec& x) {
    ++log.h;
    log.h_args.push_back(x);
    return f(x);
  };
  p.jacobian = [&log, f = base.jacobian](const Vec& x) {
    ++log.jac;
    log.jac_args.push_back(x);
    return f(x);
  };
  return p;
}

/// Central finite differences of a scalar function.
inline Vec central_diff(const std::function<double(const Vec&)>& f, const Vec& x,
                        double eps = 1e-6) {
  Vec g(x.size());
  for (int j = 0; j < x.size(); ++j) {
    Vec hi = x, lo = x;
    hi[j] += eps;
    lo[j] -= eps;
    g[j] = (f(hi) - f(lo)) / (2.0 * eps);
  }
  return g;
}

inline Vec random_point(const BoxSet& box, Rng& rng) {
  Vec x(box.dim());
  for (int j = 0; j < box.dim(); ++j) x[j] = rng.uniform(box.lower[j], box.upper[j]);
  return x;
}

}  // namespace splm::testing
