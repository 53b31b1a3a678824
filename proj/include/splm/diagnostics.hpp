#pragma once

#include "splm/constants.hpp"
#include "splm/param_rules.hpp"
#include "splm/problem.hpp"
#include "splm/qp.hpp"
#include "splm/rng.hpp"
#include "splm/solver.hpp"
#include "splm/types.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>

namespace splm {

/// Controls for the inner projected-gradient solves that realize the argmin
/// and argmax oracles the analysis treats as exact.
struct InnerSolveConfig {
  double tol = 1e-10;          // projected-gradient residual threshold
  long max_inner_iters = 500000;
  double step = 0.0;           // <= 0 selects 1/(L_f + L_h(Y) + p)
  double dual_cap = 1e3;       // effective bound on Y in the P(z) ascent
  double dual_tol = 0.0;       // <= 0 selects 10 * tol

  double effective_step(const ProblemConstants& k, const SplmParams& params,
                        int m) const {
    if (step > 0.0) return step;
    const double lip_hY =
        std::sqrt(static_cast<double>(m)) * k.lip_grad_h * params.dual_bound;
    return 1.0 / (k.lip_grad_f + lip_hY + params.p);
  }
  double effective_dual_tol() const { return dual_tol > 0.0 ? dual_tol : 10.0 * tol; }
};

/// x(y,z) = argmin over the box of K(x,z;y), by projected gradient on the
/// mu_K-strongly convex subproblem. Requires p > L_f. The achieved
/// projected-gradient residual is written to *achieved when given.
inline Vec solve_inner_x(const Vec& y, const Vec& z, const SplmParams& params,
                         const Problem& problem, const ProblemConstants& constants,
                         const InnerSolveConfig& cfg,
                         std::optional<Vec> warm_start = std::nullopt,
                         double* achieved = nullptr) {
  if (!(params.p > constants.lip_grad_f))
    throw ContractViolation("solve_inner_x: need p > L_f for strong convexity");
  if ((y.array() < 0.0).any())
    throw ContractViolation("solve_inner_x: multipliers must be nonnegative");
  const double s = cfg.effective_step(constants, params, problem.num_m);
  Vec x = warm_start ? project_box(*warm_start, problem.box) : project_box(z, problem.box);
  double res = std::numeric_limits<double>::infinity();
  for (long it = 0; it < cfg.max_inner_iters; ++it) {
    Vec g = problem.gradient(x) + params.p * (x - z);
    if (problem.num_m > 0) g.noalias() += problem.jacobian(x).transpose() * y;
    Vec x_next = project_box(x - s * g, problem.box);
    res = (x - x_next).norm() / s;
    x = std::move(x_next);
    if (res <= cfg.tol) {
      if (achieved) *achieved = res;
      return x;
    }
  }
  throw AccuracyNotReached("solve_inner_x: inner budget exhausted", res);
}

/// d(y,z) = min over the box of K(x,z;y), evaluated at the inner minimizer.
inline double dual_function(const Vec& y, const Vec& z, const SplmParams& params,
                            const Problem& problem, const ProblemConstants& constants,
                            const InnerSolveConfig& cfg,
                            std::optional<Vec> warm_start = std::nullopt,
                            double* achieved = nullptr) {
  const Vec x = solve_inner_x(y, z, params, problem, constants, cfg, std::move(warm_start),
                              achieved);
  return eval_lagrangian(x, z, y, params.p, problem);
}

struct ProxValueResult {
  double value = 0.0;     // P(z)
  Vec y_max;              // maximizing multiplier
  Vec x_at_max;           // x(y_max, z)
  double dual_residual = 0.0;
  double inner_residual = 0.0;  // achieved x-solve residual at the maximizer
  bool cap_binding = false;     // the diagnostic cap truncated the maximizer
};

/// P(z) = max over Y of d(y,z), by projected gradient ascent on the concave
/// dual using grad_y d = h(x(y,z)) and ascent step 1/(K_h kappa2). The
/// ascent works over [0, min(B, dual_cap)]^m; cap_binding reports whether the
/// cap was active at the returned maximizer.
inline ProxValueResult prox_value_P(const Vec& z, const SplmParams& params,
                                    const Problem& problem,
                                    const ProblemConstants& constants,
                                    const InnerSolveConfig& cfg) {
  ProxValueResult out;
  const int m = problem.num_m;
  if (m > 4)
    throw ContractViolation("prox_value_P: diagnostic ascent is limited to m <= 4");
  if (m == 0) {
    out.y_max = Vec::Zero(0);
    out.x_at_max = solve_inner_x(out.y_max, z, params, problem, constants, cfg,
                                 std::nullopt, &out.inner_residual);
    out.value = eval_lagrangian(out.x_at_max, z, out.y_max, params.p, problem);
    return out;
  }
  const double mu_K = params.p - constants.lip_grad_f;
  const double kappa2 = constants.lip_h / mu_K;
  const double lip_dual = constants.lip_h * kappa2;
  const double s_y = lip_dual > 0.0 ? 1.0 / lip_dual : 1.0;
  const double y_cap = std::min(params.dual_bound, cfg.dual_cap);
  const double tol_y = cfg.effective_dual_tol();

  Vec y = Vec::Zero(m);
  Vec x = solve_inner_x(y, z, params, problem, constants, cfg);
  double res = std::numeric_limits<double>::infinity();
  for (long it = 0; it < cfg.max_inner_iters; ++it) {
    const Vec grad_y = problem.constraints(x);  // Danskin: grad_y d(y,z) = h(x(y,z))
    Vec y_next = (y + s_y * grad_y).cwiseMax(0.0).cwiseMin(y_cap);
    res = (y - y_next).norm() / s_y;
    y = std::move(y_next);
    x = solve_inner_x(y, z, params, problem, constants, cfg, x, &out.inner_residual);
    if (res <= tol_y) {
      out.value = eval_lagrangian(x, z, y, params.p, problem);
      out.y_max = std::move(y);
      out.x_at_max = std::move(x);
      out.dual_residual = res;
      out.cap_binding = (out.y_max.array() >= y_cap - 10.0 * tol_y * s_y).any() &&
                        y_cap < params.dual_bound;
      return out;
    }
  }
  throw AccuracyNotReached("prox_value_P: ascent budget exhausted", res);
}

/// One evaluation of the potential Phi = K(x,z;y) - 2 d(y,z) + 2 P(z).
struct PotentialRecord {
  long t = 0;
  double K_val = 0.0;
  double d_val = 0.0;
  double P_val = 0.0;
  double phi = 0.0;
  double inner_res_d = 0.0;  // achieved residual of the d(y,z) solve
  double inner_res_P = 0.0;  // achieved residual of the P(z) solve
  bool cap_binding = false;
};

inline PotentialRecord potential(const Vec& x, const Vec& z, const Vec& y,
                                 const SplmParams& params, const Problem& problem,
                                 const ProblemConstants& constants,
                                 const InnerSolveConfig& cfg, long t = 0) {
  PotentialRecord rec;
  rec.t = t;
  rec.K_val = eval_lagrangian(x, z, y, params.p, problem);
  rec.d_val = dual_function(y, z, params, problem, constants, cfg, std::nullopt,
                            &rec.inner_res_d);
  ProxValueResult pv = prox_value_P(z, params, problem, constants, cfg);
  rec.P_val = pv.value;
  rec.inner_res_P = pv.inner_residual;
  rec.cap_binding = pv.cap_binding;
  rec.phi = rec.K_val - 2.0 * rec.d_val + 2.0 * rec.P_val;
  return rec;
}

/// Worst-case statistics for one Lipschitz-type bound over random probes.
struct EbProbeStats {
  double worst_ratio = 0.0;        // lhs/rhs over probes with meaningful rhs
  double worst_adjusted = 0.0;     // lhs/(rhs + allowance), must stay < 1
  long checked = 0;
  long violations = 0;             // lhs > rhs + allowance

  void add(double lhs, double rhs, double allowance) {
    ++checked;
    if (rhs > 100.0 * allowance && rhs > 0.0)
      worst_ratio = std::max(worst_ratio, lhs / rhs);
    worst_adjusted = std::max(worst_adjusted, lhs / (rhs + allowance));
    if (lhs > rhs + allowance) ++violations;
  }
};

struct EbReport {
  EbProbeStats eb1;  // ||x(y,z)-x(y,z')||  <= kappa1 ||z-z'||
  EbProbeStats eb2;  // ||x(y,z)-x(y',z)||  <= kappa2 ||y-y'||
  EbProbeStats eb3;  // ||x'-x(y,z)||       <= kappa3 ||x-x'||
  EbProbeStats eb4;  // ||y'-y_plus(z)||    <= alpha K_h kappa3 ||x-x'||
  double allowance = 0.0;
  long trials = 0;

  bool pass() const {
    return eb1.violations + eb2.violations + eb3.violations + eb4.violations == 0;
  }

  std::string to_text() const {
    std::ostringstream os;
    auto line = [&os](const char* name, const char* formula, const EbProbeStats& s) {
      os << name << "  " << formula << "\n   worst ratio " << s.worst_ratio
         << ", worst slack-adjusted " << s.worst_adjusted << ", probes " << s.checked
         << ", violations " << s.violations << "  ["
         << (s.violations == 0 ? "pass" : "FAIL") << "]\n";
    };
    os << "error-bound probes (" << trials << " trials, inner allowance " << allowance
       << ")\n";
    line("eb1", "||x(y,z)-x(y,z')|| <= kappa1 ||z-z'||", eb1);
    line("eb2", "||x(y,z)-x(y',z)|| <= kappa2 ||y-y'||", eb2);
    line("eb3", "||x+ - x(y,z)|| <= kappa3 ||x - x+||", eb3);
    line("eb4", "||y+ - y_plus(z)|| <= alpha K_h kappa3 ||x - x+||", eb4);
    return os.str();
  }
};

/// Randomized check of the four subproblem error bounds with certified
/// constants. Violations are report entries, not exceptions.
inline EbReport check_error_bounds(const Problem& problem, const SplmParams& params,
                                   const ProblemConstants& constants,
                                   const InnerSolveConfig& cfg, int trials,
                                   std::uint64_t rng_seed) {
  const KappaConstants kap = KappaConstants::from(constants, params.p, params.c,
                                                  params.dual_bound, problem.num_m);
  EbReport report;
  report.trials = trials;
  const double pos_err = 2.0 * cfg.tol / kap.mu_K;  // per inner solve
  report.allowance = 2.0 * pos_err;
  Rng rng(rng_seed);
  const double y_cap = std::min(params.dual_bound, cfg.dual_cap);

  for (int trial = 0; trial < trials; ++trial) {
    Vec z = detail::sample_box(problem.box, rng);
    Vec z2 = detail::sample_box(problem.box, rng);
    Vec y(problem.num_m), y2(problem.num_m);
    for (int i = 0; i < problem.num_m; ++i) {
      y[i] = rng.uniform(0.0, y_cap);
      y2[i] = rng.uniform(0.0, y_cap);
    }
    const Vec x_yz = solve_inner_x(y, z, params, problem, constants, cfg);
    const Vec x_yz2 = solve_inner_x(y, z2, params, problem, constants, cfg);
    const Vec x_y2z = solve_inner_x(y2, z, params, problem, constants, cfg);

    report.eb1.add((x_yz - x_yz2).norm(), kap.kappa1 * (z - z2).norm(), 2.0 * pos_err);
    report.eb2.add((x_yz - x_y2z).norm(), kap.kappa2 * (y - y2).norm(), 2.0 * pos_err);

    // One genuine iteration from the random state (x, z, y).
    IterateState state;
    state.x = detail::sample_box(problem.box, rng);
    state.z = z;
    state.y = y;
    const Vec x_new = primal_step(state, params, problem);
    const double dx = (state.x - x_new).norm();
    report.eb3.add((x_new - x_yz).norm(), kap.kappa3 * dx, pos_err);

    const Vec h_new = problem.constraints(x_new);
    const Vec y_new = dual_step(y, h_new, params);
    const Vec y_plus =
        (y + params.alpha * problem.constraints(x_yz)).cwiseMax(0.0).cwiseMin(
            params.dual_bound);
    report.eb4.add((y_new - y_plus).norm(),
                   params.alpha * constants.lip_h * kap.kappa3 * dx,
                   params.alpha * constants.lip_h * pos_err);
  }
  return report;
}

/// Per-step record of a monitored run: potential descent (monotonicity and
/// the quadratic lower bound on the decrease) plus the floor Phi >= f_lower.
struct PhiDescentReport {
  long steps = 0;
  long monotonicity_violations = 0;
  long lower_bound_violations = 0;
  long floor_violations = 0;
  double worst_increase = -std::numeric_limits<double>::infinity();
  double min_floor_margin = std::numeric_limits<double>::infinity();
  double slack = 0.0;
  bool cap_binding_any = false;

  bool pass() const {
    return monotonicity_violations == 0 && lower_bound_violations == 0 &&
           floor_violations == 0 && !cap_binding_any;
  }

  std::string to_text() const {
    std::ostringstream os;
    os << "potential descent over " << steps << " steps (slack " << slack << ")\n"
       << "   monotonicity violations " << monotonicity_violations
       << ", worst increase " << worst_increase << "\n"
       << "   decrease lower-bound violations " << lower_bound_violations << "\n"
       << "   floor violations " << floor_violations << ", min margin over f_lower "
       << min_floor_margin << "\n"
       << "   dual cap binding: " << (cap_binding_any ? "yes" : "no") << "  ["
       << (pass() ? "pass" : "FAIL") << "]\n";
    return os.str();
  }
};

/// Runs the iteration for `iters` steps evaluating Phi every step, and checks
/// Phi^{t+1} <= Phi^t + slack,
/// Phi^t - Phi^{t+1} >= (1/16c)||dx||^2 + (1/16a)||y - y_plus||^2
///                      + (p/16b)||dz||^2 - slack,
/// Phi^t >= f_lower - slack, with slack = 10 * inner tolerance.
inline PhiDescentReport check_phi_descent(const Problem& problem, const SplmParams& params,
                                          const ProblemConstants& constants,
                                          const InnerSolveConfig& cfg, long iters) {
  PhiDescentReport rep;
  rep.slack = 10.0 * cfg.tol;
  rep.steps = iters;

  IterateState s;
  s.x = problem.box.center();
  s.z = s.x;
  s.y = Vec::Zero(problem.num_m);

  PotentialRecord prev = potential(s.x, s.z, s.y, params, problem, constants, cfg, 0);
  rep.cap_binding_any |= prev.cap_binding;
  rep.min_floor_margin = std::min(rep.min_floor_margin, prev.phi - constants.f_lower);
  if (prev.phi < constants.f_lower - rep.slack) ++rep.floor_violations;

  Vec warm_x = s.x;
  for (long t = 0; t < iters; ++t) {
    const Vec x_new = primal_step(s, params, problem);
    Vec y_new = s.y;
    if (problem.num_m > 0) y_new = dual_step(s.y, problem.constraints(x_new), params);
    const Vec z_new = project_box(prox_step(s.z, x_new, params.beta), problem.box);

    // y_plus(z) needs the exact inner minimizer x(y,z)
    warm_x = solve_inner_x(s.y, s.z, params, problem, constants, cfg, warm_x);
    Vec y_plus = s.y;
    if (problem.num_m > 0)
      y_plus = (s.y + params.alpha * problem.constraints(warm_x))
                   .cwiseMax(0.0)
                   .cwiseMin(params.dual_bound);

    const double bound = (s.x - x_new).squaredNorm() / (16.0 * params.c) +
                         (s.y - y_plus).squaredNorm() / (16.0 * params.alpha) +
                         params.p * (s.z - z_new).squaredNorm() / (16.0 * params.beta);

    s.x = x_new;
    s.y = y_new;
    s.z = z_new;
    s.iter = t + 1;

    const PotentialRecord cur =
        potential(s.x, s.z, s.y, params, problem, constants, cfg, t + 1);
    rep.cap_binding_any |= cur.cap_binding;
    const double increase = cur.phi - prev.phi;
    rep.worst_increase = std::max(rep.worst_increase, increase);
    if (increase > rep.slack) ++rep.monotonicity_violations;
    if (prev.phi - cur.phi < bound - rep.slack) ++rep.lower_bound_violations;
    rep.min_floor_margin = std::min(rep.min_floor_margin, cur.phi - constants.f_lower);
    if (cur.phi < constants.f_lower - rep.slack) ++rep.floor_violations;
    prev = cur;
  }
  return rep;
}

/// Along a run, the dual certificate obeys
///   ||xi^t|| <= lambda1 max{||x^t - x^{t+1}||, ||z^t - z^{t+1}||},
///   lambda1 = L_f + sqrt(m) B L_h + 1/c + p + p/beta,
/// with certified constants. Checked at every iteration.
struct CertificateBoundReport {
  long steps = 0;
  long violations = 0;
  double worst_ratio = 0.0;
  double lambda1 = 0.0;

  std::string to_text() const {
    std::ostringstream os;
    os << "certificate bound ||xi|| <= lambda1 * max(||dx||,||dz||), lambda1 = "
       << lambda1 << "\n   steps " << steps << ", worst ratio " << worst_ratio
       << ", violations " << violations << "  ["
       << (violations == 0 ? "pass" : "FAIL") << "]\n";
    return os.str();
  }
};

inline CertificateBoundReport check_certificate_bound(const Problem& problem,
                                                      const SplmParams& params,
                                                      const ProblemConstants& constants,
                                                      long iters) {
  CertificateBoundReport rep;
  rep.steps = iters;
  const double root_m = std::sqrt(static_cast<double>(problem.num_m));
  rep.lambda1 = constants.lip_grad_f + root_m * params.dual_bound * constants.lip_grad_h +
                1.0 / params.c + params.p + params.p / params.beta;

  IterateState s;
  s.x = problem.box.center();
  s.z = s.x;
  s.y = Vec::Zero(problem.num_m);
  Vec grad_f = problem.gradient(s.x);
  Mat jac = problem.num_m > 0 ? problem.jacobian(s.x) : Mat();

  for (long t = 0; t < iters; ++t) {
    Vec dir = grad_f + params.p * (s.x - s.z);
    if (problem.num_m > 0) dir.noalias() += jac.transpose() * s.y;
    const Vec x_new = project_box(s.x - params.c * dir, problem.box);
    Vec y_new = s.y;
    if (problem.num_m > 0) y_new = dual_step(s.y, problem.constraints(x_new), params);
    const Vec z_new = project_box(prox_step(s.z, x_new, params.beta), problem.box);

    const Vec grad_f_new = problem.gradient(x_new);
    const Mat jac_new = problem.num_m > 0 ? problem.jacobian(x_new) : Mat();
    const Vec xi = certificate_xi_from_parts(grad_f, grad_f_new, jac, jac_new, s.x, x_new,
                                             s.z, s.y, params.c, params.p);
    const double rho_step = std::max((s.x - x_new).norm(), (s.z - z_new).norm());
    const double rhs = rep.lambda1 * rho_step;
    if (rhs > 0.0) rep.worst_ratio = std::max(rep.worst_ratio, xi.norm() / rhs);
    if (xi.norm() > rhs * (1.0 + 1e-9) + 1e-300) ++rep.violations;

    s.x = x_new;
    s.y = y_new;
    s.z = z_new;
    grad_f = grad_f_new;
    jac = jac_new;
  }
  return rep;
}

/// Small, gently scaled instance of the same QP family for the diagnostic
/// suites: box [-1,1]^n, curvature and constraint data of unit order, strict
/// Slater point at the origin with margin 0.75. Draw order mirrors
/// generate_qp.
inline QpInstance make_diagnostic_qp(int n, int m, double min_eig, std::uint64_t seed) {
  if (n < 1 || m < 0) throw ContractViolation("make_diagnostic_qp: bad dimensions");
  if (!(min_eig < 0.0)) throw ContractViolation("make_diagnostic_qp: min_eig < 0");
  Rng rng(seed);
  QpInstance inst;
  inst.seed = seed;
  inst.target_min_eig = min_eig;
  const double sqrt_n = std::sqrt(static_cast<double>(n));

  Mat raw(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) raw(i, j) = rng.gaussian();
  Mat q0 = (0.25 / sqrt_n) * (raw + raw.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(q0, Eigen::EigenvaluesOnly);
  inst.Q = q0 - (es.eigenvalues().minCoeff() - min_eig) * Mat::Identity(n, n);

  inst.r.resize(n);
  for (int j = 0; j < n; ++j) inst.r[j] = rng.gaussian() / (2.0 * sqrt_n);

  inst.c = Vec::Constant(m, -0.75);
  const double a_scale = 1.0 / (8.0 * n * sqrt_n);
  for (int i = 0; i < m; ++i) {
    Mat g(n, n);
    for (int a = 0; a < n; ++a)
      for (int b2 = 0; b2 < n; ++b2) g(a, b2) = rng.gaussian();
    inst.A.push_back(a_scale * (g.transpose() * g));
    Vec bi(n);
    for (int j = 0; j < n; ++j) bi[j] = rng.gaussian() / (4.0 * sqrt_n);
    inst.b.push_back(std::move(bi));
  }
  inst.box = BoxSet::cube(n, -1.0, 1.0);
  inst.validate();
  return inst;
}

}  // namespace splm
