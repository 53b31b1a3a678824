#pragma once

#include "splm/constants.hpp"
#include "splm/qp.hpp"
#include "splm/solver.hpp"
#include "splm/types.hpp"

#include <json.hpp>

#include <cmath>
#include <limits>
#include <string>

namespace splm {

/// Derived constants of the analysis: mu_K = p - L_f (strong convexity of
/// K(.,z;y)), kappa1 = p/mu_K, kappa2 = K_h/mu_K, kappa3 = 1 + 1/(c mu_K),
/// and the Y-uniform gradient modulus L_h(Y) = sqrt(m) L_h B.
struct KappaConstants {
  double mu_K = 0.0;
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  double kappa3 = 0.0;
  double lip_hY = 0.0;

  static KappaConstants from(const ProblemConstants& k, double p, double c, double B,
                             int m) {
    if (!(p > k.lip_grad_f))
      throw ContractViolation("kappa constants: need p > L_f (mu_K would be <= 0)");
    KappaConstants out;
    out.mu_K = p - k.lip_grad_f;
    out.kappa1 = p / out.mu_K;
    out.kappa2 = k.lip_h / out.mu_K;
    out.kappa3 = 1.0 + 1.0 / (c * out.mu_K);
    out.lip_hY = std::sqrt(static_cast<double>(m)) * k.lip_grad_h * B;
    return out;
  }
};

/// Admissible ranges for (c, alpha, beta, B) under the convergence analysis,
/// evaluated with a chosen p. The beta range keeps only its computable term;
/// the B rule's second branch depends on a constant with no constructive
/// recipe and is reported symbolically.
struct TheoreticalReport {
  double p = 0.0;
  double slater_margin = 0.0;
  int m = 0;
  double mu_K = 0.0;
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  double kappa3 = 0.0;       // at c = c_chosen
  double lip_hY = 0.0;       // at B = B_min_slater
  double B_min_slater = 0.0; // (4 grad_f D + 4 m K_h D + 2 p D^2)/Delta0 + 1
  double B_sigma_numerator = 0.0;  // 2 grad_f + 2 p D
  std::string B_sigma_note;
  double c_term_curvature = 0.0;   // 1/(4 K_h)
  double c_term_kappa = 0.0;       // kappa1/(16 p kappa2^2)
  double c_term_smooth = 0.0;      // 1/(L_f + L_h(Y) + p)
  double c_max = 0.0;
  double c_chosen = 0.0;
  double alpha_term_mixed = 0.0;   // 3/(4 (K_h kappa3^2 - K_h kappa2))
  double alpha_term_quad = 0.0;    // 1/(4 c K_h^2 kappa3^2)
  double alpha_max = 0.0;
  double beta_max_computable = 0.0;  // 1/(24 kappa1)

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["inputs"] = {{"p", p}, {"slater_margin", slater_margin}, {"m", m}};
    j["derived"] = {{"mu_K", mu_K},
                    {"kappa1", kappa1},
                    {"kappa2", kappa2},
                    {"kappa3", kappa3},
                    {"lip_hY", lip_hY}};
    j["B_min"] = {{"value", B_min_slater},
                  {"formula", "(4*grad_f*D + 4*m*K_h*D + 2*p*D^2)/Delta0 + 1"},
                  {"sigma_branch",
                   {{"formula", "(2*grad_f + 2*p*D)/sigma_min"},
                    {"numerator", B_sigma_numerator},
                    {"note", B_sigma_note}}}};
    j["c_max"] = {{"value", c_max},
                  {"terms",
                   {{"1/(4*K_h)", c_term_curvature},
                    {"kappa1/(16*p*kappa2^2)", c_term_kappa},
                    {"1/(L_f+L_h(Y)+p)", c_term_smooth}}},
                  {"chosen", c_chosen}};
    j["alpha_max"] = {{"value", alpha_max},
                      {"terms",
                       {{"3/(4*(K_h*kappa3^2-K_h*kappa2))", alpha_term_mixed},
                        {"1/(4*c*K_h^2*kappa3^2)", alpha_term_quad}}}};
    j["beta_max"] = {{"value", beta_max_computable},
                     {"formula", "1/(24*kappa1)"},
                     {"note", "remaining terms of the full range depend on a "
                              "non-constructive perturbation radius and are omitted"}};
    return j;
  }
};

/// Evaluates the admissible ranges in order: B from the Slater branch, then
/// c_max (c_chosen = c_max), then alpha_max at that c, then the computable
/// beta cap.
inline TheoreticalReport theoretical_ranges(const ProblemConstants& k,
                                            double slater_margin, double p, int m) {
  if (!(slater_margin > 0.0))
    throw ContractViolation("theoretical_ranges: Slater margin must be positive");
  if (!(p > k.lip_grad_f))
    throw ContractViolation("theoretical_ranges: need p > L_f");

  TheoreticalReport r;
  r.p = p;
  r.slater_margin = slater_margin;
  r.m = m;
  r.mu_K = p - k.lip_grad_f;
  r.kappa1 = p / r.mu_K;
  r.kappa2 = k.lip_h / r.mu_K;

  const double d = k.diameter;
  r.B_min_slater = (4.0 * k.sup_grad_f * d + 4.0 * m * k.lip_h * d + 2.0 * p * d * d) /
                       slater_margin +
                   1.0;
  r.B_sigma_numerator = 2.0 * k.sup_grad_f + 2.0 * p * d;
  r.B_sigma_note =
      "sigma_min over the stationary set is not computable a priori; branch reported "
      "symbolically";

  r.lip_hY = std::sqrt(static_cast<double>(m)) * k.lip_grad_h * r.B_min_slater;
  const double inf = std::numeric_limits<double>::infinity();
  r.c_term_curvature = k.lip_h > 0.0 ? 1.0 / (4.0 * k.lip_h) : inf;
  r.c_term_kappa =
      r.kappa2 > 0.0 ? r.kappa1 / (16.0 * p * r.kappa2 * r.kappa2) : inf;
  r.c_term_smooth = 1.0 / (k.lip_grad_f + r.lip_hY + p);
  r.c_max = std::min({r.c_term_curvature, r.c_term_kappa, r.c_term_smooth});
  r.c_chosen = r.c_max;

  r.kappa3 = 1.0 + 1.0 / (r.c_chosen * r.mu_K);
  const double k3sq = r.kappa3 * r.kappa3;
  const double mixed_den = k.lip_h * k3sq - k.lip_h * r.kappa2;
  r.alpha_term_mixed = mixed_den > 0.0 ? 3.0 / (4.0 * mixed_den) : inf;
  r.alpha_term_quad =
      k.lip_h > 0.0 ? 1.0 / (4.0 * r.c_chosen * k.lip_h * k.lip_h * k3sq) : inf;
  r.alpha_max = std::min(r.alpha_term_mixed, r.alpha_term_quad);

  r.beta_max_computable = 1.0 / (24.0 * r.kappa1);
  return r;
}

/// Fully determined parameter set inside the analysis's ranges, used by the
/// diagnostic suites: p = p_over_lf * L_f, c = c_max, alpha = alpha_max,
/// beta = beta_fraction * (1/(24 kappa1)), B from the Slater branch.
inline SplmParams theoretical_params(const ProblemConstants& k, double slater_margin,
                                     int m, double p_over_lf = 2.0,
                                     double beta_fraction = 0.1) {
  const double p = p_over_lf * k.lip_grad_f;
  const TheoreticalReport r = theoretical_ranges(k, slater_margin, p, m);
  SplmParams params;
  params.p = p;
  params.c = r.c_chosen;
  // alpha_max is +inf when there are no constraints; any value works then
  params.alpha = std::isfinite(r.alpha_max) ? r.alpha_max : 1.0;
  params.beta = beta_fraction * r.beta_max_computable;
  params.dual_bound = r.B_min_slater;
  return params;
}

/// Practical defaults for the QP family: p = 3 |lambda_min(Q)| (p = 1 when
/// the instance is not actually nonconvex), alpha = 0.01, beta = 0.05,
/// c = 0.01, B = 1e4.
inline SplmParams practical_defaults(const QpInstance& inst) {
  SplmParams params;
  params.p = inst.target_min_eig < 0.0 ? 3.0 * std::abs(inst.target_min_eig) : 1.0;
  params.alpha = 0.01;
  params.beta = 0.05;
  params.c = 0.01;
  params.dual_bound = 1e4;
  return params;
}

}  // namespace splm
