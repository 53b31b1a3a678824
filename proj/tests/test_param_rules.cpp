#include "splm/constants.hpp"
#include "splm/diagnostics.hpp"
#include "splm/param_rules.hpp"
#include "splm/qp.hpp"

#include <doctest.h>

#include "test_support.hpp"

using namespace splm;
using doctest::Approx;

TEST_CASE("kappa formulas evaluate directly") {
  ProblemConstants k;
  k.lip_grad_f = 1.0;
  k.lip_h = 1.0;
  const KappaConstants kap = KappaConstants::from(k, 2.0, 0.1, 10.0, 1);
  CHECK(kap.mu_K == Approx(1.0));
  CHECK(kap.kappa1 == Approx(2.0));
  CHECK(kap.kappa2 == Approx(1.0));
  CHECK(kap.kappa3 == Approx(11.0));

  CHECK_THROWS_AS(KappaConstants::from(k, 0.5, 0.1, 10.0, 1), ContractViolation);
}

TEST_CASE("beta cap is 1/(24 kappa1)") {
  ProblemConstants k;
  k.lip_grad_f = 1.0;
  k.lip_h = 1.0;
  k.lip_grad_h = 0.5;
  k.sup_grad_f = 2.0;
  k.diameter = 4.0;
  const TheoreticalReport r = theoretical_ranges(k, 1.0, 2.0, 1);
  CHECK(r.mu_K == Approx(1.0));
  CHECK(r.kappa1 == Approx(2.0));
  CHECK(r.beta_max_computable == Approx(1.0 / 48.0));
}

TEST_CASE("reported bounds agree with a spreadsheet-style re-evaluation") {
  const QpInstance inst = make_diagnostic_qp(2, 1, -0.25, 5);
  const Problem problem = to_problem(inst);
  const ProblemConstants k =
      estimate_constants(problem, ConstantsMode::AnalyticQp, 100, 9);
  const double slater = 0.75, p = 2.0 * k.lip_grad_f;
  const TheoreticalReport r = theoretical_ranges(k, slater, p, inst.m());

  // independent re-evaluation, term by term
  const double mu = p - k.lip_grad_f;
  const double kappa1 = p / mu;
  const double kappa2 = k.lip_h / mu;
  const double d = k.diameter;
  const double b_min =
      (4.0 * k.sup_grad_f * d + 4.0 * inst.m() * k.lip_h * d + 2.0 * p * d * d) / slater +
      1.0;
  CHECK(r.B_min_slater == Approx(b_min).epsilon(1e-14));
  const double lip_hy = std::sqrt(1.0) * k.lip_grad_h * b_min;
  const double c_max = std::min({1.0 / (4.0 * k.lip_h),
                                 kappa1 / (16.0 * p * kappa2 * kappa2),
                                 1.0 / (k.lip_grad_f + lip_hy + p)});
  CHECK(r.c_max == Approx(c_max).epsilon(1e-14));
  const double kappa3 = 1.0 + 1.0 / (c_max * mu);
  CHECK(r.kappa3 == Approx(kappa3).epsilon(1e-14));
  const double alpha_max =
      std::min(3.0 / (4.0 * (k.lip_h * kappa3 * kappa3 - k.lip_h * kappa2)),
               1.0 / (4.0 * c_max * k.lip_h * k.lip_h * kappa3 * kappa3));
  CHECK(r.alpha_max == Approx(alpha_max).epsilon(1e-14));
  CHECK(r.beta_max_computable == Approx(1.0 / (24.0 * kappa1)).epsilon(1e-14));

  // consistency conditions inside the admissible region
  CHECK(r.mu_K > 0.0);
  CHECK(r.c_chosen * (k.lip_grad_f + r.lip_hY + p) <= 1.0 + 1e-12);
  CHECK(r.kappa3 == Approx(1.0 + 1.0 / (r.c_chosen * r.mu_K)));

  // the report serializes
  const auto j = r.to_json();
  CHECK(j.contains("c_max"));
  CHECK(j.contains("beta_max"));

  CHECK_THROWS_AS(theoretical_ranges(k, slater, 0.5 * k.lip_grad_f, inst.m()),
                  ContractViolation);
}

TEST_CASE("practical defaults follow the experimental recipe") {
  QpInstance inst = generate_qp(4, 2, -10.0, 1);
  SplmParams p1 = practical_defaults(inst);
  CHECK(p1.p == Approx(30.0));
  CHECK(p1.alpha == Approx(0.01));
  CHECK(p1.beta == Approx(0.05));
  CHECK(p1.c == Approx(0.01));
  CHECK(p1.dual_bound == Approx(1e4));

  inst.target_min_eig = -0.1;
  CHECK(practical_defaults(inst).p == Approx(0.3));
  inst.target_min_eig = -1.0;
  CHECK(practical_defaults(inst).p == Approx(3.0));

  // degenerate instance: not actually nonconvex, falls back to p = 1
  inst.target_min_eig = 0.5;
  CHECK(practical_defaults(inst).p == Approx(1.0));
}
