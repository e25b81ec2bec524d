#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "divband/operators.hpp"

using namespace divband;
using namespace divband::testing;

namespace {

GridFunction linear(double h, std::size_t K, double slope, double offset) {
  GridFunction u;
  u.h = h;
  u.values.resize(K + 1);
  for (std::size_t i = 0; i <= K; ++i) u.values[i] = offset + slope * static_cast<double>(i) * h;
  return u;
}

}  // namespace

TEST_CASE("fdiff is the backward-looking forward difference") {
  GridFunction u;
  u.h = 0.5;
  u.values = {1.0, 2.0, 4.0};
  CHECK(u.fdiff(1) == doctest::Approx(2.0));
  CHECK(u.fdiff(2) == doctest::Approx(4.0));
  CHECK_THROWS_AS((void)u.fdiff(0), std::out_of_range);
  CHECK_THROWS_AS((void)u.fdiff(3), std::out_of_range);
}

TEST_CASE("L and Lambda match the manual operator and differ by p_net (u' - 1)") {
  ThinningModel m = shock_model();
  double h = 0.05;
  std::size_t K = 300;
  auto law = build_aggregate(m, ReinsuranceVector::all_identity(2), h, K);
  PremiumTriple prem = premiums(m, law, law);

  GridFunction u = linear(h, K, 1.3, 2.0);
  std::size_t i = 200;
  double beta = m.beta_total();
  double dot = 0.0;
  for (std::size_t j = 0; j <= std::min(i, law.dist.masses.size() - 1); ++j)
    dot += law.dist.masses[j] * u.values[i - j];

  double L = L_apply(u, i, law, prem, m);
  double Lam = Lambda_apply(u, i, law, prem, m);
  CHECK(L == doctest::Approx(prem.p_net * 1.3 - (m.delta + beta) * u.values[i] + beta * dot)
                 .epsilon(1e-12));
  CHECK(Lam == doctest::Approx(prem.p_net - (m.delta + beta) * u.values[i] + beta * dot)
                   .epsilon(1e-12));
  CHECK(L - Lam == doctest::Approx(prem.p_net * (1.3 - 1.0)).epsilon(1e-10));
}

TEST_CASE("v0 closed form reduces to p/(delta+beta) when claims never vanish") {
  // One line, identity only: every claim is positive, so P(Z=0) = 0.
  ThinningModel m = classical_model();
  CandidatePool pool(m, 0.05, 400);
  StateOptimizer opt(pool, identity_space(1));
  double p = (1.0 + m.eta) * m.beta_total() * gross_claim_mean(m);
  CHECK(v0_closed_form(opt) == doctest::Approx(p / (m.delta + m.beta_total())).epsilon(1e-12));
}

TEST_CASE("v0 closed form rewards a positive probability of zero claims") {
  // Fully ceding one line creates an atom at zero, shrinking the effective
  // claim intensity in the denominator.
  ThinningModel m = shock_model();
  CandidatePool pool(m, 0.05, 400);
  ContractSpace space;
  space.per_line = {{RetainedLossSpec::proportional(0.0), RetainedLossSpec::identity()},
                    {RetainedLossSpec::identity()}};
  StateOptimizer opt(pool, space);
  double v0 = v0_closed_form(opt);
  // At least as good as the identity stand-still value.
  double p = (1.0 + m.eta) * m.beta_total() * gross_claim_mean(m);
  CHECK(v0 >= p / (m.delta + m.beta_total()) - 1e-12);
}

TEST_CASE("hjb_residual reports the worst point and honors from_index") {
  ThinningModel m = classical_model();
  CandidatePool pool(m, 0.05, 200);
  StateOptimizer opt(pool, identity_space(1));
  GridFunction u = linear(0.05, 200, 1.1, 1.0);
  ResidualReport report = hjb_residual(u, opt, 5e-3);
  CHECK(report.tolerance ==
        doctest::Approx(5e-3 * (m.delta + m.beta_total()) * u.values.back()));
  REQUIRE(report.points.size() == 200);
  double worst = 0.0;
  std::size_t arg = 0;
  for (const auto& pt : report.points) {
    CHECK(pt.residual == doctest::Approx(std::max(1.0 - 1.1, pt.sup_L)).epsilon(1e-12));
    if (std::abs(pt.residual) > worst) {
      worst = std::abs(pt.residual);
      arg = pt.index;
    }
  }
  CHECK(report.max_abs == doctest::Approx(worst));
  CHECK(report.argmax_index == arg);

  ResidualReport upper = hjb_residual(u, opt, 5e-3, 150);
  CHECK(upper.points.size() == 51);
  CHECK(upper.points.front().index == 150);
}

TEST_CASE("check_bounds accepts a compliant function and reports violations") {
  ThinningModel m = classical_model();
  double mu = gross_claim_mean(m);
  double beta = m.beta_total();
  double lower = (1.0 + m.eta) * mu * beta / (beta + m.delta);
  double upper = (1.0 + m.eta) * mu * beta / m.delta;

  GridFunction ok = linear(0.1, 50, 1.0, 0.5 * (lower + upper));
  CHECK(check_bounds(ok, m, mu).ok());

  GridFunction low = linear(0.1, 50, 1.0, lower - 1.0);
  CHECK_FALSE(check_bounds(low, m, mu).ok());

  GridFunction high = linear(0.1, 50, 1.0, upper + 1.0);
  CHECK_FALSE(check_bounds(high, m, mu).ok());

  GridFunction flat = linear(0.1, 50, 0.5, 0.5 * (lower + upper));
  BoundsReport r = check_bounds(flat, m, mu);
  REQUIRE_FALSE(r.ok());
  bool slope_msg = false;
  for (const auto& v : r.violations)
    if (v.find("slope below 1") != std::string::npos) slope_msg = true;
  CHECK(slope_msg);
}
