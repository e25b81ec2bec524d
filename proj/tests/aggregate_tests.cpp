#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "divband/aggregate.hpp"

using namespace divband;
using namespace divband::testing;

TEST_CASE("shock aggregate is the three-term subset mixture") {
  ThinningModel m = shock_model();
  double h = 0.05;
  std::size_t K = 400;
  auto agg = build_aggregate(m, ReinsuranceVector::all_identity(2), h, K);

  // Manual: w{1} F1 + w{2} F2 + w{1,2} (F1 * F2), no empty-set mass here.
  auto f1 = from_severity(m.severities[0], h, K);
  auto f2 = from_severity(m.severities[1], h, K);
  auto both = convolve(f1, f2);
  double beta = m.beta_total();
  auto manual = mixture({{2.0 / beta, f1}, {3.0 / beta, f2}, {1.0 / beta, both}});

  REQUIRE(agg.dist.masses.size() == manual.masses.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < manual.masses.size(); ++i)
    worst = std::max(worst, std::abs(agg.dist.masses[i] - manual.masses[i]));
  CHECK(worst <= 1e-12);
  CHECK(agg.p_claim_zero == doctest::Approx(0.0));
}

TEST_CASE("aggregate mean under identity equals the gross claim mean exactly") {
  for (const ThinningModel& m : {example1_model(), shock_model()}) {
    auto agg = build_aggregate(m, ReinsuranceVector::all_identity(m.n), 0.1, 100);
    CHECK(agg.mean == doctest::Approx(gross_claim_mean(m)).epsilon(1e-14));
    // The exact mean must not carry the lattice's +h/2 bucketing bias.
    CHECK(std::abs(agg.mean - agg.dist.mean()) < 0.06);
    CHECK(std::abs(agg.mean - agg.dist.mean()) > 1e-4);
  }
}

TEST_CASE("identity contracts have zero reinsurance premium") {
  ThinningModel m = example1_model();
  CandidatePool pool(m, 0.05, 200);
  std::vector<RetainedLossSpec> ident(m.n, RetainedLossSpec::identity());
  PremiumTriple t = pool.candidate_premiums(ident);
  CHECK(t.q_r == doctest::Approx(0.0));
  CHECK(t.p_net == doctest::Approx(t.p_gross));
  CHECK(t.p_gross ==
        doctest::Approx((1.0 + m.eta) * m.beta_total() * gross_claim_mean(m)).epsilon(1e-14));
  CHECK(t.p_gross == doctest::Approx(26.691166666666664).epsilon(1e-12));
}

TEST_CASE("reinsurance lowers the net premium by the loaded ceded mean") {
  ThinningModel m = example1_model();
  CandidatePool pool(m, 0.05, 200);
  std::vector<RetainedLossSpec> specs(m.n, RetainedLossSpec::proportional(0.6));
  PremiumTriple t = pool.candidate_premiums(specs);
  double ceded = gross_claim_mean(m) - pool.aggregate_mean(specs);
  CHECK(ceded == doctest::Approx(0.4 * gross_claim_mean(m)).epsilon(1e-12));
  CHECK(t.q_r == doctest::Approx((1.0 + m.eta1) * m.beta_total() * ceded).epsilon(1e-12));
  CHECK(t.p_net == doctest::Approx(t.p_gross - t.q_r));
  CHECK(t.p_net > 0.0);
}

TEST_CASE("p_claim_zero matches the aggregate atom at zero") {
  ThinningModel m = example1_model();
  CandidatePool pool(m, 0.05, 200);
  std::vector<RetainedLossSpec> specs = {RetainedLossSpec::proportional(0.0),
                                         RetainedLossSpec::identity(),
                                         RetainedLossSpec::identity()};
  double p0 = pool.p_claim_zero(specs);
  const AggregateLaw& law = pool.aggregate(specs);
  CHECK(p0 == doctest::Approx(law.dist.masses[0]).epsilon(1e-12));
  // Fully ceding line 1 makes events hitting only line 1 produce zero claims.
  auto w = pool.subset_weights();
  CHECK(p0 == doctest::Approx(w[0] + w[1]).epsilon(1e-12));
}

TEST_CASE("subset law caching is consistent with direct convolution") {
  ThinningModel m = shock_model();
  CandidatePool pool(m, 0.05, 300);
  std::vector<RetainedLossSpec> ident(2, RetainedLossSpec::identity());
  const auto& law12 = pool.subset_law(0b11, ident);
  auto direct = convolve(pool.line_law(0, ident[0]), pool.line_law(1, ident[1]));
  REQUIRE(law12.masses.size() == direct.masses.size());
  for (std::size_t i = 0; i < direct.masses.size(); ++i)
    CHECK(law12.masses[i] == doctest::Approx(direct.masses[i]).epsilon(1e-14));
}
