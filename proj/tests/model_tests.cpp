#include <cmath>

#include "doctest.h"
#include "helpers.hpp"

using namespace divband;
using namespace divband::testing;

TEST_CASE("severity law means") {
  CHECK(SeverityLaw::exponential(0.5).mean() == doctest::Approx(2.0));
  SeverityLaw emp = SeverityLaw::empirical(1.0, {0.0, 0.85, 0.0, 0.0, 0.15});
  CHECK(emp.mean() == doctest::Approx(0.85 * 1.0 + 0.15 * 4.0));
}

TEST_CASE("validate accepts the three-line model") {
  ThinningModel m = example1_model();
  CHECK(validate(m).ok());
  // Loadings far above 1 are legal too.
  m.eta = 3.0;
  m.eta1 = 3.5;
  CHECK(validate(m).ok());
}

TEST_CASE("validate flags a zero intensity") {
  ThinningModel m = example1_model();
  m.beta[0] = 0.0;
  ValidationReport r = validate(m);
  REQUIRE_FALSE(r.ok());
  bool found = false;
  for (const auto& v : r.violations)
    if (v.find("intensity must be positive") != std::string::npos) found = true;
  CHECK(found);
}

TEST_CASE("validate flags eta1 below eta") {
  ThinningModel m = example1_model();
  m.eta = 3.0;
  m.eta1 = 2.0;
  ValidationReport r = validate(m);
  REQUIRE_FALSE(r.ok());
  bool found = false;
  for (const auto& v : r.violations)
    if (v.find("eta1 >= eta required") != std::string::npos) found = true;
  CHECK(found);
}

TEST_CASE("identity thinning matrix gives singleton weights beta_j / beta") {
  ThinningModel m;
  m.m = 3;
  m.n = 3;
  m.beta = {8.0, 4.0, 5.0};
  m.p = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  m.severities = {SeverityLaw::exponential(1), SeverityLaw::exponential(1),
                  SeverityLaw::exponential(1)};
  m.eta = 0.3;
  m.eta1 = 0.35;
  m.delta = 0.3;
  auto w = line_claim_weights(m);
  REQUIRE(w.size() == 8);
  CHECK(w[0] == doctest::Approx(0.0));
  CHECK(w[1] == doctest::Approx(8.0 / 17.0));
  CHECK(w[2] == doctest::Approx(4.0 / 17.0));
  CHECK(w[4] == doctest::Approx(5.0 / 17.0));
  CHECK(w[3] == doctest::Approx(0.0));
  CHECK(w[7] == doctest::Approx(0.0));
}

TEST_CASE("weights sum to one") {
  for (const ThinningModel& m : {example1_model(), shock_model(), classical_model()}) {
    auto w = line_claim_weights(m);
    double total = 0.0;
    for (double v : w) total += v;
    CHECK(std::abs(total - 1.0) <= 1e-12);
  }
}

TEST_CASE("common shock weights") {
  ThinningModel m = shock_model();
  auto w = line_claim_weights(m);
  REQUIRE(w.size() == 4);
  double beta = 6.0;
  CHECK(w[0] == doctest::Approx(0.0));
  CHECK(w[1] == doctest::Approx(2.0 / beta));  // class 1 hits line 1 only
  CHECK(w[2] == doctest::Approx(3.0 / beta));  // class 2 hits line 2 only
  CHECK(w[3] == doctest::Approx(1.0 / beta));  // the shock class hits both
}

TEST_CASE("more than 20 lines is rejected") {
  ThinningModel m;
  m.m = 1;
  m.n = 21;
  m.beta = {1.0};
  m.p = {std::vector<double>(21, 0.5)};
  CHECK_THROWS_AS((void)line_claim_weights(m), std::invalid_argument);
}

TEST_CASE("gross claim mean is the hit-weighted severity mean") {
  ThinningModel m = example1_model();
  // Per line: hit probability sum_i (beta_i / beta) p_iz times E(U_z).
  double mu = gross_claim_mean(m);
  CHECK(mu == doctest::Approx(1.2077450980392155).epsilon(1e-12));
  CHECK(m.line_hit_probability(0) == doctest::Approx(8.155 / 17.0));
}
