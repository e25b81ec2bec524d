#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "divband/solver.hpp"

using namespace divband;
using namespace divband::testing;

TEST_CASE("classical single barrier lands on the closed-form optimum") {
  // One line, exp(1) claims, beta=1, eta=0.5, delta=0.1: p = 1.5 and the
  // optimal barrier solves a quadratic in the exponents,
  //   1.5 s^2 + 0.4 s - 0.1 = 0,
  // giving a* = ln(r2^2 (r2+1) / (r1^2 (r1+1))) / (r1 - r2) = 2.2123...
  ThinningModel m = classical_model();
  SolveOptions options;
  options.h = 0.01;
  options.x_max = 8.0;
  CandidatePool pool(m, options.h, 800);
  StateOptimizer opt(pool, identity_space(1));
  GridSolution sol = solve(m, opt, options);

  double p = 1.5, delta = 0.1, beta = 1.0;
  double disc = std::sqrt((p - beta - delta) * (p - beta - delta) + 4.0 * p * delta);
  double r1 = (-(p - beta - delta) + disc) / (2.0 * p);
  double r2 = (-(p - beta - delta) - disc) / (2.0 * p);
  // V ∝ c1 e^{r1 x} + c2 e^{r2 x} with p V'(0) = (delta+beta) V(0); the
  // barrier sits where V'' vanishes.
  double c1 = p * r2 - (delta + beta);
  double c2 = -(p * r1 - (delta + beta));
  double a_star = std::log(-c2 * r2 * r2 / (c1 * r1 * r1)) / (r1 - r2);
  CHECK(a_star == doctest::Approx(2.2121).epsilon(1e-3));

  REQUIRE(sol.bands.levels.size() == 1);
  CHECK(std::abs(sol.bands.levels[0] - a_star) <= 0.06);
  CHECK(sol.verified);

  // The value is scale-free up to normalization; compare the ratio
  // V(a1)/V(0) against the closed-form shape.
  auto Vshape = [&](double x) { return c1 * std::exp(r1 * x) + c2 * std::exp(r2 * x); };
  std::size_t ia = sol.bands.level_index(0);
  double ratio_solver = sol.V.values[ia] / sol.V.values[0];
  CHECK(ratio_solver ==
        doctest::Approx(Vshape(sol.bands.levels[0]) / Vshape(0.0)).epsilon(5e-3));
}

TEST_CASE("the marched derivative stays positive and V has slope at least 1") {
  ThinningModel m = classical_model();
  SolveOptions options;
  options.h = 0.02;
  options.x_max = 8.0;
  CandidatePool pool(m, options.h, 400);
  StateOptimizer opt(pool, identity_space(1));
  GridSolution sol = solve(m, opt, options);
  for (double d : sol.fprime.values) CHECK(d > 0.0);
  for (std::size_t i = 1; i < sol.V.size(); ++i) CHECK(sol.V.fdiff(i) >= 1.0 - 1e-9);
}

TEST_CASE("a heavy second atom produces a two-band policy") {
  // 85% unit claims, 15% size-4 claims: the value function develops a second
  // payout band anchored near x=1, where a unit claim exactly survives.
  RunConfig cfg = load_config(testing::fixture("twoband.toml"));
  std::size_t K = static_cast<std::size_t>(std::llround(cfg.solve.x_max / cfg.solve.h));
  CandidatePool pool(cfg.model, cfg.solve.h, K);
  StateOptimizer opt(pool, cfg.space);
  GridSolution sol = solve(cfg.model, opt, cfg.solve);

  REQUIRE(sol.bands.levels.size() == 2);
  CHECK(sol.bands.levels[1] > sol.bands.levels[0]);
  CHECK(sol.bands.levels[1] >= 0.9);
  CHECK(sol.bands.levels[1] <= 1.06);
  CHECK(sol.verified);
  CHECK(sol.residual.pass());
  // Two B components; the last one is unbounded.
  REQUIRE(sol.bands.b_intervals.size() == 2);
  CHECK(std::isinf(sol.bands.b_intervals.back().second));

  // extract_partition recovers the same levels from the value function alone.
  BandPolicy part = extract_partition(sol, opt, sol.residual.tolerance);
  REQUIRE(part.levels.size() == 2);
  for (std::size_t k = 0; k < 2; ++k)
    CHECK(std::abs(part.levels[k] - sol.bands.levels[k]) <= 2.0 * sol.h + 1e-12);
}

TEST_CASE("extract_partition rejects a function with no barrier structure") {
  ThinningModel m = classical_model();
  SolveOptions options;
  options.h = 0.05;
  options.x_max = 5.0;
  CandidatePool pool(m, options.h, 100);
  StateOptimizer opt(pool, identity_space(1));
  GridSolution sol = solve(m, opt, options);
  // Overwrite V with the identity: payout everywhere, sup Lambda far from 0.
  for (std::size_t i = 0; i < sol.V.size(); ++i)
    sol.V.values[i] = static_cast<double>(i) * options.h;
  CHECK_THROWS_WITH_AS((void)extract_partition(sol, opt, 1e-6),
                       doctest::Contains("band structure violated"), std::runtime_error);
}

TEST_CASE("solve_first_band demands the barrier away from the boundary") {
  ThinningModel m = classical_model();
  SolveOptions options;
  options.h = 0.05;
  options.x_max = 1.0;  // far below a* = 2.21: f' still falling at x_max
  CandidatePool pool(m, options.h, 20);
  StateOptimizer opt(pool, identity_space(1));
  CHECK_THROWS_AS((void)solve_first_band(m, opt, options), std::runtime_error);
}

TEST_CASE("refine_study validates its grid list") {
  ThinningModel m = classical_model();
  SolveOptions base;
  base.x_max = 8.0;
  CHECK_THROWS_AS((void)refine_study(m, identity_space(1), {0.1}, base), std::invalid_argument);
  CHECK_THROWS_AS((void)refine_study(m, identity_space(1), {0.05, 0.1}, base),
                  std::invalid_argument);
}

TEST_CASE("refine_study reports shrinking barrier increments") {
  ThinningModel m = classical_model();
  SolveOptions base;
  base.x_max = 8.0;
  auto rows = refine_study(m, identity_space(1), {0.08, 0.04, 0.02}, base);
  REQUIRE(rows.size() == 3);
  for (const auto& row : rows) {
    CHECK(row.a1 > 1.5);
    CHECK(row.a1 < 3.0);
    CHECK(row.v0 > 0.0);
  }
  CHECK(std::abs(rows[2].a1 - rows[1].a1) <= std::abs(rows[1].a1 - rows[0].a1) + 1e-12);
}
