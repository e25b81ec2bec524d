#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "divband/reinsurance.hpp"

using namespace divband;

TEST_CASE("apply per family") {
  CHECK(apply(RetainedLossSpec::identity(), 3.7) == 3.7);
  CHECK(apply(RetainedLossSpec::proportional(0.4), 3.0) == doctest::Approx(1.2));
  CHECK(apply(RetainedLossSpec::xl(2.0), 1.5) == 1.5);
  CHECK(apply(RetainedLossSpec::xl(2.0), 5.0) == 2.0);
  // Layer cover: retain up to M, cede the layer (M, M+L], retain the rest.
  CHECK(apply(RetainedLossSpec::lxl(2.0, 3.0), 1.5) == 1.5);
  CHECK(apply(RetainedLossSpec::lxl(2.0, 3.0), 4.0) == 2.0);
  CHECK(apply(RetainedLossSpec::lxl(2.0, 3.0), 7.0) == doctest::Approx(4.0));
}

TEST_CASE("spec constructors validate parameters") {
  CHECK_THROWS_AS((void)RetainedLossSpec::proportional(1.5), std::invalid_argument);
  CHECK_THROWS_AS((void)RetainedLossSpec::proportional(-0.1), std::invalid_argument);
  CHECK_THROWS_AS((void)RetainedLossSpec::xl(-1.0), std::invalid_argument);
  CHECK_THROWS_AS((void)RetainedLossSpec::lxl(-1.0, 2.0), std::invalid_argument);
}

TEST_CASE("retained_mean closed forms match numeric integration") {
  SeverityLaw law = SeverityLaw::exponential(0.8);
  auto numeric = [&](const RetainedLossSpec& spec) {
    // Simpson on [0, 60] with the exponential density.
    std::size_t n = 60000;
    double a = 0.0, b = 60.0, hh = (b - a) / n, s = 0.0;
    auto f = [&](double x) { return apply(spec, x) * 0.8 * std::exp(-0.8 * x); };
    for (std::size_t i = 0; i < n; i += 2)
      s += f(a + i * hh) + 4.0 * f(a + (i + 1) * hh) + f(a + (i + 2) * hh);
    return s * hh / 3.0;
  };
  for (const RetainedLossSpec& spec :
       {RetainedLossSpec::identity(), RetainedLossSpec::proportional(0.35),
        RetainedLossSpec::xl(1.7), RetainedLossSpec::lxl(1.2, 2.5),
        RetainedLossSpec::xl(kNoCap), RetainedLossSpec::lxl(0.9, kNoCap)}) {
    CHECK(retained_mean(law, spec) == doctest::Approx(numeric(spec)).epsilon(1e-8));
  }

  SeverityLaw emp = SeverityLaw::empirical(1.0, {0.0, 0.85, 0.0, 0.0, 0.15});
  CHECK(retained_mean(emp, RetainedLossSpec::xl(2.0)) ==
        doctest::Approx(0.85 * 1.0 + 0.15 * 2.0));
}

TEST_CASE("pushforward preserves mass and caps XL at the priority atom") {
  auto base = from_severity(SeverityLaw::exponential(1.0), 0.1, 100);
  auto capped = pushforward(RetainedLossSpec::xl(2.0), base);
  CHECK(capped.total_mass() == doctest::Approx(base.total_mass()).epsilon(1e-12));
  std::size_t jm = 20;  // round(M/h)
  // All mass at or below the priority; survival mass collapses onto the atom.
  for (std::size_t i = jm + 1; i < capped.masses.size(); ++i) CHECK(capped.masses[i] == 0.0);
  double above = 0.0;
  for (std::size_t i = jm; i < base.masses.size(); ++i) above += base.masses[i];
  above += base.tail_mass;
  CHECK(capped.masses[jm] == doctest::Approx(above).epsilon(1e-12));
  CHECK(capped.tail_mass == 0.0);
}

TEST_CASE("proportional pushforward rescales the support") {
  auto base = from_severity(SeverityLaw::exponential(1.0), 0.1, 100);
  auto half = pushforward(RetainedLossSpec::proportional(0.5), base);
  CHECK(half.total_mass() == doctest::Approx(base.total_mass()).epsilon(1e-12));
  // Grid mean scales like b up to bucketing error.
  double bm = 0.0, hm = 0.0;
  for (std::size_t i = 0; i < base.masses.size(); ++i) bm += i * 0.1 * base.masses[i];
  for (std::size_t i = 0; i < half.masses.size(); ++i) hm += i * 0.1 * half.masses[i];
  CHECK(hm == doctest::Approx(0.5 * bm).epsilon(0.1));
  auto zero = pushforward(RetainedLossSpec::proportional(0.0), base);
  CHECK(zero.masses[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("lxl pushforward shifts mass beyond the layer down by L") {
  auto base = from_severity(SeverityLaw::exponential(0.5), 0.1, 200);
  auto lxl = pushforward(RetainedLossSpec::lxl(1.0, 2.0), base);
  CHECK(lxl.total_mass() == doctest::Approx(base.total_mass()).epsilon(1e-12));
  // Nothing retained in (M, M+L]: indices 11..30 were mapped to the atom or shifted.
  for (std::size_t i = 11; i <= 30; ++i) {
    double shifted = i + 20 < base.masses.size() ? base.masses[i + 20] : 0.0;
    CHECK(lxl.masses[i] == doctest::Approx(shifted).epsilon(1e-12));
  }
}

TEST_CASE("line_candidates covers the grid and the cap sentinel") {
  ParameterGrid grid;
  grid.b_grid = {0.25, 0.5, 0.75, 1.0};
  grid.m_grid = {0.5, 1.0, 2.0};
  grid.l_grid = {1.0, 4.0};
  auto props = line_candidates(RetainedLossSpec::Family::Proportional, grid);
  CHECK(props.size() == 4);
  auto xls = line_candidates(RetainedLossSpec::Family::XL, grid);
  CHECK(xls.size() == 4);  // 3 priorities + no-cap sentinel
  CHECK(std::isinf(xls.back().M));
  auto lxls = line_candidates(RetainedLossSpec::Family::LXL, grid);
  CHECK(lxls.size() == 7);  // 3*2 + sentinel
  grid.include_no_cap = false;
  CHECK(line_candidates(RetainedLossSpec::Family::XL, grid).size() == 3);
  ParameterGrid unsorted;
  unsorted.m_grid = {2.0, 1.0};
  CHECK_THROWS_AS((void)line_candidates(RetainedLossSpec::Family::XL, unsorted),
                  std::invalid_argument);
}

TEST_CASE("enumerate_candidates includes the all-identity vector") {
  std::vector<std::vector<RetainedLossSpec>> per_line(
      2, {RetainedLossSpec::proportional(0.5), RetainedLossSpec::proportional(0.8)});
  auto vs = enumerate_candidates(per_line, false);
  CHECK(vs.size() == 5);  // 4 products + appended identity
  bool has_ident = false;
  for (const auto& v : vs)
    if (v.specs == ReinsuranceVector::all_identity(2).specs) has_ident = true;
  CHECK(has_ident);

  auto shared = enumerate_candidates(per_line, true);
  CHECK(shared.size() == 3);  // 2 shared specs + identity
  for (std::size_t k = 0; k < 2; ++k) CHECK(shared[k].specs[0] == shared[k].specs[1]);
}

TEST_CASE("enumerate_candidates enforces the product cap") {
  std::vector<RetainedLossSpec> big;
  for (int i = 1; i <= 500; ++i) big.push_back(RetainedLossSpec::xl(0.01 * i));
  std::vector<std::vector<RetainedLossSpec>> per_line(3, big);  // 1.25e8 tuples
  CHECK_THROWS_AS((void)enumerate_candidates(per_line, false), std::invalid_argument);
}
