#pragma once

#include <cstddef>
#include <vector>

#include "divband/model.hpp"

namespace divband {

// Probability distribution on the grid {0, h, 2h, ..., K*h}.
// Bucketing is left-open/right-closed: masses[j] = P((j-1)h < X <= jh) for
// j >= 1 and masses[0] = P(X = 0). Mass beyond K*h is kept in tail_mass and
// its contribution to the mean (E[X; X > Kh]) in tail_mean, so means stay
// exact under truncation.
struct LatticeDistribution {
  double h = 0.0;
  std::vector<double> masses;
  double tail_mass = 0.0;
  double tail_mean = 0.0;  // absolute mean contribution of the tail

  std::size_t size() const { return masses.size(); }

  double total_mass() const;
  double mean() const;
  double cdf(double x) const;  // right-continuous; excludes tail_mass
};

LatticeDistribution from_severity(const SeverityLaw& law, double h, std::size_t K);

LatticeDistribution point_mass_at_zero(double h, std::size_t K);

LatticeDistribution convolve(const LatticeDistribution& a, const LatticeDistribution& b);

LatticeDistribution mixture(const std::vector<std::pair<double, LatticeDistribution>>& components);

namespace detail {
// The two convolution kernels behind convolve(); exposed for agreement tests.
LatticeDistribution convolve_direct(const LatticeDistribution& a, const LatticeDistribution& b);
LatticeDistribution convolve_transform(const LatticeDistribution& a, const LatticeDistribution& b);
}  // namespace detail

}  // namespace divband
