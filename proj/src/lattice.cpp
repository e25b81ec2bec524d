#include "divband/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>

#include <fftw3.h>

namespace divband {

namespace {

constexpr double kMassTol = 1e-12;

void require_compatible(const LatticeDistribution& a, const LatticeDistribution& b) {
  if (std::abs(a.h - b.h) > 0.0)
    throw std::invalid_argument("lattice step mismatch");
}

}  // namespace

double LatticeDistribution::total_mass() const {
  return std::accumulate(masses.begin(), masses.end(), 0.0) + tail_mass;
}

double LatticeDistribution::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < masses.size(); ++i) m += static_cast<double>(i) * h * masses[i];
  return m + tail_mean;
}

double LatticeDistribution::cdf(double x) const {
  if (x < 0.0) return 0.0;
  // Right-continuous: all buckets (j-1)h < X <= jh with jh <= x have resolved.
  auto j = static_cast<std::size_t>(std::floor(x / h + 1e-9));
  j = std::min(j, masses.size() - 1);
  double c = 0.0;
  for (std::size_t k = 0; k <= j; ++k) c += masses[k];
  return c;
}

LatticeDistribution point_mass_at_zero(double h, std::size_t K) {
  LatticeDistribution d;
  d.h = h;
  d.masses.assign(K + 1, 0.0);
  d.masses[0] = 1.0;
  return d;
}

LatticeDistribution from_severity(const SeverityLaw& law, double h, std::size_t K) {
  if (!(h > 0.0) || K < 1) throw std::invalid_argument("from_severity: h > 0 and K >= 1 required");
  LatticeDistribution d;
  d.h = h;
  d.masses.assign(K + 1, 0.0);
  if (law.kind == SeverityLaw::Kind::Exponential) {
    double lambda = law.rate;
    if (!(lambda > 0.0)) throw std::invalid_argument("exponential rate must be positive");
    double prev = 0.0;  // CDF(0)
    for (std::size_t j = 1; j <= K; ++j) {
      double cur = 1.0 - std::exp(-lambda * static_cast<double>(j) * h);
      d.masses[j] = cur - prev;
      prev = cur;
    }
    double Kh = static_cast<double>(K) * h;
    d.tail_mass = std::exp(-lambda * Kh);
    // E[X; X > Kh] for the exponential law.
    d.tail_mean = d.tail_mass * (Kh + 1.0 / lambda);
  } else {
    if (!(law.step > 0.0)) throw std::invalid_argument("empirical severity step must be positive");
    for (std::size_t i = 0; i < law.masses.size(); ++i) {
      double x = static_cast<double>(i) * law.step;
      double w = law.masses[i];
      if (w == 0.0) continue;
      if (x > static_cast<double>(K) * h + 1e-12) {
        d.tail_mass += w;
        d.tail_mean += w * x;
      } else {
        // Bucket (j-1)h < x <= jh; exact grid hits keep their index.
        auto j = static_cast<std::size_t>(std::ceil(x / h - 1e-9));
        d.masses[std::min(j, K)] += w;
      }
    }
  }
  return d;
}

namespace detail {

LatticeDistribution convolve_direct(const LatticeDistribution& a, const LatticeDistribution& b) {
  require_compatible(a, b);
  std::size_t K = std::max(a.masses.size(), b.masses.size()) - 1;
  LatticeDistribution c;
  c.h = a.h;
  c.masses.assign(K + 1, 0.0);
  for (std::size_t i = 0; i < a.masses.size(); ++i) {
    double ai = a.masses[i];
    if (ai == 0.0) continue;
    std::size_t jmax = std::min(b.masses.size() - 1, K - std::min(K, i));
    const double* bm = b.masses.data();
    double* cm = c.masses.data() + i;
    for (std::size_t j = 0; j <= jmax; ++j) cm[j] += ai * bm[j];
  }
  return c;
}

LatticeDistribution convolve_transform(const LatticeDistribution& a, const LatticeDistribution& b) {
  require_compatible(a, b);
  std::size_t K = std::max(a.masses.size(), b.masses.size()) - 1;
  std::size_t full = a.masses.size() + b.masses.size() - 1;
  std::size_t N = 1;
  while (N < full) N <<= 1;

  std::vector<double> xa(N, 0.0), xb(N, 0.0);
  std::copy(a.masses.begin(), a.masses.end(), xa.begin());
  std::copy(b.masses.begin(), b.masses.end(), xb.begin());
  std::vector<std::complex<double>> fa(N / 2 + 1), fb(N / 2 + 1);

  fftw_plan pa = fftw_plan_dft_r2c_1d(static_cast<int>(N), xa.data(),
                                      reinterpret_cast<fftw_complex*>(fa.data()), FFTW_ESTIMATE);
  fftw_execute(pa);
  fftw_destroy_plan(pa);
  fftw_plan pb = fftw_plan_dft_r2c_1d(static_cast<int>(N), xb.data(),
                                      reinterpret_cast<fftw_complex*>(fb.data()), FFTW_ESTIMATE);
  fftw_execute(pb);
  fftw_destroy_plan(pb);

  for (std::size_t i = 0; i < fa.size(); ++i) fa[i] *= fb[i];
  std::vector<double> out(N, 0.0);
  fftw_plan pc = fftw_plan_dft_c2r_1d(static_cast<int>(N),
                                      reinterpret_cast<fftw_complex*>(fa.data()), out.data(),
                                      FFTW_ESTIMATE);
  fftw_execute(pc);
  fftw_destroy_plan(pc);

  LatticeDistribution c;
  c.h = a.h;
  c.masses.assign(K + 1, 0.0);
  for (std::size_t k = 0; k < full; ++k) {
    double v = out[k] / static_cast<double>(N);
    if (k <= K)
      c.masses[k] = std::max(0.0, v);
    else
      c.masses[K] += 0.0;  // overflow handled by the caller via mass accounting
  }
  return c;
}

}  // namespace detail

namespace {

constexpr std::size_t kTransformThreshold = 2048;  // per-operand size switch

void finish_convolution(const LatticeDistribution& a, const LatticeDistribution& b,
                        LatticeDistribution& c) {
  // Everything not kept on the grid (overflow past K plus input tails) goes
  // to the tail; tail mean follows from exact mean additivity.
  double total = a.total_mass() * b.total_mass();
  double kept = std::accumulate(c.masses.begin(), c.masses.end(), 0.0);
  c.tail_mass = std::max(0.0, total - kept);
  double grid_mean = 0.0;
  for (std::size_t i = 0; i < c.masses.size(); ++i)
    grid_mean += static_cast<double>(i) * c.h * c.masses[i];
  c.tail_mean = std::max(0.0, a.mean() + b.mean() - grid_mean);
}

}  // namespace

LatticeDistribution convolve(const LatticeDistribution& a, const LatticeDistribution& b) {
  LatticeDistribution c;
  if (a.masses.size() > kTransformThreshold && b.masses.size() > kTransformThreshold)
    c = detail::convolve_transform(a, b);
  else
    c = detail::convolve_direct(a, b);
  finish_convolution(a, b, c);
  return c;
}

LatticeDistribution mixture(const std::vector<std::pair<double, LatticeDistribution>>& components) {
  if (components.empty()) throw std::invalid_argument("mixture: no components");
  double wsum = 0.0;
  for (const auto& [w, d] : components) {
    if (w < 0.0) throw std::invalid_argument("mixture: negative weight");
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-9) throw std::invalid_argument("mixture: weights must sum to 1");

  std::size_t K = 0;
  for (const auto& [w, d] : components) K = std::max(K, d.masses.size() - 1);
  LatticeDistribution out;
  out.h = components.front().second.h;
  out.masses.assign(K + 1, 0.0);
  for (const auto& [w, d] : components) {
    if (std::abs(d.h - out.h) > 0.0) throw std::invalid_argument("mixture: lattice step mismatch");
    for (std::size_t i = 0; i < d.masses.size(); ++i) out.masses[i] += w * d.masses[i];
    out.tail_mass += w * d.tail_mass;
    out.tail_mean += w * d.tail_mean;
  }
  if (std::abs(out.total_mass() - wsum) > 1e3 * kMassTol)
    throw std::logic_error("mixture: mass not preserved");
  return out;
}

}  // namespace divband
