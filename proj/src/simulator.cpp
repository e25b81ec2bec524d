#include "divband/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>
#include <stdexcept>
#include <thread>

namespace divband {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

struct Rng {
  std::mt19937_64 gen;
  explicit Rng(std::uint64_t seed, std::uint64_t stream)
      : gen(splitmix64(seed ^ splitmix64(stream))) {}
  double uniform() { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }
  double exponential(double rate) {
    double u;
    do { u = uniform(); } while (u >= 1.0);
    return -std::log1p(-u) / rate;
  }
};

double sample_severity(const SeverityLaw& law, Rng& rng) {
  if (law.kind == SeverityLaw::Kind::Exponential) return rng.exponential(law.rate);
  double u = rng.uniform();
  double c = 0.0;
  for (std::size_t i = 0; i < law.masses.size(); ++i) {
    c += law.masses[i];
    if (u < c) return static_cast<double>(i) * law.step;
  }
  return static_cast<double>(law.masses.size() - 1) * law.step;
}

double pairwise_sum(const double* v, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  std::size_t half = n / 2;
  return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

}  // namespace

// Maximal run of grid cells sharing one contract vector and net premium, so a
// drift phase crosses O(bands) boundaries instead of O(cells).
struct Simulator::Cell {
  double lo = 0.0, hi = 0.0;     // x-range [lo, hi)
  std::size_t rep = 0;           // representative grid index
  double p_net = 0.0;
};

Simulator::~Simulator() = default;

Simulator::Simulator(const ThinningModel& model, const BandPolicy& policy)
    : model_(model), policy_(policy) {
  if (policy.specs.empty() || policy.specs.size() != policy.region.size())
    throw std::invalid_argument("policy grid is empty or inconsistent");

  double beta = model.beta_total();
  class_cdf_.resize(model.m);
  double acc = 0.0;
  for (std::size_t i = 0; i < model.m; ++i) {
    acc += model.beta[i] / beta;
    class_cdf_[i] = acc;
  }
  gross_mean_ = gross_claim_mean(model);

  // Net premium per grid point from the model and the point's contracts.
  double p_gross = (1.0 + model.eta) * beta * gross_mean_;
  auto p_net_at = [&](std::size_t i) {
    double mean_z = 0.0;
    for (std::size_t z = 0; z < model.n; ++z)
      mean_z += model.line_hit_probability(z) * retained_mean(model.severities[z], policy_.specs[i][z]);
    return p_gross - (1.0 + model.eta1) * beta * (gross_mean_ - mean_z);
  };

  double h = policy_.h;
  for (std::size_t i = 0; i < policy_.specs.size(); ++i) {
    double p = p_net_at(i);
    if (!cells_.empty() && policy_.specs[i] == policy_.specs[cells_.back().rep] &&
        std::abs(p - cells_.back().p_net) < 1e-12) {
      cells_.back().hi = static_cast<double>(i + 1) * h;
    } else {
      Cell c;
      c.lo = static_cast<double>(i) * h;
      c.hi = static_cast<double>(i + 1) * h;
      c.rep = i;
      c.p_net = p;
      cells_.push_back(c);
    }
  }
}

std::size_t Simulator::cell_at(double x) const {
  // Binary search over run ranges; x is clamped into the grid.
  std::size_t lo = 0, hi = cells_.size() - 1;
  x = std::max(0.0, std::min(x, cells_.back().hi - 1e-12));
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    if (x < cells_[mid].hi)
      hi = mid;
    else
      lo = mid + 1;
  }
  return lo;
}

std::pair<double, std::optional<double>> Simulator::simulate_path(const SimulationConfig& cfg,
                                                                  std::uint64_t stream) const {
  Rng rng(cfg.seed, stream);
  const double delta = model_.delta;
  const double beta = model_.beta_total();
  const double t_max = cfg.t_max > 0.0 ? cfg.t_max : 40.0 / delta;
  const auto& levels = policy_.levels;

  double x = cfg.x0;
  double t = 0.0;
  double dividends = 0.0;

  // Lump down to the band anchor whenever the surplus sits in a payout region.
  auto settle_lumps = [&]() {
    for (;;) {
      if (x > levels.back() + 1e-12) {
        dividends += std::exp(-delta * t) * (x - levels.back());
        x = levels.back();
        return;
      }
      bool lumped = false;
      for (std::size_t k = 0; k + 1 < policy_.b_intervals.size(); ++k) {
        auto [a, b] = policy_.b_intervals[k];
        if (x > a + 1e-12 && x <= b + 1e-12) {
          dividends += std::exp(-delta * t) * (x - a);
          x = a;
          lumped = true;
          break;
        }
      }
      if (!lumped) return;
    }
  };

  // Smallest barrier level >= x (drifting up stops there).
  auto next_level_above = [&](double from) {
    for (double a : levels)
      if (a >= from - 1e-12) return a;
    return std::numeric_limits<double>::infinity();
  };

  settle_lumps();

  while (t < t_max) {
    double wait = rng.exponential(beta);
    double event_t = std::min(t + wait, t_max);
    bool event_fires = t + wait < t_max;

    // Drift (and barrier payout) until the event.
    while (t < event_t) {
      double target = next_level_above(x);
      if (std::abs(x - target) <= 1e-12) {
        // Sitting on a barrier: dividends at the local net premium rate.
        double p = cells_[cell_at(x)].p_net;
        double tau = event_t - t;
        dividends += p * (std::exp(-delta * t) - std::exp(-delta * (t + tau))) / delta;
        t = event_t;
        break;
      }
      std::size_t ci = cell_at(x);
      double p = cells_[ci].p_net;
      double stop = std::min(cells_[ci].hi, target);
      double need = (stop - x) / p;
      double step = std::min({need, event_t - t, cfg.dt});
      x += p * step;
      t += step;
      if (std::abs(x - stop) < 1e-12) x = stop;
    }
    if (!event_fires || t >= t_max) break;

    // Claim event: class draw, Bernoulli line hits, per-line severities,
    // retained per the contracts in force at the pre-jump surplus.
    double uc = rng.uniform();
    std::size_t cls = 0;
    while (cls + 1 < model_.m && uc >= class_cdf_[cls]) ++cls;
    const auto& specs = policy_.specs[std::min(
        static_cast<std::size_t>(x / policy_.h + 1e-9), policy_.specs.size() - 1)];
    double retained = 0.0;
    for (std::size_t z = 0; z < model_.n; ++z) {
      if (rng.uniform() < model_.p[cls][z])
        retained += apply(specs[z], sample_severity(model_.severities[z], rng));
    }
    x -= retained;
    if (x < 0.0) return {dividends, t};
    settle_lumps();
  }
  return {dividends, std::nullopt};
}

SimulationResult Simulator::estimate_value(const SimulationConfig& cfg) const {
  if (cfg.paths < 1) throw std::invalid_argument("paths >= 1 required");
  if (!(cfg.dt > 0.0)) throw std::invalid_argument("dt must be positive");

  std::vector<double> values(cfg.paths);
  std::vector<double> ruin_times(cfg.paths, -1.0);

  unsigned threads = 1;
  if (const char* env = std::getenv("DIVBAND_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) threads = static_cast<unsigned>(v);
  }
  auto worker = [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      auto [v, ruin] = simulate_path(cfg, k);
      values[k] = v;
      if (ruin) ruin_times[k] = *ruin;
    }
  };
  if (threads <= 1 || cfg.paths < 2 * threads) {
    worker(0, cfg.paths);
  } else {
    std::vector<std::thread> pool;
    std::size_t chunk = (cfg.paths + threads - 1) / threads;
    for (unsigned w = 0; w < threads; ++w) {
      std::size_t b = w * chunk, e = std::min(cfg.paths, b + chunk);
      if (b < e) pool.emplace_back(worker, b, e);
    }
    for (auto& th : pool) th.join();
  }

  SimulationResult res;
  res.x0 = cfg.x0;
  res.paths = cfg.paths;
  res.seed = cfg.seed;
  double n = static_cast<double>(cfg.paths);
  double mean = pairwise_sum(values.data(), values.size()) / n;
  res.mean_discounted_dividends = mean;
  if (cfg.paths > 1) {
    std::vector<double> sq(cfg.paths);
    for (std::size_t k = 0; k < cfg.paths; ++k) sq[k] = (values[k] - mean) * (values[k] - mean);
    double var = pairwise_sum(sq.data(), sq.size()) / (n - 1.0);
    res.std_error = std::sqrt(var / n);
    res.std_error_defined = true;
  } else {
    res.std_error = 0.0;
    res.std_error_defined = false;
  }
  std::size_t ruins = 0;
  double ruin_sum = 0.0;
  for (double rt : ruin_times)
    if (rt >= 0.0) { ++ruins; ruin_sum += rt; }
  res.ruin_fraction = static_cast<double>(ruins) / n;
  res.mean_ruin_time_given_ruin = ruins ? ruin_sum / static_cast<double>(ruins) : 0.0;

  double t_max = cfg.t_max > 0.0 ? cfg.t_max : 40.0 / model_.delta;
  double x_top = cells_.back().hi;
  res.horizon_truncation_bound =
      std::exp(-model_.delta * t_max) *
      (x_top + (1.0 + model_.eta) * gross_mean_ * model_.beta_total() / model_.delta);
  return res;
}

std::vector<SimulationResult> Simulator::estimate_value(const SimulationConfig& cfg,
                                                        const std::vector<double>& x0_list) const {
  std::vector<SimulationResult> out;
  for (double x0 : x0_list) {
    SimulationConfig c = cfg;
    c.x0 = x0;
    out.push_back(estimate_value(c));
  }
  return out;
}

}  // namespace divband
