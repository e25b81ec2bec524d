#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "divband/solver.hpp"

namespace divband {

struct SimulationConfig {
  std::size_t paths = 10000;
  double dt = 0.05;     // cap on drift-segment length between claim events
  double t_max = 0.0;   // 0: default 40/delta
  std::uint64_t seed = 1;
  double x0 = 0.0;
};

struct SimulationResult {
  double x0 = 0.0;
  double mean_discounted_dividends = 0.0;
  double std_error = 0.0;
  bool std_error_defined = true;  // false for a single path
  double ruin_fraction = 0.0;
  double mean_ruin_time_given_ruin = 0.0;
  double horizon_truncation_bound = 0.0;  // e^{-delta t_max} * residual-value bound
  std::size_t paths = 0;
  std::uint64_t seed = 0;
};

// Event-driven simulation of the controlled surplus under a band policy.
// Claims are generated at class level (class draw, Bernoulli line hits,
// per-line severities), independently of the aggregate-law code path.
class Simulator {
 public:
  Simulator(const ThinningModel& model, const BandPolicy& policy);
  ~Simulator();  // out of line: Cell is private and incomplete here

  // One path; rng_stream indexes the path's decorrelated substream.
  std::pair<double, std::optional<double>> simulate_path(const SimulationConfig& cfg,
                                                         std::uint64_t stream) const;

  SimulationResult estimate_value(const SimulationConfig& cfg) const;
  std::vector<SimulationResult> estimate_value(const SimulationConfig& cfg,
                                               const std::vector<double>& x0_list) const;

 private:
  struct Cell;  // run of grid cells sharing one contract vector
  const ThinningModel& model_;
  const BandPolicy& policy_;
  std::vector<Cell> cells_;
  std::vector<double> class_cdf_;
  double gross_mean_ = 0.0;

  std::size_t cell_at(double x) const;
};

}  // namespace divband
