#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "divband/aggregate.hpp"

namespace divband {

// The contract space the per-point optimization ranges over.
struct ContractSpace {
  std::vector<std::vector<RetainedLossSpec>> per_line;  // candidate list per line
  bool shared = false;
  bool refine = false;     // local refinement around the incumbent
  int sweeps = 3;          // coordinate-descent sweeps
  std::size_t enumerate_limit = 512;  // materialize laws up to this many tuples

  std::size_t product_count() const;
};

// A candidate seen through the quantities every HJB objective needs:
//   p_net  - net premium,
//   dot    - sum_{j=0..i} g[j] * u[(i-j)h] against the supplied history,
//   p_zero - P(Z = 0) under the candidate.
struct CandidateView {
  double p_net = 0.0;
  double dot = 0.0;
  double p_zero = 0.0;
};

using Objective = std::function<double(const CandidateView&)>;

struct SearchResult {
  double value = 0.0;
  std::vector<RetainedLossSpec> specs;
  double p_net = 0.0;
  double p_zero = 0.0;
};

// Optimizes an Objective over the contract space at one grid index, given the
// value-function history u[0..i]. Small spaces are enumerated with fully
// materialized aggregate laws; larger ones use warm-started coordinate
// descent per line (the objective decomposes over line subsets, so sweeping
// one line reuses the partial convolutions of the others).
class StateOptimizer {
 public:
  StateOptimizer(CandidatePool& pool, ContractSpace space);

  // u spans indices 0..i inclusive. Infeasible candidates (p_net <= 1e-9)
  // are skipped; throws if no candidate is feasible.
  SearchResult optimize(std::span<const double> u, std::size_t i, const Objective& obj,
                        bool maximize);

  // Warm start for the next call (e.g. the previous grid point's argmin).
  void set_incumbent(const std::vector<RetainedLossSpec>& specs);
  void reset_incumbent();

  bool enumerated() const { return enumerated_; }
  CandidatePool& pool() { return pool_; }
  const ContractSpace& space() const { return space_; }

 private:
  SearchResult optimize_enumerated(std::span<const double> u, std::size_t i,
                                   const Objective& obj, bool maximize);
  SearchResult optimize_descent(std::span<const double> u, std::size_t i,
                                const Objective& obj, bool maximize);
  bool sweep_line(std::size_t l, std::span<const double> u, std::size_t i, const Objective& obj,
                  bool maximize, bool refine_pass, std::vector<RetainedLossSpec>& cur,
                  double& best_value);
  CandidateView view_of(const std::vector<RetainedLossSpec>& specs, std::span<const double> u,
                        std::size_t i);

  CandidatePool& pool_;
  ContractSpace space_;
  bool enumerated_ = false;
  std::vector<std::vector<RetainedLossSpec>> enum_tuples_;
  std::vector<RetainedLossSpec> incumbent_;
};

}  // namespace divband
