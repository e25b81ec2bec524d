#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "divband/lattice.hpp"

namespace divband {

inline constexpr double kNoCap = std::numeric_limits<double>::infinity();

// Retained-loss function for one line. The reinsurer covers alpha - R(alpha).
struct RetainedLossSpec {
  enum class Family { Identity, Proportional, XL, LXL };

  Family family = Family::Identity;
  double b = 1.0;      // Proportional: retained fraction, in [0,1]
  double M = kNoCap;   // XL / LXL priority
  double L = kNoCap;   // LXL limit

  static RetainedLossSpec identity();
  static RetainedLossSpec proportional(double b);
  static RetainedLossSpec xl(double M);
  static RetainedLossSpec lxl(double M, double L);

  bool operator==(const RetainedLossSpec&) const = default;
};

double apply(const RetainedLossSpec& spec, double alpha);

// Exact E[R(U)] for U ~ law. Premiums must not pick up the O(h) bias of the
// lattice bucketing, so this never goes through a LatticeDistribution.
double retained_mean(const SeverityLaw& law, const RetainedLossSpec& spec);

// One retained-loss function per line. When shared is true all entries are
// identical (one contract applied to every line).
struct ReinsuranceVector {
  std::vector<RetainedLossSpec> specs;
  bool shared = false;

  static ReinsuranceVector all_identity(std::size_t n);
  bool operator==(const ReinsuranceVector&) const = default;
};

// Law of R(U) for U ~ base, on the same grid. XL moves the survival mass
// above M to an atom at round(M/h)*h so every candidate stays on one lattice.
LatticeDistribution pushforward(const RetainedLossSpec& spec, const LatticeDistribution& base);

// Candidate grids for the per-point contract optimization.
struct ParameterGrid {
  std::vector<double> b_grid;  // proportional retention levels
  std::vector<double> m_grid;  // XL/LXL priorities (kNoCap appended separately)
  std::vector<double> l_grid;  // LXL limits
  bool include_no_cap = true;  // append the "no cap" sentinel to m/l grids
};

// Per-line candidate spec list for a family and grid.
std::vector<RetainedLossSpec> line_candidates(RetainedLossSpec::Family family,
                                              const ParameterGrid& grid);

inline constexpr std::size_t kCandidateCap = 200000;

// Cartesian product across lines (shared=false) or the common-parameter list
// (shared=true). Always contains the all-Identity vector. Throws if the
// product exceeds kCandidateCap.
std::vector<ReinsuranceVector> enumerate_candidates(
    const std::vector<std::vector<RetainedLossSpec>>& per_line, bool shared);

std::string family_name(RetainedLossSpec::Family f);

}  // namespace divband
