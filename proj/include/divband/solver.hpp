#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "divband/operators.hpp"

namespace divband {

// Dividend regions: pay at the premium rate on the levels of A, lump down to
// the band anchor on B, accumulate on C.
enum class Region : char { A = 'A', B = 'B', C = 'C' };

struct BandPolicy {
  double h = 0.0;
  std::vector<double> levels;                         // A, ascending
  std::vector<std::pair<double, double>> b_intervals; // B components; inf upper on last
  std::vector<Region> region;                         // per grid point
  std::vector<std::vector<RetainedLossSpec>> specs;   // per grid point contract vector

  std::size_t level_index(std::size_t k) const;  // grid index of levels[k]
};

struct GridSolution {
  double h = 0.0;
  double x_max = 0.0;
  GridFunction f;
  GridFunction fprime;
  GridFunction V;
  std::vector<std::vector<RetainedLossSpec>> argmin;  // per grid point
  BandPolicy bands;
  ResidualReport residual;
  bool verified = false;  // residual passed within the band cap
};

struct SolveOptions {
  double h = 0.02;
  double x_max = 0.0;        // 0: default 4*(1+eta)*mu*beta/delta
  int band_cap = 8;
  double tol_factor = 5e-3;  // residual tolerance = tol_factor*(delta+beta)*max V
};

// One derivative step of the march: the infimum over contracts of
// [(delta+beta) f((i-1)h) - beta G_R(ih)] / p_net, where G_R dots the
// aggregate masses against the f history with the atom at 0 applied to
// f((i-1)h) (explicit scheme).
std::pair<double, SearchResult> derivative_step(std::size_t i, std::span<const double> f,
                                                StateOptimizer& opt);

// Marches f to x_max, places the first barrier at the argmin of f', and
// normalizes V = f / f'(a1) below the barrier, slope 1 above. Throws if the
// argmin sits on the x_max boundary.
GridSolution solve_first_band(const ThinningModel& model, StateOptimizer& opt,
                              const SolveOptions& options);

// While the HJB residual fails above the last barrier, re-marches a branch
// anchored at V(b1) for every b1 above the barrier; candidate upper levels a2
// are the points where the marched slope crosses 1 (sup Lambda = 0 there),
// and the pair maximizing f2(a2) - a2 is spliced in. Gives up at band_cap.
void extend_bands(GridSolution& sol, StateOptimizer& opt, const SolveOptions& options);

GridSolution solve(const ThinningModel& model, StateOptimizer& opt, const SolveOptions& options);

// Classifies grid points by sup Lambda and the forward difference into the
// (A, B, C) partition and checks its structure (A finite nonempty, each B
// component anchored by an A level, last B component unbounded).
BandPolicy extract_partition(const GridSolution& sol, StateOptimizer& opt, double tol);

struct ConvergenceRow {
  double h = 0.0;
  double a1 = 0.0;
  double v0 = 0.0;
  double max_residual = 0.0;
};

// Re-solves on each grid and reports (h, a1, V(0), max residual). h_list must
// be strictly decreasing with at least two entries.
std::vector<ConvergenceRow> refine_study(const ThinningModel& model, const ContractSpace& space,
                                         const std::vector<double>& h_list,
                                         const SolveOptions& base);

double default_x_max(const ThinningModel& model);

}  // namespace divband
