#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "divband/search.hpp"

namespace divband {

// Function on the solve grid; derivative convention is the backward-looking
// forward difference (u(s) - u(s-h))/h, matching the marching scheme.
struct GridFunction {
  double h = 0.0;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double fdiff(std::size_t i) const;  // i >= 1
};

// L_R(u)(ih) = p_net u'(ih) - (delta+beta) u(ih) + beta sum_j u((i-j)h) g[j]
double L_apply(const GridFunction& u, std::size_t i, const AggregateLaw& law,
               const PremiumTriple& prem, const ThinningModel& model);

// Lambda_R(u)(ih) = p_net - (delta+beta) u(ih) + beta sum_j u((i-j)h) g[j]
double Lambda_apply(const GridFunction& u, std::size_t i, const AggregateLaw& law,
                    const PremiumTriple& prem, const ThinningModel& model);

struct ResidualPoint {
  std::size_t index = 0;
  double residual = 0.0;       // max(1 - u', sup_R L_R(u))
  double sup_L = 0.0;
  std::vector<RetainedLossSpec> arg_specs;
};

struct ResidualReport {
  double max_abs = 0.0;
  double tolerance = 0.0;
  std::size_t argmax_index = 0;
  std::vector<ResidualPoint> points;
  bool pass() const { return max_abs <= tolerance; }
};

// Per-point HJB residual max(1-u', sup_R L_R(u)) over the contract space.
// Tolerance is tol_factor * (delta+beta) * max u. from_index lets band
// extension look only above the last barrier.
ResidualReport hjb_residual(const GridFunction& u, StateOptimizer& opt,
                            double tol_factor, std::size_t from_index = 1);

// Value of standing still at x=0 forever: sup_R p_net / (delta + beta*(1 - P(Z=0))).
double v0_closed_form(StateOptimizer& opt);

struct BoundsReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

// x + (1+eta) mu beta/(beta+delta) <= u(x) <= x + (1+eta) mu beta/delta with
// 2h slack, and forward differences >= 1 (increasing, slope at least 1).
BoundsReport check_bounds(const GridFunction& u, const ThinningModel& model, double gross_mean);

}  // namespace divband
