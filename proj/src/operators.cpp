#include "divband/operators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace divband {

double GridFunction::fdiff(std::size_t i) const {
  if (i == 0 || i >= values.size()) throw std::out_of_range("fdiff needs 1 <= i < size");
  return (values[i] - values[i - 1]) / h;
}

namespace {

double history_dot(const std::vector<double>& g, const std::vector<double>& u, std::size_t i) {
  std::size_t jmax = std::min(i, g.size() - 1);
  double s = 0.0;
  for (std::size_t j = 0; j <= jmax; ++j) s += g[j] * u[i - j];
  return s;
}

}  // namespace

double L_apply(const GridFunction& u, std::size_t i, const AggregateLaw& law,
               const PremiumTriple& prem, const ThinningModel& model) {
  double beta = model.beta_total();
  return prem.p_net * u.fdiff(i) - (model.delta + beta) * u.values[i] +
         beta * history_dot(law.dist.masses, u.values, i);
}

double Lambda_apply(const GridFunction& u, std::size_t i, const AggregateLaw& law,
                    const PremiumTriple& prem, const ThinningModel& model) {
  double beta = model.beta_total();
  return prem.p_net - (model.delta + beta) * u.values[i] +
         beta * history_dot(law.dist.masses, u.values, i);
}

ResidualReport hjb_residual(const GridFunction& u, StateOptimizer& opt, double tol_factor,
                            std::size_t from_index) {
  const ThinningModel& model = opt.pool().model();
  double beta = model.beta_total();
  double umax = *std::max_element(u.values.begin(), u.values.end());

  ResidualReport report;
  report.tolerance = tol_factor * (model.delta + beta) * umax;
  if (from_index == 0) from_index = 1;

  std::span<const double> hist(u.values);
  for (std::size_t i = from_index; i < u.values.size(); ++i) {
    double slope = u.fdiff(i);
    double ui = u.values[i];
    // sup_R L_R(u)(ih) over the contract space.
    SearchResult sup = opt.optimize(
        hist, i,
        [&](const CandidateView& c) {
          return c.p_net * slope - (model.delta + beta) * ui + beta * c.dot;
        },
        /*maximize=*/true);

    ResidualPoint pt;
    pt.index = i;
    pt.sup_L = sup.value;
    pt.residual = std::max(1.0 - slope, sup.value);
    pt.arg_specs = sup.specs;
    if (std::abs(pt.residual) > report.max_abs) {
      report.max_abs = std::abs(pt.residual);
      report.argmax_index = i;
    }
    report.points.push_back(std::move(pt));
  }
  return report;
}

double v0_closed_form(StateOptimizer& opt) {
  const ThinningModel& model = opt.pool().model();
  double beta = model.beta_total();
  std::vector<double> one{1.0};
  // Standing at 0: pay the net premium as dividends; a nonzero claim ruins.
  SearchResult best = opt.optimize(
      one, 0,
      [&](const CandidateView& c) { return c.p_net / (model.delta + beta * (1.0 - c.p_zero)); },
      /*maximize=*/true);
  return best.value;
}

BoundsReport check_bounds(const GridFunction& u, const ThinningModel& model, double gross_mean) {
  BoundsReport report;
  double beta = model.beta_total();
  double lower_c = (1.0 + model.eta) * gross_mean * beta / (beta + model.delta);
  double upper_c = (1.0 + model.eta) * gross_mean * beta / model.delta;
  double slack = 2.0 * u.h;
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    double x = static_cast<double>(i) * u.h;
    if (u.values[i] < x + lower_c - slack)
      report.violations.push_back("lower bound violated at x=" + std::to_string(x));
    if (u.values[i] > x + upper_c + slack)
      report.violations.push_back("upper bound violated at x=" + std::to_string(x));
    if (i >= 1 && u.fdiff(i) < 1.0 - 1e-9)
      report.violations.push_back("slope below 1 at x=" + std::to_string(x));
    if (report.violations.size() > 32) {
      report.violations.push_back("... further violations suppressed");
      break;
    }
  }
  return report;
}

}  // namespace divband
