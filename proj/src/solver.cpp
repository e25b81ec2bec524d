#include "divband/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace divband {

std::size_t BandPolicy::level_index(std::size_t k) const {
  return static_cast<std::size_t>(std::llround(levels.at(k) / h));
}

double default_x_max(const ThinningModel& model) {
  return 4.0 * (1.0 + model.eta) * gross_claim_mean(model) * model.beta_total() / model.delta;
}

std::pair<double, SearchResult> derivative_step(std::size_t i, std::span<const double> f,
                                                StateOptimizer& opt) {
  // f[i] must hold f((i-1)h) (explicit scheme: the atom at 0 weights the
  // one-step-back value); for i = 0 it holds the boundary value f(0).
  const ThinningModel& model = opt.pool().model();
  double beta = model.beta_total();
  double f_prev = f[i];
  SearchResult res = opt.optimize(
      f, i,
      [&](const CandidateView& c) {
        return ((model.delta + beta) * f_prev - beta * c.dot) / c.p_net;
      },
      /*maximize=*/false);
  return {res.value, res};
}

namespace {

void build_one_band_policy(GridSolution& sol, std::size_t ia) {
  BandPolicy& p = sol.bands;
  p.h = sol.h;
  p.levels = {static_cast<double>(ia) * sol.h};
  p.b_intervals = {{p.levels[0], std::numeric_limits<double>::infinity()}};
  p.region.assign(sol.V.size(), Region::C);
  p.region[ia] = Region::A;
  for (std::size_t i = ia + 1; i < p.region.size(); ++i) p.region[i] = Region::B;
  p.specs = sol.argmin;
}

}  // namespace

GridSolution solve_first_band(const ThinningModel& model, StateOptimizer& opt,
                              const SolveOptions& options) {
  double h = options.h;
  if (!(h > 0.0)) throw std::invalid_argument("h must be positive");
  double x_max = options.x_max > 0.0 ? options.x_max : default_x_max(model);
  auto K = static_cast<std::size_t>(std::llround(x_max / h));
  if (K < 2) throw std::invalid_argument("x_max too small for the grid step");

  GridSolution sol;
  sol.h = h;
  sol.x_max = x_max;
  sol.f.h = sol.fprime.h = sol.V.h = h;
  sol.f.values.assign(K + 1, 0.0);
  sol.fprime.values.assign(K + 1, 0.0);
  sol.argmin.resize(K + 1);

  auto& f = sol.f.values;
  auto& fp = sol.fprime.values;
  f[0] = 1.0;  // scale-free: V is normalized by f'(a1) below
  opt.reset_incumbent();
  for (std::size_t i = 0; i <= K; ++i) {
    if (i > 0) f[i] = f[i - 1];
    auto [deriv, res] = derivative_step(i, std::span<const double>(f.data(), i + 1), opt);
    if (deriv < -1e-12)
      throw std::logic_error("marched derivative went negative at i=" + std::to_string(i));
    fp[i] = deriv;
    sol.argmin[i] = res.specs;
    if (i > 0) f[i] = f[i - 1] + h * deriv;
  }

  std::size_t ia = static_cast<std::size_t>(
      std::min_element(fp.begin(), fp.end()) - fp.begin());  // first index on ties
  if (ia == K)
    throw std::runtime_error("f' attains its minimum on the x_max boundary: increase x_max");

  sol.V.values.assign(K + 1, 0.0);
  double norm = fp[ia];
  for (std::size_t i = 0; i <= ia; ++i) sol.V.values[i] = f[i] / norm;
  for (std::size_t i = ia + 1; i <= K; ++i)
    sol.V.values[i] = static_cast<double>(i - ia) * h + f[ia] / norm;

  build_one_band_policy(sol, ia);
  return sol;
}

void extend_bands(GridSolution& sol, StateOptimizer& opt, const SolveOptions& options) {
  const ThinningModel& model = opt.pool().model();
  std::size_t K = sol.V.size() - 1;

  for (;;) {
    std::size_t ia_last = sol.bands.level_index(sol.bands.levels.size() - 1);
    sol.residual = hjb_residual(sol.V, opt, options.tol_factor);
    // Only a violation above the last barrier calls for another band.
    double above = 0.0;
    for (const auto& pt : sol.residual.points)
      if (pt.index > ia_last) above = std::max(above, std::abs(pt.residual));
    sol.verified = sol.residual.pass();
    if (above <= sol.residual.tolerance) return;
    if (static_cast<int>(sol.bands.levels.size()) >= options.band_cap) {
      sol.verified = false;  // best effort: cap reached with a failing residual
      return;
    }

    // Branch anchored at V(b1); upper levels are slope-1 crossings, where
    // sup Lambda of the branch vanishes.
    double best_obj = -std::numeric_limits<double>::infinity();
    std::size_t best_ib = 0, best_ia = 0, best_anchor = 0;
    std::vector<double> best_f2;
    std::vector<std::vector<RetainedLossSpec>> best_specs;

    std::vector<double> f2(K + 1);
    std::vector<double> fp2(K + 1);
    std::vector<std::vector<RetainedLossSpec>> specs2(K + 1);
    for (std::size_t ib = ia_last + 1; ib + 1 <= K; ++ib) {
      std::copy(sol.V.values.begin(), sol.V.values.begin() + ib + 1, f2.begin());
      opt.set_incumbent(sol.argmin[ib]);
      for (std::size_t i = ib + 1; i <= K; ++i) {
        f2[i] = f2[i - 1];
        auto [deriv, res] = derivative_step(i, std::span<const double>(f2.data(), i + 1), opt);
        fp2[i] = deriv;
        specs2[i] = std::move(res.specs);
        f2[i] = f2[i - 1] + sol.h * deriv;
      }
      for (std::size_t k = ib + 1; k < K; ++k) {
        double d0 = fp2[k] - 1.0;
        double d1 = fp2[k + 1] - 1.0;
        if (d0 == 0.0 || d0 * d1 < 0.0) {
          double obj = f2[k] - static_cast<double>(k) * sol.h;
          if (obj > best_obj) {
            best_obj = obj;
            best_ib = ib;
            best_ia = k;
            // The level goes on whichever crossing endpoint is closer to the
            // stationary point; the value splice stays at k so V keeps
            // slope >= 1.
            best_anchor = std::abs(d1) < std::abs(d0) ? k + 1 : k;
            best_f2.assign(f2.begin(), f2.end());
            best_specs = specs2;
          }
        }
      }
    }

    if (best_f2.empty()) {
      sol.verified = false;  // no admissible (b1, a2) pair; keep the current bands
      return;
    }

    for (std::size_t i = best_ib + 1; i <= best_ia; ++i) {
      sol.V.values[i] = best_f2[i];
      sol.argmin[i] = best_specs[i];
    }
    for (std::size_t i = best_ia + 1; i <= K; ++i)
      sol.V.values[i] = static_cast<double>(i - best_ia) * sol.h + best_f2[best_ia];

    BandPolicy& p = sol.bands;
    double b1 = static_cast<double>(best_ib) * sol.h;
    double a2 = static_cast<double>(best_anchor) * sol.h;
    p.b_intervals.back().second = b1;
    p.levels.push_back(a2);
    p.b_intervals.push_back({a2, std::numeric_limits<double>::infinity()});
    for (std::size_t i = best_ib + 1; i < best_anchor; ++i) p.region[i] = Region::C;
    p.region[best_anchor] = Region::A;
    for (std::size_t i = best_anchor + 1; i <= K; ++i) p.region[i] = Region::B;
    p.specs = sol.argmin;
    (void)model;
  }
}

GridSolution solve(const ThinningModel& model, StateOptimizer& opt, const SolveOptions& options) {
  GridSolution sol = solve_first_band(model, opt, options);
  extend_bands(sol, opt, options);
  return sol;
}

BandPolicy extract_partition(const GridSolution& sol, StateOptimizer& opt, double tol) {
  const ThinningModel& model = opt.pool().model();
  double beta = model.beta_total();
  const auto& u = sol.V;
  std::size_t K = u.size() - 1;

  // Payout regions are the slope-1 runs; each one starts at its barrier
  // anchor (A), the rest of the run is B, and the strict-slope runs are C.
  // Classifying by sup Lambda directly is fragile: in a payout region the
  // operator hovers near the tolerance and flickers across it.
  std::vector<bool> payout(K + 1);
  for (std::size_t i = 1; i <= K; ++i) payout[i] = u.fdiff(i) <= 1.0 + 1e-6;
  payout[0] = payout[1];

  struct Run {
    bool payout;
    std::size_t begin, end;  // inclusive
  };
  std::vector<Run> runs;
  for (std::size_t i = 0; i <= K; ++i) {
    if (!runs.empty() && runs.back().payout == payout[i])
      runs.back().end = i;
    else
      runs.push_back({payout[i], i, i});
  }

  auto structural_error = [&](const std::string& what) {
    std::string diag = what + "; runs:";
    for (const auto& run : runs)
      diag += std::string(run.payout ? " AB[" : " C[") +
              std::to_string(static_cast<double>(run.begin) * u.h) + "," +
              std::to_string(static_cast<double>(run.end) * u.h) + "]";
    throw std::runtime_error("band structure violated: " + diag);
  };

  if (!runs.back().payout) structural_error("grid must end in a payout region");

  // sup Lambda must vanish (within tol) at or next to every anchor.
  std::span<const double> hist(u.values);
  auto sup_lambda = [&](std::size_t i) {
    double ui = u.values[i];
    return opt
        .optimize(
            hist, i,
            [&](const CandidateView& c) {
              return c.p_net - (model.delta + beta) * ui + beta * c.dot;
            },
            /*maximize=*/true)
        .value;
  };

  BandPolicy policy;
  policy.h = u.h;
  policy.region.assign(K + 1, Region::C);
  policy.specs = sol.argmin;
  for (const auto& run : runs) {
    if (!run.payout) continue;
    std::size_t anchor = run.begin;
    double lam = sup_lambda(anchor);
    if (anchor + 1 <= run.end) {
      double next = sup_lambda(anchor + 1);  // splices can land one cell early
      if (std::abs(next) < std::abs(lam)) lam = next;
    }
    if (std::abs(lam) > tol)
      structural_error("sup Lambda " + std::to_string(lam) + " at the anchor x=" +
                       std::to_string(static_cast<double>(anchor) * u.h) +
                       " exceeds tolerance " + std::to_string(tol));
    policy.region[anchor] = Region::A;
    for (std::size_t i = anchor + 1; i <= run.end; ++i) policy.region[i] = Region::B;
    policy.levels.push_back(static_cast<double>(anchor) * u.h);
    double upper = run.end == K ? std::numeric_limits<double>::infinity()
                                : static_cast<double>(run.end) * u.h;
    policy.b_intervals.push_back({policy.levels.back(), upper});
  }
  if (policy.levels.empty()) structural_error("no barrier level found");
  return policy;
}

std::vector<ConvergenceRow> refine_study(const ThinningModel& model, const ContractSpace& space,
                                         const std::vector<double>& h_list,
                                         const SolveOptions& base) {
  if (h_list.size() < 2) throw std::invalid_argument("refine_study needs at least two grid steps");
  for (std::size_t i = 1; i < h_list.size(); ++i)
    if (!(h_list[i] < h_list[i - 1]))
      throw std::invalid_argument("refine_study grid steps must be strictly decreasing");

  std::vector<ConvergenceRow> rows;
  for (double h : h_list) {
    SolveOptions options = base;
    options.h = h;
    double x_max = options.x_max > 0.0 ? options.x_max : default_x_max(model);
    CandidatePool pool(model, h, static_cast<std::size_t>(std::llround(x_max / h)));
    StateOptimizer opt(pool, space);
    GridSolution sol = solve(model, opt, options);
    ConvergenceRow row;
    row.h = h;
    row.a1 = sol.bands.levels.front();
    row.v0 = sol.V.values.front();
    row.max_residual = sol.residual.max_abs;
    rows.push_back(row);
  }
  for (std::size_t i = 2; i < rows.size(); ++i) {
    double d_prev = std::abs(rows[i - 1].a1 - rows[i - 2].a1);
    double d_cur = std::abs(rows[i].a1 - rows[i - 1].a1);
    if (d_cur > d_prev + 1e-12)
      throw std::runtime_error("barrier differences increased under refinement");
  }
  return rows;
}

}  // namespace divband
