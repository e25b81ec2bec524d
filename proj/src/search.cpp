#include "divband/search.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace divband {

namespace {

// sum_{j=0..min(i,K)} g[j] * u[i-j]
double history_dot(const std::vector<double>& g, std::span<const double> u, std::size_t i) {
  std::size_t jmax = std::min(i, g.size() - 1);
  double s = 0.0;
  const double* up = u.data() + i;
  for (std::size_t j = 0; j <= jmax; ++j) s += g[j] * up[-static_cast<std::ptrdiff_t>(j)];
  return s;
}

bool better(double v, double best, bool maximize) {
  return maximize ? v > best : v < best;
}

}  // namespace

std::size_t ContractSpace::product_count() const {
  if (shared) return per_line.empty() ? 0 : per_line[0].size();
  std::size_t count = 1;
  for (const auto& g : per_line) {
    if (g.empty()) return 0;
    if (count > kCandidateCap / g.size() + 1) return kCandidateCap + 1;
    count *= g.size();
  }
  return count;
}

StateOptimizer::StateOptimizer(CandidatePool& pool, ContractSpace space)
    : pool_(pool), space_(std::move(space)) {
  if (space_.per_line.size() != pool_.model().n)
    throw std::invalid_argument("contract space must cover every line");
  enumerated_ = space_.shared || space_.product_count() <= space_.enumerate_limit;
  if (enumerated_) {
    for (auto& v : enumerate_candidates(space_.per_line, space_.shared))
      enum_tuples_.push_back(std::move(v.specs));
  }
  reset_incumbent();
}

void StateOptimizer::reset_incumbent() {
  // Start from the largest retention per line (identity-like end of the grid).
  incumbent_.clear();
  for (const auto& grid : space_.per_line) incumbent_.push_back(grid.back());
}

void StateOptimizer::set_incumbent(const std::vector<RetainedLossSpec>& specs) {
  if (specs.size() == space_.per_line.size()) incumbent_ = specs;
}

CandidateView StateOptimizer::view_of(const std::vector<RetainedLossSpec>& specs,
                                      std::span<const double> u, std::size_t i) {
  CandidateView v;
  v.p_net = pool_.candidate_premiums(specs).p_net;
  v.p_zero = pool_.p_claim_zero(specs);
  const auto& weights = pool_.subset_weights();
  double dot = 0.0;
  for (std::size_t mask = 0; mask < weights.size(); ++mask) {
    if (weights[mask] == 0.0) continue;
    dot += weights[mask] *
           history_dot(pool_.subset_law(static_cast<std::uint32_t>(mask), specs).masses, u, i);
  }
  v.dot = dot;
  return v;
}

SearchResult StateOptimizer::optimize(std::span<const double> u, std::size_t i,
                                      const Objective& obj, bool maximize) {
  if (u.size() < i + 1) throw std::invalid_argument("history must reach the evaluation index");
  return enumerated_ ? optimize_enumerated(u, i, obj, maximize)
                     : optimize_descent(u, i, obj, maximize);
}

SearchResult StateOptimizer::optimize_enumerated(std::span<const double> u, std::size_t i,
                                                 const Objective& obj, bool maximize) {
  SearchResult best;
  bool found = false;
  for (const auto& specs : enum_tuples_) {
    const AggregateLaw& law = pool_.aggregate(specs);
    PremiumTriple prem = pool_.candidate_premiums(specs);
    if (prem.p_net <= kMinNetPremium) continue;
    CandidateView view{prem.p_net, history_dot(law.dist.masses, u, i), law.p_claim_zero};
    double value = obj(view);
    if (!found || better(value, best.value, maximize)) {
      found = true;
      best.value = value;
      best.specs = specs;
      best.p_net = view.p_net;
      best.p_zero = view.p_zero;
    }
  }
  if (!found) throw std::runtime_error("no feasible reinsurance candidate (all p_net <= 0)");
  return best;
}

bool StateOptimizer::sweep_line(std::size_t l, std::span<const double> u, std::size_t i,
                                const Objective& obj, bool maximize, bool refine_pass,
                                std::vector<RetainedLossSpec>& cur, double& best_value) {
  const auto& model = pool_.model();
  const auto& weights = pool_.subset_weights();
  std::size_t n = model.n;
  std::uint32_t lbit = 1u << l;

  // Fixed-part contributions over subsets not containing line l.
  double d_fixed = 0.0;
  double p0_fixed = 0.0;
  // Combined partial law over subsets containing l, with line l's factor
  // removed: pre[v] = sum_{S ∋ l} w_S * (conv of other lines of S)[v].
  std::vector<double> pre(std::min(i, pool_.K()) + 1, 0.0);
  double p0_coeff = 0.0;
  for (std::size_t mask = 0; mask < weights.size(); ++mask) {
    double w = weights[mask];
    if (w == 0.0) continue;
    if (mask & lbit) {
      const auto& rest = pool_.subset_law(static_cast<std::uint32_t>(mask & ~lbit), cur);
      std::size_t vmax = std::min(pre.size() - 1, rest.masses.size() - 1);
      for (std::size_t v = 0; v <= vmax; ++v) pre[v] += w * rest.masses[v];
      double prod = 1.0;
      for (std::size_t z = 0; z < n; ++z)
        if (z != l && (mask >> z & 1u)) prod *= pool_.line_law(z, cur[z]).masses[0];
      p0_coeff += w * prod;
    } else {
      d_fixed += w * history_dot(pool_.subset_law(static_cast<std::uint32_t>(mask), cur).masses, u, i);
      double prod = 1.0;
      for (std::size_t z = 0; z < n; ++z)
        if (mask >> z & 1u) prod *= pool_.line_law(z, cur[z]).masses[0];
      p0_fixed += w * prod;
    }
  }

  // Y[t] = sum_v pre[v] * u[i-t-v]; candidate dot = d_fixed + <masses, Y>.
  std::size_t tmax = std::min(i, pool_.K());
  std::vector<double> Y(tmax + 1, 0.0);
  for (std::size_t t = 0; t <= tmax; ++t) {
    std::size_t vmax = std::min(pre.size() - 1, i - t);
    double s = 0.0;
    const double* up = u.data() + (i - t);
    for (std::size_t v = 0; v <= vmax; ++v) s += pre[v] * up[-static_cast<std::ptrdiff_t>(v)];
    Y[t] = s;
  }

  // Net premium pieces independent of line l.
  double beta = model.beta_total();
  double mean_fixed = 0.0;
  for (std::size_t z = 0; z < n; ++z)
    if (z != l) mean_fixed += model.line_hit_probability(z) * retained_mean(model.severities[z], cur[z]);
  double hit_l = model.line_hit_probability(l);
  double p_gross = (1.0 + model.eta) * beta * pool_.gross_mean();

  auto eval_spec = [&](const RetainedLossSpec& c, double& value, CandidateView& view) -> bool {
    const LatticeDistribution& law = pool_.line_law(l, c);
    double mean_z = mean_fixed + hit_l * retained_mean(model.severities[l], c);
    double p_net = p_gross - (1.0 + model.eta1) * beta * (pool_.gross_mean() - mean_z);
    if (p_net <= kMinNetPremium) return false;
    std::size_t tm = std::min(tmax, law.masses.size() - 1);
    double d = 0.0;
    for (std::size_t t = 0; t <= tm; ++t) d += law.masses[t] * Y[t];
    view = CandidateView{p_net, d_fixed + d, p0_fixed + p0_coeff * law.masses[0]};
    value = obj(view);
    return true;
  };

  // Candidate values for this pass: the grid, or a local refinement ladder
  // around the incumbent with the grid spacing halved twice.
  std::vector<RetainedLossSpec> trials;
  if (!refine_pass) {
    trials = space_.per_line[l];
  } else {
    auto add_param_trials = [&](auto make, double p, const std::vector<double>& grid) {
      if (!std::isfinite(p)) return;
      // Local spacing around p.
      double d = grid.size() > 1 ? grid[1] - grid[0] : 0.0;
      for (std::size_t k = 1; k < grid.size(); ++k)
        if (grid[k] >= p) { d = grid[k] - grid[k - 1]; break; }
      if (!(d > 0.0)) return;
      for (double step : {d / 2.0, d / 4.0}) {
        for (double q : {p - step, p + step}) {
          // Snap to the quarter-spacing lattice to keep the cache bounded.
          double snapped = std::round(q / (d / 4.0)) * (d / 4.0);
          if (snapped > 0.0) trials.push_back(make(snapped));
        }
      }
    };
    const RetainedLossSpec& c = cur[l];
    switch (c.family) {
      case RetainedLossSpec::Family::Proportional: {
        std::vector<double> g;
        for (const auto& s : space_.per_line[l]) g.push_back(s.b);
        add_param_trials([](double b) { return RetainedLossSpec::proportional(std::min(b, 1.0)); },
                         c.b, g);
        break;
      }
      case RetainedLossSpec::Family::XL: {
        std::vector<double> g;
        for (const auto& s : space_.per_line[l])
          if (std::isfinite(s.M)) g.push_back(s.M);
        add_param_trials([](double M) { return RetainedLossSpec::xl(M); }, c.M, g);
        break;
      }
      case RetainedLossSpec::Family::LXL: {
        std::vector<double> gm, gl;
        for (const auto& s : space_.per_line[l]) {
          if (std::isfinite(s.M)) gm.push_back(s.M);
          if (std::isfinite(s.L)) gl.push_back(s.L);
        }
        std::sort(gm.begin(), gm.end());
        gm.erase(std::unique(gm.begin(), gm.end()), gm.end());
        std::sort(gl.begin(), gl.end());
        gl.erase(std::unique(gl.begin(), gl.end()), gl.end());
        double Lfix = c.L;
        add_param_trials([Lfix](double M) { return RetainedLossSpec::lxl(M, Lfix); }, c.M, gm);
        double Mfix = c.M;
        add_param_trials([Mfix](double L) { return RetainedLossSpec::lxl(Mfix, L); }, c.L, gl);
        break;
      }
      case RetainedLossSpec::Family::Identity:
        break;
    }
  }

  bool changed = false;
  for (const auto& c : trials) {
    if (c == cur[l]) continue;
    double value;
    CandidateView view;
    if (!eval_spec(c, value, view)) continue;
    if (better(value, best_value, maximize)) {
      best_value = value;
      cur[l] = c;
      changed = true;
    }
  }
  return changed;
}

SearchResult StateOptimizer::optimize_descent(std::span<const double> u, std::size_t i,
                                              const Objective& obj, bool maximize) {
  std::vector<RetainedLossSpec> cur = incumbent_;

  auto full_value = [&](const std::vector<RetainedLossSpec>& specs, double& out) -> bool {
    CandidateView view = view_of(specs, u, i);
    if (view.p_net <= kMinNetPremium) return false;
    out = obj(view);
    return true;
  };

  double best_value;
  if (!full_value(cur, best_value)) {
    cur.assign(pool_.model().n, RetainedLossSpec::identity());
    if (!full_value(cur, best_value))
      throw std::runtime_error("no feasible reinsurance candidate (all p_net <= 0)");
  }

  for (int sweep = 0; sweep < space_.sweeps; ++sweep) {
    bool changed = false;
    for (std::size_t l = 0; l < cur.size(); ++l)
      changed |= sweep_line(l, u, i, obj, maximize, false, cur, best_value);
    if (!changed) break;
  }
  if (space_.refine) {
    for (std::size_t l = 0; l < cur.size(); ++l) sweep_line(l, u, i, obj, maximize, true, cur, best_value);
  }

  // The all-identity vector is always admissible; never return worse than it.
  std::vector<RetainedLossSpec> ident(pool_.model().n, RetainedLossSpec::identity());
  double ident_value;
  if (full_value(ident, ident_value) && better(ident_value, best_value, maximize)) {
    cur = ident;
    best_value = ident_value;
  }

  incumbent_ = cur;
  CandidateView view = view_of(cur, u, i);
  SearchResult res;
  res.value = best_value;
  res.specs = std::move(cur);
  res.p_net = view.p_net;
  res.p_zero = view.p_zero;
  return res;
}

}  // namespace divband
