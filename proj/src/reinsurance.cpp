#include "divband/reinsurance.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace divband {

RetainedLossSpec RetainedLossSpec::identity() { return {}; }

RetainedLossSpec RetainedLossSpec::proportional(double b) {
  if (!(b >= 0.0 && b <= 1.0)) throw std::invalid_argument("proportional retention b must be in [0,1]");
  RetainedLossSpec s;
  s.family = Family::Proportional;
  s.b = b;
  return s;
}

RetainedLossSpec RetainedLossSpec::xl(double M) {
  if (!(M >= 0.0)) throw std::invalid_argument("XL priority M must be nonnegative");
  RetainedLossSpec s;
  s.family = Family::XL;
  s.M = M;
  return s;
}

RetainedLossSpec RetainedLossSpec::lxl(double M, double L) {
  if (!(M >= 0.0) || !(L >= 0.0)) throw std::invalid_argument("LXL parameters must be nonnegative");
  RetainedLossSpec s;
  s.family = Family::LXL;
  s.M = M;
  s.L = L;
  return s;
}

double apply(const RetainedLossSpec& spec, double alpha) {
  switch (spec.family) {
    case RetainedLossSpec::Family::Identity:
      return alpha;
    case RetainedLossSpec::Family::Proportional:
      return spec.b * alpha;
    case RetainedLossSpec::Family::XL:
      return std::min(alpha, spec.M);
    case RetainedLossSpec::Family::LXL:
      return std::min(alpha, spec.M) + std::max(0.0, alpha - spec.M - spec.L);
  }
  return alpha;
}

double retained_mean(const SeverityLaw& law, const RetainedLossSpec& spec) {
  if (law.kind == SeverityLaw::Kind::EmpiricalLattice) {
    double m = 0.0;
    for (std::size_t k = 0; k < law.masses.size(); ++k)
      m += law.masses[k] * apply(spec, static_cast<double>(k) * law.step);
    return m;
  }
  double lam = law.rate;
  switch (spec.family) {
    case RetainedLossSpec::Family::Identity:
      return 1.0 / lam;
    case RetainedLossSpec::Family::Proportional:
      return spec.b / lam;
    case RetainedLossSpec::Family::XL:
      // E min(U, M) = (1 - e^{-lam M}) / lam
      return std::isinf(spec.M) ? 1.0 / lam : -std::expm1(-lam * spec.M) / lam;
    case RetainedLossSpec::Family::LXL: {
      if (std::isinf(spec.M)) return 1.0 / lam;
      double m = -std::expm1(-lam * spec.M) / lam;
      // E (U - M - L)^+ = e^{-lam (M+L)} / lam
      if (!std::isinf(spec.L)) m += std::exp(-lam * (spec.M + spec.L)) / lam;
      return m;
    }
  }
  return 1.0 / lam;
}

ReinsuranceVector ReinsuranceVector::all_identity(std::size_t n) {
  ReinsuranceVector v;
  v.specs.assign(n, RetainedLossSpec::identity());
  return v;
}

std::string family_name(RetainedLossSpec::Family f) {
  switch (f) {
    case RetainedLossSpec::Family::Identity: return "identity";
    case RetainedLossSpec::Family::Proportional: return "proportional";
    case RetainedLossSpec::Family::XL: return "xl";
    case RetainedLossSpec::Family::LXL: return "lxl";
  }
  return "?";
}

LatticeDistribution pushforward(const RetainedLossSpec& spec, const LatticeDistribution& base) {
  const double h = base.h;
  const std::size_t K = base.masses.size() - 1;

  switch (spec.family) {
    case RetainedLossSpec::Family::Identity:
      return base;

    case RetainedLossSpec::Family::Proportional: {
      if (spec.b == 1.0) return base;
      LatticeDistribution out;
      out.h = h;
      out.masses.assign(K + 1, 0.0);
      if (spec.b == 0.0) {
        out.masses[0] = base.total_mass();
        return out;
      }
      // Bucket (j-1)h < b*x <= jh; grid atoms of the base land by value.
      for (std::size_t i = 0; i <= K; ++i) {
        double w = base.masses[i];
        if (w == 0.0) continue;
        double y = spec.b * static_cast<double>(i) * h;
        auto j = static_cast<std::size_t>(std::ceil(y / h - 1e-9));
        out.masses[std::min(j, K)] += w;
      }
      out.tail_mass = base.tail_mass;
      out.tail_mean = spec.b * base.tail_mean;
      return out;
    }

    case RetainedLossSpec::Family::XL: {
      if (std::isinf(spec.M)) return base;
      LatticeDistribution out;
      out.h = h;
      out.masses.assign(K + 1, 0.0);
      // Atom at the lattice point nearest M keeps candidates on one grid.
      auto jm = static_cast<std::size_t>(std::llround(spec.M / h));
      jm = std::min(jm, K);
      for (std::size_t i = 0; i <= K; ++i) {
        double w = base.masses[i];
        if (w == 0.0) continue;
        out.masses[std::min(i, jm)] += w;
      }
      out.masses[jm] += base.tail_mass;
      return out;
    }

    case RetainedLossSpec::Family::LXL: {
      if (std::isinf(spec.M)) return base;
      LatticeDistribution out;
      out.h = h;
      out.masses.assign(K + 1, 0.0);
      auto jm = static_cast<std::size_t>(std::llround(spec.M / h));
      jm = std::min(jm, K);
      if (std::isinf(spec.L)) {
        for (std::size_t i = 0; i <= K; ++i) {
          double w = base.masses[i];
          if (w == 0.0) continue;
          out.masses[std::min(i, jm)] += w;
        }
        out.masses[jm] += base.tail_mass;
        return out;
      }
      auto jl = static_cast<std::size_t>(std::llround(spec.L / h));
      for (std::size_t i = 0; i <= K; ++i) {
        double w = base.masses[i];
        if (w == 0.0) continue;
        if (i <= jm + jl) {
          out.masses[std::min(i, jm)] += w;  // (M, M+L] pays M
        } else {
          out.masses[std::min(i - jl, K)] += w;  // beyond M+L shifted down by L
        }
      }
      // Base tail sits beyond M+L for any K*h >= M+L; shift it down by L.
      out.tail_mass = base.tail_mass;
      out.tail_mean = std::max(0.0, base.tail_mean - spec.L * base.tail_mass);
      return out;
    }
  }
  return base;
}

std::vector<RetainedLossSpec> line_candidates(RetainedLossSpec::Family family,
                                              const ParameterGrid& grid) {
  std::vector<RetainedLossSpec> out;
  switch (family) {
    case RetainedLossSpec::Family::Identity:
      out.push_back(RetainedLossSpec::identity());
      break;
    case RetainedLossSpec::Family::Proportional: {
      if (grid.b_grid.empty()) throw std::invalid_argument("proportional family needs a b grid");
      for (double b : grid.b_grid) out.push_back(RetainedLossSpec::proportional(b));
      break;
    }
    case RetainedLossSpec::Family::XL: {
      if (grid.m_grid.empty()) throw std::invalid_argument("XL family needs an M grid");
      for (double M : grid.m_grid) out.push_back(RetainedLossSpec::xl(M));
      if (grid.include_no_cap) out.push_back(RetainedLossSpec::xl(kNoCap));
      break;
    }
    case RetainedLossSpec::Family::LXL: {
      if (grid.m_grid.empty() || grid.l_grid.empty())
        throw std::invalid_argument("LXL family needs M and L grids");
      for (double M : grid.m_grid)
        for (double L : grid.l_grid) out.push_back(RetainedLossSpec::lxl(M, L));
      if (grid.include_no_cap) out.push_back(RetainedLossSpec::lxl(kNoCap, kNoCap));
      break;
    }
  }
  if (out.empty()) throw std::invalid_argument("empty candidate grid");
  for (const auto& g : {grid.b_grid, grid.m_grid, grid.l_grid})
    if (!std::is_sorted(g.begin(), g.end())) throw std::invalid_argument("candidate grids must be ascending");
  return out;
}

std::vector<ReinsuranceVector> enumerate_candidates(
    const std::vector<std::vector<RetainedLossSpec>>& per_line, bool shared) {
  if (per_line.empty()) throw std::invalid_argument("no lines");
  std::size_t n = per_line.size();
  std::vector<ReinsuranceVector> out;

  if (shared) {
    for (std::size_t j = 1; j < n; ++j)
      if (per_line[j] != per_line[0])
        throw std::invalid_argument("shared mode requires identical per-line grids");
    if (per_line[0].size() > kCandidateCap) throw std::invalid_argument("candidate count over cap");
    for (const auto& spec : per_line[0]) {
      ReinsuranceVector v;
      v.shared = true;
      v.specs.assign(n, spec);
      out.push_back(std::move(v));
    }
  } else {
    std::size_t count = 1;
    for (const auto& g : per_line) {
      if (g.empty()) throw std::invalid_argument("empty per-line grid");
      if (count > kCandidateCap / g.size() + 1) throw std::invalid_argument("candidate count over cap");
      count *= g.size();
    }
    if (count > kCandidateCap) throw std::invalid_argument("candidate count over cap");
    std::vector<std::size_t> idx(n, 0);
    for (;;) {
      ReinsuranceVector v;
      for (std::size_t z = 0; z < n; ++z) v.specs.push_back(per_line[z][idx[z]]);
      out.push_back(std::move(v));
      std::size_t z = 0;
      while (z < n && ++idx[z] == per_line[z].size()) idx[z++] = 0;
      if (z == n) break;
    }
  }

  ReinsuranceVector ident = ReinsuranceVector::all_identity(n);
  bool has_ident = false;
  for (const auto& v : out)
    if (v.specs == ident.specs) { has_ident = true; break; }
  if (!has_ident) out.push_back(std::move(ident));
  return out;
}

}  // namespace divband
