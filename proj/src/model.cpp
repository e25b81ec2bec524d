#include "divband/model.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace divband {

SeverityLaw SeverityLaw::exponential(double rate) {
  SeverityLaw law;
  law.kind = Kind::Exponential;
  law.rate = rate;
  return law;
}

SeverityLaw SeverityLaw::empirical(double step, std::vector<double> masses) {
  SeverityLaw law;
  law.kind = Kind::EmpiricalLattice;
  law.step = step;
  law.masses = std::move(masses);
  return law;
}

double SeverityLaw::mean() const {
  if (kind == Kind::Exponential) return 1.0 / rate;
  double m = 0.0;
  for (std::size_t i = 0; i < masses.size(); ++i) m += static_cast<double>(i) * step * masses[i];
  return m;
}

double ThinningModel::beta_total() const {
  return std::accumulate(beta.begin(), beta.end(), 0.0);
}

double ThinningModel::line_hit_probability(std::size_t z) const {
  double bt = beta_total();
  double s = 0.0;
  for (std::size_t i = 0; i < m; ++i) s += beta[i] / bt * p[i][z];
  return s;
}

ValidationReport validate(const ThinningModel& model) {
  ValidationReport report;
  auto add = [&](const std::string& msg) { report.violations.push_back(msg); };

  if (model.m == 0) add("at least one event class required");
  if (model.n == 0) add("at least one line required");
  if (model.beta.size() != model.m) add("beta must have one intensity per class");
  if (model.p.size() != model.m) add("thinning matrix must have one row per class");
  if (model.severities.size() != model.n) add("one severity law per line required");

  for (std::size_t i = 0; i < model.beta.size(); ++i)
    if (!(model.beta[i] > 0.0)) add("intensity must be positive (class " + std::to_string(i + 1) + ")");
  for (std::size_t i = 0; i < model.p.size(); ++i) {
    if (model.p[i].size() != model.n) {
      add("thinning row " + std::to_string(i + 1) + " must have one entry per line");
      continue;
    }
    for (std::size_t j = 0; j < model.n; ++j) {
      double v = model.p[i][j];
      if (!(v >= 0.0 && v <= 1.0))
        add("thinning probability out of [0,1] at (" + std::to_string(i + 1) + "," +
            std::to_string(j + 1) + ")");
    }
  }
  for (std::size_t j = 0; j < model.severities.size(); ++j) {
    const SeverityLaw& law = model.severities[j];
    if (law.kind == SeverityLaw::Kind::Exponential) {
      if (!(law.rate > 0.0)) add("exponential rate must be positive (line " + std::to_string(j + 1) + ")");
    } else {
      if (!(law.step > 0.0)) add("empirical severity step must be positive (line " + std::to_string(j + 1) + ")");
      double total = 0.0;
      bool neg = false;
      for (double w : law.masses) {
        if (w < 0.0) neg = true;
        total += w;
      }
      if (neg) add("empirical severity masses must be nonnegative (line " + std::to_string(j + 1) + ")");
      if (std::abs(total - 1.0) > 1e-12)
        add("empirical severity masses must sum to 1 (line " + std::to_string(j + 1) + ")");
    }
  }
  if (!(model.eta > 0.0)) add("eta must be positive");
  if (!(model.eta1 >= model.eta)) add("eta1 >= eta required");
  if (!(model.delta > 0.0)) add("delta must be positive");

  if (report.ok()) {
    // The identity contract must have a positive net premium; with q_R = 0
    // that reduces to a positive gross premium, i.e. some line is reachable.
    double reach = 0.0;
    for (std::size_t z = 0; z < model.n; ++z)
      reach += model.line_hit_probability(z) * model.severities[z].mean();
    if (!(reach > 0.0)) add("no line receives claims: gross premium would be zero");
  }
  return report;
}

std::vector<double> line_claim_weights(const ThinningModel& model) {
  if (model.n > 20) throw std::invalid_argument("line_claim_weights: more than 20 lines");
  double bt = model.beta_total();
  std::size_t subsets = std::size_t{1} << model.n;
  std::vector<double> w(subsets, 0.0);
  for (std::size_t i = 0; i < model.m; ++i) {
    for (std::size_t mask = 0; mask < subsets; ++mask) {
      double prod = 1.0;
      for (std::size_t z = 0; z < model.n; ++z) {
        double pz = model.p[i][z];
        prod *= (mask >> z & 1u) ? pz : 1.0 - pz;
      }
      w[mask] += model.beta[i] / bt * prod;
    }
  }
  return w;
}

double gross_claim_mean(const ThinningModel& model) {
  double mu = 0.0;
  for (std::size_t z = 0; z < model.n; ++z)
    mu += model.line_hit_probability(z) * model.severities[z].mean();
  return mu;
}

}  // namespace divband
