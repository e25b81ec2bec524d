#include "divband/aggregate.hpp"

#include <cmath>
#include <stdexcept>

namespace divband {

namespace {

std::array<double, 4> spec_key(const RetainedLossSpec& s) {
  return {static_cast<double>(s.family), s.b, s.M, s.L};
}

void append_key(std::vector<double>& key, const RetainedLossSpec& s) {
  auto k = spec_key(s);
  key.insert(key.end(), k.begin(), k.end());
}

}  // namespace

AggregateLaw build_aggregate(const ThinningModel& model, const ReinsuranceVector& r,
                             double h, std::size_t K) {
  CandidatePool pool(model, h, K);
  return pool.aggregate(r.specs);
}

PremiumTriple premiums(const ThinningModel& model, const AggregateLaw& gross,
                       const AggregateLaw& net_law) {
  double beta = model.beta_total();
  PremiumTriple t;
  t.p_gross = (1.0 + model.eta) * beta * gross.mean;
  t.q_r = (1.0 + model.eta1) * beta * (gross.mean - net_law.mean);
  t.p_net = t.p_gross - t.q_r;
  return t;
}

CandidatePool::CandidatePool(const ThinningModel& model, double h, std::size_t K)
    : model_(model), h_(h), K_(K), weights_(line_claim_weights(model)) {
  std::vector<RetainedLossSpec> ident(model.n, RetainedLossSpec::identity());
  gross_mean_ = aggregate_mean(ident);
}

const LatticeDistribution& CandidatePool::line_law(std::size_t z, const RetainedLossSpec& spec) {
  auto key = std::make_pair(z, spec_key(spec));
  auto it = line_cache_.find(key);
  if (it != line_cache_.end()) return it->second;
  LatticeDistribution base = from_severity(model_.severities[z], h_, K_);
  LatticeDistribution law = pushforward(spec, base);
  return line_cache_.emplace(std::move(key), std::move(law)).first->second;
}

const LatticeDistribution& CandidatePool::subset_law(std::uint32_t mask,
                                                     const std::vector<RetainedLossSpec>& specs) {
  std::vector<double> key{static_cast<double>(mask)};
  for (std::size_t z = 0; z < model_.n; ++z)
    if (mask >> z & 1u) append_key(key, specs[z]);
  auto it = subset_cache_.find(key);
  if (it != subset_cache_.end()) return it->second;

  LatticeDistribution law = point_mass_at_zero(h_, K_);
  for (std::size_t z = 0; z < model_.n; ++z)
    if (mask >> z & 1u) law = convolve(law, line_law(z, specs[z]));
  return subset_cache_.emplace(std::move(key), std::move(law)).first->second;
}

double CandidatePool::aggregate_mean(const std::vector<RetainedLossSpec>& specs) {
  // Means add across subset convolutions, so E(Z) needs no convolution:
  // E(Z) = sum_z P(line z hit) * E(R_z(U_z)).
  double mean = 0.0;
  for (std::size_t z = 0; z < model_.n; ++z)
    mean += model_.line_hit_probability(z) * retained_mean(model_.severities[z], specs[z]);
  return mean;
}

double CandidatePool::p_claim_zero(const std::vector<RetainedLossSpec>& specs) {
  std::size_t subsets = weights_.size();
  double p0 = 0.0;
  for (std::size_t mask = 0; mask < subsets; ++mask) {
    double w = weights_[mask];
    if (w == 0.0) continue;
    double prod = 1.0;
    for (std::size_t z = 0; z < model_.n && prod != 0.0; ++z)
      if (mask >> z & 1u) prod *= line_law(z, specs[z]).masses[0];
    p0 += w * prod;
  }
  return p0;
}

PremiumTriple CandidatePool::candidate_premiums(const std::vector<RetainedLossSpec>& specs) {
  double beta = model_.beta_total();
  PremiumTriple t;
  t.p_gross = (1.0 + model_.eta) * beta * gross_mean_;
  t.q_r = (1.0 + model_.eta1) * beta * (gross_mean_ - aggregate_mean(specs));
  t.p_net = t.p_gross - t.q_r;
  return t;
}

const AggregateLaw& CandidatePool::aggregate(const std::vector<RetainedLossSpec>& specs) {
  std::vector<double> key;
  for (const auto& s : specs) append_key(key, s);
  auto it = agg_cache_.find(key);
  if (it != agg_cache_.end()) return it->second;

  std::vector<std::pair<double, LatticeDistribution>> comps;
  std::size_t subsets = weights_.size();
  for (std::size_t mask = 0; mask < subsets; ++mask) {
    if (weights_[mask] == 0.0) continue;
    comps.emplace_back(weights_[mask], subset_law(static_cast<std::uint32_t>(mask), specs));
  }
  AggregateLaw law;
  law.dist = mixture(comps);
  law.p_claim_zero = law.dist.masses[0];
  // Exact mean, not dist.mean(): right-closed bucketing biases the lattice
  // mean by up to h/2, which would leak into the premiums.
  law.mean = aggregate_mean(specs);
  law.beta_total = model_.beta_total();
  return agg_cache_.emplace(std::move(key), std::move(law)).first->second;
}

}  // namespace divband
