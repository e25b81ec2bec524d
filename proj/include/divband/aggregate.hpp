#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <vector>

#include "divband/model.hpp"
#include "divband/reinsurance.hpp"

namespace divband {

// Law of one aggregate retained claim Z under a contract vector R.
struct AggregateLaw {
  LatticeDistribution dist;
  double p_claim_zero = 0.0;  // == dist.masses[0]
  double mean = 0.0;          // E(Z), tail-corrected
  double beta_total = 0.0;
};

struct PremiumTriple {
  double p_gross = 0.0;  // (1+eta) * beta * E(Y)
  double q_r = 0.0;      // (1+eta1) * beta * (E(Y) - E(Z))
  double p_net = 0.0;    // p_gross - q_r; must be > 0 for a usable candidate
};

// Mixture over line subsets of convolved per-line retained laws, weighted by
// line_claim_weights. The empty subset contributes an atom at 0.
AggregateLaw build_aggregate(const ThinningModel& model, const ReinsuranceVector& r,
                             double h, std::size_t K);

PremiumTriple premiums(const ThinningModel& model, const AggregateLaw& gross,
                       const AggregateLaw& net_law);

inline constexpr double kMinNetPremium = 1e-9;

// Memoized per-line pushforwards and subset convolutions for one (h, K) grid.
// The HJB sweep re-evaluates the same contracts at every grid point, so laws
// are built once per distinct spec tuple.
class CandidatePool {
 public:
  CandidatePool(const ThinningModel& model, double h, std::size_t K);

  const ThinningModel& model() const { return model_; }
  double h() const { return h_; }
  std::size_t K() const { return K_; }
  const std::vector<double>& subset_weights() const { return weights_; }

  // Law of R_z(U_z) for line z; cached per (line, spec).
  const LatticeDistribution& line_law(std::size_t z, const RetainedLossSpec& spec);

  // Convolution over the lines of `mask` of their pushforwards; cached per
  // (mask, specs restricted to mask). mask == 0 yields a point mass at 0.
  const LatticeDistribution& subset_law(std::uint32_t mask,
                                        const std::vector<RetainedLossSpec>& specs);

  // Scalar summaries needed at every candidate evaluation; no convolutions.
  double aggregate_mean(const std::vector<RetainedLossSpec>& specs);
  double p_claim_zero(const std::vector<RetainedLossSpec>& specs);
  PremiumTriple candidate_premiums(const std::vector<RetainedLossSpec>& specs);

  // Full aggregate law (for outputs and enumerated-mode dot products).
  const AggregateLaw& aggregate(const std::vector<RetainedLossSpec>& specs);

  double gross_mean() const { return gross_mean_; }  // E(Y)

 private:
  struct SpecKey;
  const ThinningModel& model_;
  double h_;
  std::size_t K_;
  std::vector<double> weights_;
  double gross_mean_ = 0.0;
  std::map<std::pair<std::size_t, std::array<double, 4>>, LatticeDistribution> line_cache_;
  std::map<std::vector<double>, LatticeDistribution> subset_cache_;
  std::map<std::vector<double>, AggregateLaw> agg_cache_;
};

}  // namespace divband
