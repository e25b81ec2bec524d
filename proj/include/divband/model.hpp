#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace divband {

// Claim-size law of a single line of business.
struct SeverityLaw {
  enum class Kind { Exponential, EmpiricalLattice };

  Kind kind = Kind::Exponential;
  double rate = 1.0;  // Exponential only, > 0

  // EmpiricalLattice only: masses[i] is the probability of the point i*step.
  double step = 0.0;
  std::vector<double> masses;

  static SeverityLaw exponential(double rate);
  static SeverityLaw empirical(double step, std::vector<double> masses);

  double mean() const;
};

// Multi-line risk model: m event classes, n lines. An event of class i
// produces a claim in line j independently with probability p[i][j].
struct ThinningModel {
  std::size_t m = 0;  // event classes
  std::size_t n = 0;  // lines
  std::vector<double> beta;               // m intensities, > 0
  std::vector<std::vector<double>> p;     // m x n thinning probabilities
  std::vector<SeverityLaw> severities;    // n laws
  double eta = 0.0;    // insurer safety loading
  double eta1 = 0.0;   // reinsurer safety loading, >= eta
  double delta = 0.0;  // discount rate

  double beta_total() const;

  // Probability that one event produces a claim in line z (any class).
  double line_hit_probability(std::size_t z) const;
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

ValidationReport validate(const ThinningModel& model);

// Weight of each subset S of lines: the probability that one event produces
// claims exactly in the lines of S. Indexed by bitmask (bit z = line z),
// size 2^n. Weights sum to 1.
std::vector<double> line_claim_weights(const ThinningModel& model);

// E(Y): mean of one aggregate gross claim, sum over lines of
// P(line hit) * E(severity).
double gross_claim_mean(const ThinningModel& model);

}  // namespace divband
