#pragma once

#include <cstdlib>
#include <string>

#include "divband/config.hpp"

namespace divband::testing {

inline std::string fixture(const std::string& name) {
  const char* dir = std::getenv("DIVBAND_FIXTURES");
  return std::string(dir ? dir : "fixtures") + "/" + name;
}

// Three-line portfolio with thinning dependence across the lines.
inline ThinningModel example1_model() {
  ThinningModel m;
  m.m = 3;
  m.n = 3;
  m.beta = {8.0, 4.0, 5.0};
  m.p = {{1.0, 0.06, 0.05}, {0.03, 1.0, 0.01}, {0.007, 0.005, 1.0}};
  m.severities = {SeverityLaw::exponential(0.5), SeverityLaw::exponential(3.0),
                  SeverityLaw::exponential(2.0)};
  m.eta = 0.3;
  m.eta1 = 0.35;
  m.delta = 0.3;
  return m;
}

// Two lines, three classes; class 3 hits both lines with probability 1.
inline ThinningModel shock_model() {
  ThinningModel m;
  m.m = 3;
  m.n = 2;
  m.beta = {2.0, 3.0, 1.0};
  m.p = {{1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}};
  m.severities = {SeverityLaw::exponential(1.0), SeverityLaw::exponential(2.0)};
  m.eta = 0.3;
  m.eta1 = 0.35;
  m.delta = 0.3;
  return m;
}

// One line, exponential claims: the classical surplus process.
inline ThinningModel classical_model(double rate = 1.0, double beta = 1.0, double eta = 0.5,
                                     double delta = 0.1) {
  ThinningModel m;
  m.m = 1;
  m.n = 1;
  m.beta = {beta};
  m.p = {{1.0}};
  m.severities = {SeverityLaw::exponential(rate)};
  m.eta = eta;
  m.eta1 = eta;
  m.delta = delta;
  return m;
}

inline ContractSpace identity_space(std::size_t n) {
  ContractSpace space;
  space.per_line.assign(n, {RetainedLossSpec::identity()});
  return space;
}

}  // namespace divband::testing
