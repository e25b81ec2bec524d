#pragma once

#include <string>
#include <vector>

#include "divband/config.hpp"

namespace divband {

// Stamped into every output file.
struct RunMeta {
  std::string config_hash;
  std::string model_hash;
  std::string version;
};

void write_value_function_csv(const std::string& path, const GridSolution& sol,
                              const RunMeta& meta);
void write_policy_json(const std::string& path, const GridSolution& sol, const RunMeta& meta);
void write_residual_report_json(const std::string& path, const ResidualReport& report,
                                bool verified, const RunMeta& meta);
void write_convergence_csv(const std::string& path, const std::vector<ConvergenceRow>& rows,
                           const RunMeta& meta);
void write_simulation_report_json(const std::string& path,
                                  const std::vector<SimulationResult>& results,
                                  const std::vector<double>& v_h, const RunMeta& meta);

struct VerificationCheck {
  std::string name;
  bool pass = false;
  double margin = 0.0;  // distance to the tolerance, >= 0 means pass
  std::string detail;
};

void write_verification_report_json(const std::string& path,
                                    const std::vector<VerificationCheck>& checks,
                                    const RunMeta& meta);

struct PolicyFile {
  BandPolicy policy;
  std::vector<double> V;  // value function on the policy grid
  double x_max = 0.0;
  RunMeta meta;
};

PolicyFile read_policy_json(const std::string& path);

}  // namespace divband
