#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "divband/simulator.hpp"

namespace divband {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  ThinningModel model;
  ContractSpace space;
  SolveOptions solve;
  std::vector<double> h_list;  // convergence study; may be empty
  SimulationConfig sim;
  std::vector<double> sim_x0;
  std::string out_dir = ".";
  std::string config_hash;  // hash of the config file bytes
  std::string model_hash;   // hash of the canonical model serialization
};

// Flat TOML subset: [section] headers; key = number | bool | "string" |
// array (numbers/strings, one nesting level for the thinning matrix).
RunConfig load_config(const std::string& path);

std::string hash_bytes(const std::string& bytes);   // FNV-1a 64, hex
std::string model_hash(const ThinningModel& model);

}  // namespace divband
