#include <cmath>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "divband/config.hpp"
#include "divband/io.hpp"
#include "divband/version.hpp"

namespace {

using namespace divband;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitUnverified = 2;

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
};

RunConfig load(const CommonArgs& args) {
  RunConfig rc = load_config(args.config_path);
  std::filesystem::create_directories(args.out_dir);
  return rc;
}

std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

RunMeta meta_of(const RunConfig& rc) {
  return RunMeta{rc.config_hash, rc.model_hash, std::string(kVersion)};
}

GridSolution run_solve(const RunConfig& rc) {
  double x_max = rc.solve.x_max > 0.0 ? rc.solve.x_max : default_x_max(rc.model);
  auto K = static_cast<std::size_t>(std::llround(x_max / rc.solve.h));
  CandidatePool pool(rc.model, rc.solve.h, K);
  StateOptimizer opt(pool, rc.space);
  return solve(rc.model, opt, rc.solve);
}

// Piecewise-linear read of the policy value function; linear slope-1
// extension above the grid.
double interpolate_v(const PolicyFile& pf, double x) {
  const double h = pf.policy.h;
  const auto& v = pf.V;
  if (x <= 0.0) return v.front();
  double top = static_cast<double>(v.size() - 1) * h;
  if (x >= top) return v.back() + (x - top);
  auto i = static_cast<std::size_t>(x / h);
  double t = (x - static_cast<double>(i) * h) / h;
  return (1.0 - t) * v[i] + t * v[i + 1];
}

int check_hashes(const RunConfig& rc, const PolicyFile& pf) {
  if (pf.meta.model_hash == rc.model_hash) return kExitOk;
  std::cerr << "model hash mismatch: config model is " << rc.model_hash
            << " but the policy was solved for " << pf.meta.model_hash << "\n";
  return kExitConfig;
}

int cmd_solve(const CommonArgs& args, double h_override, double x_max_override) {
  RunConfig rc = load(args);
  if (h_override > 0.0) rc.solve.h = h_override;
  if (x_max_override > 0.0) rc.solve.x_max = x_max_override;
  GridSolution sol = run_solve(rc);
  RunMeta meta = meta_of(rc);
  write_value_function_csv(join(args.out_dir, "value_function.csv"), sol, meta);
  write_policy_json(join(args.out_dir, "policy.json"), sol, meta);
  write_residual_report_json(join(args.out_dir, "residual_report.json"), sol.residual,
                             sol.verified, meta);
  if (!rc.h_list.empty()) {
    auto rows = refine_study(rc.model, rc.space, rc.h_list, rc.solve);
    write_convergence_csv(join(args.out_dir, "convergence.csv"), rows, meta);
  }
  std::cout << "solved: " << sol.bands.levels.size() << " band(s), a1 = "
            << sol.bands.levels.front() << ", V(0) = " << sol.V.values.front()
            << ", max residual " << sol.residual.max_abs << " (tol "
            << sol.residual.tolerance << ")\n";
  return sol.verified ? kExitOk : kExitUnverified;
}

int cmd_converge(const CommonArgs& args) {
  RunConfig rc = load(args);
  if (rc.h_list.empty()) throw ConfigError("field 'solver.h_list' is required for converge");
  auto rows = refine_study(rc.model, rc.space, rc.h_list, rc.solve);
  write_convergence_csv(join(args.out_dir, "convergence.csv"), rows, meta_of(rc));
  for (const auto& r : rows)
    std::cout << "h = " << r.h << ": a1 = " << r.a1 << ", V(0) = " << r.v0
              << ", max residual " << r.max_residual << "\n";
  return kExitOk;
}

struct SimOverrides {
  std::size_t paths = 0;
  std::uint64_t seed = 0;
  double dt = 0.0;
  std::vector<double> x0;
};

int cmd_simulate(const CommonArgs& args, const std::string& policy_path,
                 const SimOverrides& ov) {
  RunConfig rc = load(args);
  if (ov.paths > 0) rc.sim.paths = ov.paths;
  if (ov.seed > 0) rc.sim.seed = ov.seed;
  if (ov.dt > 0.0) rc.sim.dt = ov.dt;
  if (!ov.x0.empty()) rc.sim_x0 = ov.x0;
  PolicyFile pf = read_policy_json(policy_path);
  if (int rcode = check_hashes(rc, pf); rcode != kExitOk) return rcode;
  if (rc.sim.paths < 1) throw ConfigError("field 'simulation.paths' must be at least 1");

  std::vector<double> x0 = rc.sim_x0.empty() ? std::vector<double>{0.0} : rc.sim_x0;
  Simulator sim(rc.model, pf.policy);
  std::vector<SimulationResult> results = sim.estimate_value(rc.sim, x0);
  std::vector<double> v_h;
  for (double x : x0) v_h.push_back(interpolate_v(pf, x));

  write_simulation_report_json(join(args.out_dir, "simulation_report.json"), results, v_h,
                               meta_of(rc));
  for (std::size_t k = 0; k < results.size(); ++k)
    std::cout << "x0 = " << results[k].x0 << ": MC " << results[k].mean_discounted_dividends
              << " +/- " << results[k].std_error << ", V_h " << v_h[k] << "\n";
  return kExitOk;
}

int cmd_verify(const CommonArgs& args, const std::string& policy_path) {
  RunConfig rc = load(args);
  PolicyFile pf = read_policy_json(policy_path);
  if (int rcode = check_hashes(rc, pf); rcode != kExitOk) return rcode;

  GridSolution sol;
  sol.h = pf.policy.h;
  sol.x_max = pf.x_max;
  sol.V.h = pf.policy.h;
  sol.V.values = pf.V;
  sol.argmin = pf.policy.specs;
  sol.bands = pf.policy;

  auto K = pf.V.size() - 1;
  CandidatePool pool(rc.model, pf.policy.h, K);
  StateOptimizer opt(pool, rc.space);
  std::vector<VerificationCheck> checks;

  // 1. HJB residual of the stored value function over the full grid.
  ResidualReport residual = hjb_residual(sol.V, opt, rc.solve.tol_factor);
  {
    VerificationCheck c;
    c.name = "hjb_residual";
    c.pass = residual.pass();
    c.margin = residual.tolerance - residual.max_abs;
    c.detail = "max |residual| " + std::to_string(residual.max_abs) + " at x = " +
               std::to_string(static_cast<double>(residual.argmax_index) * sol.h) +
               " (tolerance " + std::to_string(residual.tolerance) + ")";
    checks.push_back(c);
  }

  // 2. Growth envelope and slope >= 1.
  {
    BoundsReport bounds = check_bounds(sol.V, rc.model, pool.gross_mean());
    VerificationCheck c;
    c.name = "bounds";
    c.pass = bounds.ok();
    c.margin = bounds.ok() ? 0.0 : -static_cast<double>(bounds.violations.size());
    for (const auto& v : bounds.violations) {
      if (!c.detail.empty()) c.detail += "; ";
      c.detail += v;
    }
    if (c.pass) c.detail = "within the envelope, slope >= 1";
    checks.push_back(c);
  }

  // 3. Standing still at zero is always available, so V(0) dominates it.
  {
    double v0 = v0_closed_form(opt);
    VerificationCheck c;
    c.name = "v0_lower_bound";
    c.margin = sol.V.values.front() - v0;
    c.pass = c.margin >= -1e-9;
    c.detail = "V(0) = " + std::to_string(sol.V.values.front()) + ", stand-still value " +
               std::to_string(v0);
    checks.push_back(c);
  }

  // 4. sup Lambda vanishes at each stored barrier level.
  {
    VerificationCheck c;
    c.name = "barrier_stationarity";
    c.pass = true;
    double worst = 0.0;
    const ThinningModel& model = rc.model;
    double beta = model.beta_total();
    std::span<const double> hist(sol.V.values);
    auto sup_lambda = [&](std::size_t i) {
      double ui = sol.V.values.at(i);
      return opt
          .optimize(
              hist, i,
              [&](const CandidateView& cv) {
                return cv.p_net - (model.delta + beta) * ui + beta * cv.dot;
              },
              /*maximize=*/true)
          .value;
    };
    for (std::size_t k = 0; k < pf.policy.levels.size(); ++k) {
      std::size_t i = pf.policy.level_index(k);
      // The discrete level can sit one cell off the stationary point.
      double best = sup_lambda(i);
      for (std::size_t j : {i > 0 ? i - 1 : i, std::min(i + 1, pf.V.size() - 1)}) {
        double v = sup_lambda(j);
        if (std::abs(v) < std::abs(best)) best = v;
      }
      if (std::abs(best) > std::abs(worst)) worst = best;
      if (std::abs(best) > residual.tolerance) {
        c.pass = false;
        if (!c.detail.empty()) c.detail += "; ";
        c.detail += "level a" + std::to_string(k + 1) + " = " +
                    std::to_string(pf.policy.levels[k]) + " has sup Lambda " +
                    std::to_string(best);
      }
    }
    c.margin = residual.tolerance - std::abs(worst);
    if (c.pass) c.detail = "worst sup Lambda over levels: " + std::to_string(worst);
    checks.push_back(c);
  }

  // 5. Region partition recomputed from the value function.
  {
    VerificationCheck c;
    c.name = "partition_structure";
    try {
      BandPolicy fresh = extract_partition(sol, opt, residual.tolerance);
      c.pass = fresh.levels.size() == pf.policy.levels.size();
      double drift = 0.0;
      for (std::size_t k = 0; k < fresh.levels.size() && c.pass; ++k)
        drift = std::max(drift, std::abs(fresh.levels[k] - pf.policy.levels[k]));
      if (c.pass && drift > 2.0 * sol.h + 1e-12) c.pass = false;
      c.margin = c.pass ? 2.0 * sol.h - drift : -1.0;
      c.detail = c.pass ? std::to_string(fresh.levels.size()) + " level(s) reproduced"
                        : "recomputed partition disagrees with the stored levels";
    } catch (const std::exception& e) {
      c.pass = false;
      c.margin = -1.0;
      c.detail = e.what();
    }
    checks.push_back(c);
  }

  write_verification_report_json(join(args.out_dir, "verification_report.json"), checks,
                                 meta_of(rc));
  bool all = true;
  for (const auto& c : checks) {
    all = all && c.pass;
    std::cout << (c.pass ? "PASS" : "FAIL") << "  " << c.name << ": " << c.detail << "\n";
  }
  return all ? kExitOk : kExitUnverified;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"band-policy solver for dividend and reinsurance control"};
  app.set_version_flag("--version", std::string(divband::kVersion));
  app.set_help_flag("--help", "print help");  // frees -h/--h for the grid step
  app.require_subcommand(1);

  CommonArgs args;
  std::string policy_path;
  double h_override = 0.0, x_max_override = 0.0, dt_override = 0.0;
  std::uint64_t seed_override = 0;
  std::size_t paths_override = 0;
  std::vector<double> x0_override;

  auto add_common = [&](CLI::App* sub, bool needs_policy) {
    sub->add_option("config", args.config_path, "experiment config file")->required();
    if (needs_policy)
      sub->add_option("policy", policy_path, "policy.json from a solve run")->required();
    sub->add_option("-o,--out-dir", args.out_dir, "output directory");
  };

  CLI::App* solve_cmd = app.add_subcommand("solve", "solve and write artifacts");
  solve_cmd->set_help_flag("--help", "print help");  // frees --h for the grid step
  add_common(solve_cmd, false);
  solve_cmd->add_option("--h", h_override, "grid step override");
  solve_cmd->add_option("--x-max", x_max_override, "grid upper bound override");

  CLI::App* sim_cmd = app.add_subcommand("simulate", "Monte Carlo check of a solved policy");
  add_common(sim_cmd, true);
  sim_cmd->add_option("--paths", paths_override, "number of paths");
  sim_cmd->add_option("--seed", seed_override, "rng seed");
  sim_cmd->add_option("--dt", dt_override, "drift segment cap");
  sim_cmd->add_option("--x0", x0_override, "initial surplus values");

  CLI::App* verify_cmd = app.add_subcommand("verify", "check a solved policy against the model");
  add_common(verify_cmd, true);

  CLI::App* conv_cmd = app.add_subcommand("converge", "grid refinement study");
  add_common(conv_cmd, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(solve_cmd)) return cmd_solve(args, h_override, x_max_override);
    if (app.got_subcommand(sim_cmd))
      return cmd_simulate(args, policy_path,
                          {paths_override, seed_override, dt_override, x0_override});
    if (app.got_subcommand(verify_cmd)) return cmd_verify(args, policy_path);
    if (app.got_subcommand(conv_cmd)) return cmd_converge(args);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
