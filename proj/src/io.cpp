#include "divband/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace divband {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// JSON has no infinity; round-trip it as the string "inf".
json num(double v) {
  if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
  return json(v);
}

double num_back(const json& j) {
  if (j.is_string()) {
    const std::string& s = j.get_ref<const std::string&>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw std::runtime_error("unexpected string number '" + s + "'");
  }
  return j.get<double>();
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // LF endings everywhere
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  return out;
}

void csv_meta(std::ofstream& out, const RunMeta& meta) {
  out << "# config_hash=" << meta.config_hash << "\n"
      << "# model_hash=" << meta.model_hash << "\n"
      << "# version=" << meta.version << "\n";
}

json meta_json(const RunMeta& meta) {
  return json{{"config_hash", meta.config_hash},
              {"model_hash", meta.model_hash},
              {"version", meta.version}};
}

json spec_json(const RetainedLossSpec& s) {
  json j{{"family", family_name(s.family)}};
  switch (s.family) {
    case RetainedLossSpec::Family::Identity: break;
    case RetainedLossSpec::Family::Proportional: j["b"] = num(s.b); break;
    case RetainedLossSpec::Family::XL: j["M"] = num(s.M); break;
    case RetainedLossSpec::Family::LXL: j["M"] = num(s.M); j["L"] = num(s.L); break;
  }
  return j;
}

RetainedLossSpec spec_back(const json& j) {
  const std::string fam = j.at("family").get<std::string>();
  if (fam == "identity") return RetainedLossSpec::identity();
  if (fam == "proportional") return RetainedLossSpec::proportional(num_back(j.at("b")));
  if (fam == "xl") return RetainedLossSpec::xl(num_back(j.at("M")));
  if (fam == "lxl") return RetainedLossSpec::lxl(num_back(j.at("M")), num_back(j.at("L")));
  throw std::runtime_error("unknown contract family '" + fam + "'");
}

void dump(const std::string& path, const json& j) {
  std::ofstream out = open_out(path);
  out << j.dump(2) << "\n";
}

}  // namespace

void write_value_function_csv(const std::string& path, const GridSolution& sol,
                              const RunMeta& meta) {
  std::ofstream out = open_out(path);
  csv_meta(out, meta);

  const std::size_t n_lines = sol.argmin.empty() ? 0 : sol.argmin.front().size();
  out << "x,f,fprime,V,residual";
  for (std::size_t k = 0; k < n_lines; ++k)
    out << ",line" << k << "_family,line" << k << "_b,line" << k << "_M,line" << k << "_L";
  out << "\n";

  std::vector<double> residual(sol.V.size(), std::numeric_limits<double>::quiet_NaN());
  for (const ResidualPoint& p : sol.residual.points)
    if (p.index < residual.size()) residual[p.index] = p.residual;

  for (std::size_t i = 0; i < sol.V.size(); ++i) {
    out << fmt(static_cast<double>(i) * sol.h) << ',' << fmt(sol.f.values[i]) << ','
        << fmt(sol.fprime.values[i]) << ',' << fmt(sol.V.values[i]) << ',' << fmt(residual[i]);
    for (std::size_t k = 0; k < n_lines; ++k) {
      const RetainedLossSpec& s = sol.argmin[i][k];
      out << ',' << family_name(s.family) << ',' << fmt(s.b) << ',' << fmt(s.M) << ','
          << fmt(s.L);
    }
    out << "\n";
  }
}

void write_policy_json(const std::string& path, const GridSolution& sol, const RunMeta& meta) {
  const BandPolicy& bp = sol.bands;
  json j;
  j["meta"] = meta_json(meta);
  j["h"] = num(bp.h);
  j["x_max"] = num(sol.x_max);
  j["verified"] = sol.verified;

  json levels = json::array();
  for (double a : bp.levels) levels.push_back(num(a));
  j["levels"] = levels;

  json intervals = json::array();
  for (auto [lo, hi] : bp.b_intervals) intervals.push_back(json::array({num(lo), num(hi)}));
  j["b_intervals"] = intervals;

  std::string region(bp.region.size(), 'C');
  for (std::size_t i = 0; i < bp.region.size(); ++i)
    region[i] = static_cast<char>(bp.region[i]);
  j["region"] = region;

  // Contracts run-compressed over the grid.
  json runs = json::array();
  std::size_t i = 0;
  while (i < bp.specs.size()) {
    std::size_t e = i + 1;
    while (e < bp.specs.size() && bp.specs[e] == bp.specs[i]) ++e;
    json specs = json::array();
    for (const RetainedLossSpec& s : bp.specs[i]) specs.push_back(spec_json(s));
    runs.push_back(json{{"count", e - i}, {"specs", specs}});
    i = e;
  }
  j["contract_runs"] = runs;

  json v = json::array();
  for (double x : sol.V.values) v.push_back(num(x));
  j["V"] = v;

  dump(path, j);
}

PolicyFile read_policy_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open policy file '" + path + "'");
  json j = json::parse(in);

  PolicyFile file;
  file.meta.config_hash = j.at("meta").at("config_hash").get<std::string>();
  file.meta.model_hash = j.at("meta").at("model_hash").get<std::string>();
  file.meta.version = j.at("meta").at("version").get<std::string>();
  file.x_max = num_back(j.at("x_max"));

  BandPolicy& bp = file.policy;
  bp.h = num_back(j.at("h"));
  for (const json& a : j.at("levels")) bp.levels.push_back(num_back(a));
  for (const json& iv : j.at("b_intervals"))
    bp.b_intervals.emplace_back(num_back(iv.at(0)), num_back(iv.at(1)));
  const std::string region = j.at("region").get<std::string>();
  bp.region.reserve(region.size());
  for (char c : region) bp.region.push_back(static_cast<Region>(c));
  for (const json& run : j.at("contract_runs")) {
    std::vector<RetainedLossSpec> specs;
    for (const json& s : run.at("specs")) specs.push_back(spec_back(s));
    std::size_t count = run.at("count").get<std::size_t>();
    for (std::size_t k = 0; k < count; ++k) bp.specs.push_back(specs);
  }
  if (bp.specs.size() != bp.region.size())
    throw std::runtime_error("policy file is inconsistent: contract runs do not cover the grid");
  for (const json& v : j.at("V")) file.V.push_back(num_back(v));
  if (file.V.size() != bp.region.size())
    throw std::runtime_error("policy file is inconsistent: V does not cover the grid");
  return file;
}

void write_residual_report_json(const std::string& path, const ResidualReport& report,
                                bool verified, const RunMeta& meta) {
  json j;
  j["meta"] = meta_json(meta);
  j["max_abs"] = num(report.max_abs);
  j["tolerance"] = num(report.tolerance);
  j["argmax_index"] = report.argmax_index;
  j["pass"] = report.pass();
  j["verified"] = verified;

  json violations = json::array();
  for (const ResidualPoint& p : report.points) {
    if (std::abs(p.residual) <= report.tolerance) continue;
    violations.push_back(json{{"index", p.index}, {"residual", num(p.residual)}});
    if (violations.size() >= 32) break;
  }
  j["violations"] = violations;
  dump(path, j);
}

void write_convergence_csv(const std::string& path, const std::vector<ConvergenceRow>& rows,
                           const RunMeta& meta) {
  std::ofstream out = open_out(path);
  csv_meta(out, meta);
  out << "h,a1,v0,max_residual\n";
  for (const ConvergenceRow& r : rows)
    out << fmt(r.h) << ',' << fmt(r.a1) << ',' << fmt(r.v0) << ',' << fmt(r.max_residual)
        << "\n";
}

void write_simulation_report_json(const std::string& path,
                                  const std::vector<SimulationResult>& results,
                                  const std::vector<double>& v_h, const RunMeta& meta) {
  json j;
  j["meta"] = meta_json(meta);
  json arr = json::array();
  for (std::size_t k = 0; k < results.size(); ++k) {
    const SimulationResult& r = results[k];
    json e{{"x0", num(r.x0)},
           {"mean_discounted_dividends", num(r.mean_discounted_dividends)},
           {"std_error", num(r.std_error)},
           {"std_error_defined", r.std_error_defined},
           {"ruin_fraction", num(r.ruin_fraction)},
           {"mean_ruin_time_given_ruin", num(r.mean_ruin_time_given_ruin)},
           {"horizon_truncation_bound", num(r.horizon_truncation_bound)},
           {"paths", r.paths},
           {"seed", r.seed}};
    if (k < v_h.size()) {
      e["v_h"] = num(v_h[k]);
      e["abs_diff"] = num(std::abs(r.mean_discounted_dividends - v_h[k]));
    }
    arr.push_back(e);
  }
  j["results"] = arr;
  dump(path, j);
}

void write_verification_report_json(const std::string& path,
                                    const std::vector<VerificationCheck>& checks,
                                    const RunMeta& meta) {
  json j;
  j["meta"] = meta_json(meta);
  bool all = true;
  json arr = json::array();
  for (const VerificationCheck& c : checks) {
    all = all && c.pass;
    arr.push_back(json{{"name", c.name},
                       {"pass", c.pass},
                       {"margin", num(c.margin)},
                       {"detail", c.detail}});
  }
  j["checks"] = arr;
  j["all_pass"] = all;
  dump(path, j);
}

}  // namespace divband
