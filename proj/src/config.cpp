#include "divband/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <variant>

namespace divband {

namespace {

struct Value;
using Array = std::vector<Value>;
struct Value : std::variant<double, bool, std::string, Array> {
  using variant::variant;
};

struct Parser {
  std::string_view text;
  std::size_t pos = 0;
  int line = 1;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("config parse error at line " + std::to_string(line) + ": " + msg);
  }
  bool eof() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }
  void advance() {
    if (text[pos] == '\n') ++line;
    ++pos;
  }
  void skip_ws(bool newlines) {
    while (!eof()) {
      char c = peek();
      if (c == '#') {
        while (!eof() && peek() != '\n') advance();
      } else if (c == ' ' || c == '\t' || c == '\r' || (newlines && c == '\n')) {
        advance();
      } else {
        break;
      }
    }
  }

  Value parse_value() {
    skip_ws(false);
    if (eof()) fail("expected a value");
    char c = peek();
    if (c == '[') {
      advance();
      Array arr;
      skip_ws(true);
      while (!eof() && peek() != ']') {
        arr.push_back(parse_value());
        skip_ws(true);
        if (!eof() && peek() == ',') {
          advance();
          skip_ws(true);
        }
      }
      if (eof()) fail("unterminated array");
      advance();
      return arr;
    }
    if (c == '"') {
      advance();
      std::string s;
      while (!eof() && peek() != '"') {
        s.push_back(peek());
        advance();
      }
      if (eof()) fail("unterminated string");
      advance();
      return s;
    }
    std::string tok;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '.' ||
                      peek() == '-' || peek() == '+' || peek() == '_')) {
      tok.push_back(peek());
      advance();
    }
    if (tok == "true") return true;
    if (tok == "false") return false;
    if (tok == "inf") return std::numeric_limits<double>::infinity();
    try {
      std::size_t used = 0;
      double d = std::stod(tok, &used);
      if (used != tok.size()) fail("bad number '" + tok + "'");
      return d;
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      fail("bad value '" + tok + "'");
    }
  }
};

using Table = std::map<std::string, Value>;

Table parse_toml_subset(const std::string& text) {
  Parser p{text};
  Table table;
  std::string section;
  for (;;) {
    p.skip_ws(true);
    if (p.eof()) break;
    if (p.peek() == '[') {
      p.advance();
      section.clear();
      while (!p.eof() && p.peek() != ']') {
        section.push_back(p.peek());
        p.advance();
      }
      if (p.eof()) p.fail("unterminated section header");
      p.advance();
      continue;
    }
    std::string key;
    while (!p.eof() && (std::isalnum(static_cast<unsigned char>(p.peek())) || p.peek() == '_')) {
      key.push_back(p.peek());
      p.advance();
    }
    if (key.empty()) p.fail("expected a key");
    p.skip_ws(false);
    if (p.eof() || p.peek() != '=') p.fail("expected '=' after key '" + key + "'");
    p.advance();
    std::string full = section.empty() ? key : section + "." + key;
    table[full] = p.parse_value();
  }
  return table;
}

class ConfigReader {
 public:
  explicit ConfigReader(Table t) : table_(std::move(t)) {}

  bool has(const std::string& key) const { return table_.count(key) > 0; }

  double number(const std::string& key) const {
    const Value& v = get(key);
    if (const double* d = std::get_if<double>(&v)) return *d;
    throw ConfigError("field '" + key + "' must be a number");
  }
  double number_or(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }
  bool boolean_or(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const Value& v = get(key);
    if (const bool* b = std::get_if<bool>(&v)) return *b;
    throw ConfigError("field '" + key + "' must be true or false");
  }
  std::string str(const std::string& key) const {
    const Value& v = get(key);
    if (const std::string* s = std::get_if<std::string>(&v)) return *s;
    throw ConfigError("field '" + key + "' must be a string");
  }
  std::vector<double> numbers(const std::string& key) const {
    const Value& v = get(key);
    const Array* arr = std::get_if<Array>(&v);
    if (!arr) throw ConfigError("field '" + key + "' must be an array of numbers");
    std::vector<double> out;
    for (const Value& e : *arr) {
      const double* d = std::get_if<double>(&e);
      if (!d) throw ConfigError("field '" + key + "' must be an array of numbers");
      out.push_back(*d);
    }
    return out;
  }
  std::vector<std::string> strings(const std::string& key) const {
    const Value& v = get(key);
    const Array* arr = std::get_if<Array>(&v);
    if (!arr) throw ConfigError("field '" + key + "' must be an array of strings");
    std::vector<std::string> out;
    for (const Value& e : *arr) {
      const std::string* s = std::get_if<std::string>(&e);
      if (!s) throw ConfigError("field '" + key + "' must be an array of strings");
      out.push_back(*s);
    }
    return out;
  }
  std::vector<std::vector<double>> matrix(const std::string& key) const {
    const Value& v = get(key);
    const Array* arr = std::get_if<Array>(&v);
    if (!arr) throw ConfigError("field '" + key + "' must be an array of rows");
    std::vector<std::vector<double>> out;
    for (const Value& row : *arr) {
      const Array* r = std::get_if<Array>(&row);
      if (!r) throw ConfigError("field '" + key + "' must be an array of rows");
      std::vector<double> rv;
      for (const Value& e : *r) {
        const double* d = std::get_if<double>(&e);
        if (!d) throw ConfigError("field '" + key + "' rows must hold numbers");
        rv.push_back(*d);
      }
      out.push_back(std::move(rv));
    }
    return out;
  }

 private:
  const Value& get(const std::string& key) const {
    auto it = table_.find(key);
    if (it == table_.end()) throw ConfigError("missing required field '" + key + "'");
    return it->second;
  }
  Table table_;
};

std::vector<double> linspace(double lo, double hi, std::size_t count) {
  std::vector<double> out;
  for (std::size_t k = 0; k < count; ++k)
    out.push_back(lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(count - 1));
  return out;
}

RetainedLossSpec::Family family_from_name(const std::string& name) {
  if (name == "identity") return RetainedLossSpec::Family::Identity;
  if (name == "proportional") return RetainedLossSpec::Family::Proportional;
  if (name == "xl") return RetainedLossSpec::Family::XL;
  if (name == "lxl") return RetainedLossSpec::Family::LXL;
  throw ConfigError("unknown contract family '" + name + "'");
}

ThinningModel read_model(const ConfigReader& cfg) {
  ThinningModel model;
  model.m = static_cast<std::size_t>(cfg.number("model.classes"));
  model.n = static_cast<std::size_t>(cfg.number("model.lines"));
  model.beta = cfg.numbers("model.beta");
  model.p = cfg.matrix("model.p");
  model.eta = cfg.number("model.eta");
  model.eta1 = cfg.number("model.eta1");
  model.delta = cfg.number("model.delta");

  auto kinds = cfg.strings("model.severity_kinds");
  if (kinds.size() != model.n) throw ConfigError("model.severity_kinds must list every line");
  std::vector<double> rates;
  if (cfg.has("model.severity_rates")) rates = cfg.numbers("model.severity_rates");
  for (std::size_t z = 0; z < model.n; ++z) {
    if (kinds[z] == "exponential") {
      if (z >= rates.size())
        throw ConfigError("model.severity_rates missing a rate for line " + std::to_string(z + 1));
      model.severities.push_back(SeverityLaw::exponential(rates[z]));
    } else if (kinds[z] == "empirical") {
      std::string suffix = std::to_string(z + 1);
      auto atoms = cfg.numbers("model.severity_atoms_" + suffix);
      auto probs = cfg.numbers("model.severity_probs_" + suffix);
      if (atoms.size() != probs.size())
        throw ConfigError("model.severity_atoms_" + suffix + " and severity_probs_" + suffix +
                          " must have the same length");
      // Represent the atoms on a lattice fine enough to hold them exactly.
      double step = atoms.empty() ? 1.0 : atoms[0];
      for (double a : atoms)
        if (a > 0.0) step = std::min(step, a);
      if (!(step > 0.0)) step = 1.0;
      std::size_t K = 0;
      for (double a : atoms) K = std::max(K, static_cast<std::size_t>(std::llround(a / step)));
      std::vector<double> masses(K + 1, 0.0);
      for (std::size_t k = 0; k < atoms.size(); ++k) {
        double idx = atoms[k] / step;
        if (std::abs(idx - std::round(idx)) > 1e-9)
          throw ConfigError("model.severity_atoms_" + suffix + " must be commensurable");
        masses[static_cast<std::size_t>(std::llround(idx))] += probs[k];
      }
      model.severities.push_back(SeverityLaw::empirical(step, std::move(masses)));
    } else {
      throw ConfigError("unknown severity kind '" + kinds[z] + "'");
    }
  }
  return model;
}

ContractSpace read_contracts(const ConfigReader& cfg, const ThinningModel& model) {
  ContractSpace space;
  space.shared = cfg.boolean_or("contracts.shared", false);
  space.refine = cfg.boolean_or("contracts.refine", false);
  space.sweeps = static_cast<int>(cfg.number_or("contracts.sweeps", 3));

  std::vector<std::string> families;
  if (cfg.has("contracts.families")) {
    families = cfg.strings("contracts.families");
  } else {
    families.assign(model.n, cfg.str("contracts.family"));
  }
  if (families.size() == 1 && model.n > 1) families.assign(model.n, families[0]);
  if (families.size() != model.n) throw ConfigError("contracts.families must cover every line");

  ParameterGrid grid;
  if (cfg.has("contracts.b_grid")) {
    grid.b_grid = cfg.numbers("contracts.b_grid");
  } else if (cfg.has("contracts.b_grid_size")) {
    auto sz = static_cast<std::size_t>(cfg.number("contracts.b_grid_size"));
    grid.b_grid = linspace(1.0 / static_cast<double>(sz), 1.0, sz);
  }
  if (cfg.has("contracts.m_grid")) {
    grid.m_grid = cfg.numbers("contracts.m_grid");
  } else if (cfg.has("contracts.m_grid_size")) {
    auto sz = static_cast<std::size_t>(cfg.number("contracts.m_grid_size"));
    double hi = cfg.number("contracts.m_grid_max");
    grid.m_grid = linspace(hi / static_cast<double>(sz), hi, sz);
  }
  if (cfg.has("contracts.l_grid")) {
    grid.l_grid = cfg.numbers("contracts.l_grid");
  } else if (cfg.has("contracts.l_grid_size")) {
    auto sz = static_cast<std::size_t>(cfg.number("contracts.l_grid_size"));
    double hi = cfg.number("contracts.l_grid_max");
    grid.l_grid = linspace(hi / static_cast<double>(sz), hi, sz);
  }

  for (const std::string& fam : families)
    space.per_line.push_back(line_candidates(family_from_name(fam), grid));
  return space;
}

}  // namespace

std::string hash_bytes(const std::string& bytes) {
  std::uint64_t hash = 0xCBF29CE484222325ull;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001B3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

std::string model_hash(const ThinningModel& model) {
  std::ostringstream os;
  os.precision(17);
  os << model.m << '|' << model.n << '|';
  for (double b : model.beta) os << b << ',';
  os << '|';
  for (const auto& row : model.p) {
    for (double v : row) os << v << ',';
    os << ';';
  }
  os << '|';
  for (const auto& law : model.severities) {
    os << static_cast<int>(law.kind) << ':' << law.rate << ':' << law.step << ':';
    for (double w : law.masses) os << w << ',';
    os << ';';
  }
  os << '|' << model.eta << '|' << model.eta1 << '|' << model.delta;
  return hash_bytes(os.str());
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();

  ConfigReader cfg(parse_toml_subset(text));
  RunConfig run;
  run.model = read_model(cfg);
  ValidationReport report = validate(run.model);
  if (!report.ok()) {
    std::string msg = "invalid model:";
    for (const auto& v : report.violations) msg += "\n  - " + v;
    throw ConfigError(msg);
  }
  run.space = read_contracts(cfg, run.model);

  run.solve.h = cfg.number_or("solver.h", 0.02);
  if (!(run.solve.h > 0.0)) throw ConfigError("field 'solver.h' must be positive");
  run.solve.x_max = cfg.number_or("solver.x_max", 0.0);
  run.solve.band_cap = static_cast<int>(cfg.number_or("solver.band_cap", 8));
  run.solve.tol_factor = cfg.number_or("solver.tol_factor", 5e-3);
  if (cfg.has("solver.h_list")) run.h_list = cfg.numbers("solver.h_list");

  run.sim.paths = static_cast<std::size_t>(cfg.number_or("simulation.paths", 10000));
  run.sim.dt = cfg.number_or("simulation.dt", 0.05);
  run.sim.t_max = cfg.number_or("simulation.t_max", 0.0);
  run.sim.seed = static_cast<std::uint64_t>(cfg.number_or("simulation.seed", 1));
  if (cfg.has("simulation.x0")) run.sim_x0 = cfg.numbers("simulation.x0");
  if (!(run.sim.dt > 0.0)) throw ConfigError("field 'simulation.dt' must be positive");

  run.config_hash = hash_bytes(text);
  run.model_hash = model_hash(run.model);
  return run;
}

}  // namespace divband
