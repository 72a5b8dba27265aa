#include "lmaflow/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lmaflow {

KeyValues KeyValues::parse(const std::string& text) {
  KeyValues out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    // Trim.
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    line = line.substr(b, e - b + 1);
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key=value");
    auto trim = [](std::string s) {
      const auto b2 = s.find_first_not_of(" \t");
      if (b2 == std::string::npos) return std::string();
      const auto e2 = s.find_last_not_of(" \t");
      return s.substr(b2, e2 - b2 + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": empty key");
    out.kv_[key] = val;
  }
  return out;
}

KeyValues KeyValues::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

bool KeyValues::has(const std::string& key) const { return kv_.count(key) > 0; }

std::string KeyValues::get_string(const std::string& key,
                                  const std::string& fallback) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

std::string KeyValues::require_string(const std::string& key) const {
  auto it = kv_.find(key);
  if (it == kv_.end())
    throw std::invalid_argument("missing required config key '" + key + "'");
  return it->second;
}

double KeyValues::get_double(const std::string& key, double fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  try {
    size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing junk");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key +
                                "' is not a number: " + it->second);
  }
}

long KeyValues::get_long(const std::string& key, long fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  try {
    size_t pos = 0;
    const long v = std::stol(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing junk");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key +
                                "' is not an integer: " + it->second);
  }
}

std::vector<double> KeyValues::get_doubles(const std::string& key) const {
  auto it = kv_.find(key);
  std::vector<double> out;
  if (it == kv_.end()) return out;
  std::istringstream ss(it->second);
  double v;
  while (ss >> v) out.push_back(v);
  return out;
}

SymMat KeyValues::get_matrix(const std::string& key, int n,
                             const SymMat& fallback) const {
  if (!has(key)) return fallback;
  const auto vals = get_doubles(key);
  SymMat m = SymMat::zero(n);
  if (static_cast<int>(vals.size()) == n * n) {
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) m.at(i, j) = vals[i * n + j];
  } else if (static_cast<int>(vals.size()) == n) {
    for (int i = 0; i < n; ++i) m.at(i, i) = vals[i];
  } else {
    throw std::invalid_argument("config key '" + key + "' needs " +
                                std::to_string(n * n) + " (row-major) or " +
                                std::to_string(n) + " (diagonal) numbers");
  }
  return m;
}

Scenario scenario_from_name(const std::string& name) {
  if (name == "flow-decay") return Scenario::flow_decay;
  if (name == "rigidity-ma") return Scenario::rigidity_ma;
  if (name == "rigidity-sl") return Scenario::rigidity_sl;
  if (name == "lewy-suite") return Scenario::lewy_suite;
  if (name == "legendre-suite") return Scenario::legendre_suite;
  if (name == "calabi-suite") return Scenario::calabi_suite;
  throw std::invalid_argument("unknown scenario '" + name + "'");
}

std::string scenario_name(Scenario s) {
  switch (s) {
    case Scenario::flow_decay:
      return "flow-decay";
    case Scenario::rigidity_ma:
      return "rigidity-ma";
    case Scenario::rigidity_sl:
      return "rigidity-sl";
    case Scenario::lewy_suite:
      return "lewy-suite";
    case Scenario::legendre_suite:
      return "legendre-suite";
    default:
      return "calabi-suite";
  }
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  ExperimentConfig cfg;
  cfg.params = KeyValues::load(path);
  cfg.scenario = scenario_from_name(cfg.params.require_string("scenario"));
  return cfg;
}

}  // namespace lmaflow
