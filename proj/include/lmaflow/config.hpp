#pragma once

#include <map>
#include <string>
#include <vector>

#include "lmaflow/small_sym.hpp"

namespace lmaflow {

/// Flat key=value configuration ('#' starts a comment, no nesting).
/// Parse errors carry line numbers.
class KeyValues {
 public:
  static KeyValues parse(const std::string& text);
  static KeyValues load(const std::string& path);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  std::string require_string(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long get_long(const std::string& key, long fallback) const;
  std::vector<double> get_doubles(const std::string& key) const;
  /// Row-major symmetric matrix of dimension n from a space-separated list.
  SymMat get_matrix(const std::string& key, int n, const SymMat& fallback) const;

  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

enum class Scenario {
  flow_decay,
  rigidity_ma,
  rigidity_sl,
  lewy_suite,
  legendre_suite,
  calabi_suite,
};

Scenario scenario_from_name(const std::string& name);
std::string scenario_name(Scenario s);

struct ExperimentConfig {
  Scenario scenario = Scenario::flow_decay;
  KeyValues params;

  static ExperimentConfig load(const std::string& path);
};

}  // namespace lmaflow
