#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lmaflow/config.hpp"
#include "lmaflow/field.hpp"
#include "lmaflow/rng.hpp"

namespace lmaflow {

struct ScenarioResult {
  std::vector<std::pair<std::string, bool>> checks;
  bool all_passed() const {
    for (const auto& [name, ok] : checks)
      if (!ok) return false;
    return true;
  }
};

/// Run one named scenario, writing its trace/report files plus a
/// summary.txt with one PASS/FAIL line per check into out_dir. Outputs are
/// deterministic for a fixed config and seed.
ScenarioResult run_scenario(const ExperimentConfig& config,
                            const std::string& out_dir, std::uint64_t seed);

/// Random strictly convex potential: quadratic background with spectrum in
/// [0.6, 2.5] plus a cubic perturbation, rejection-sampled until the
/// Hessian stays above min_mu * I on the grid.
PotentialField random_convex_cubic(const GridSpec& grid, double cubic_scale,
                                   double min_mu, Xorshift64Star& rng);

}  // namespace lmaflow
