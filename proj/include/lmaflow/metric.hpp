#pragma once

#include <vector>

#include "lmaflow/field.hpp"

namespace lmaflow {

/// Lagrangian phase Theta = sum_i arctan lambda_i(H).
double lagrangian_phase(const SymMat& hessian);

/// Induced metric of the gradient graph: g = I + H^2 per node, together
/// with ln det g = sum ln(1 + lambda_i^2) and the phase. g - I is always
/// positive semidefinite and ln det g >= 0.
struct InducedMetricField {
  std::vector<SymMat> g;
  std::vector<double> ln_det_g;
  std::vector<double> phase;
  std::vector<std::uint8_t> valid;
  double ln_det_g_sup = 0.0;
  double phase_min = 0.0;
  double phase_max = 0.0;
};

InducedMetricField induced_metric(const PotentialField& u);

/// Pointwise discrepancy of the algebraic identity
///   g^{ij} (ln det g)_{ij} = g^{ij} (g^{ab})_i (g_ab)_j
///                          + g^{ij} g^{ab} (g_ab)_{ij},
/// with the left side from stencils on the sampled ln det g field and the
/// right side built from derivative tensors of u (third and fourth order).
/// Holds for any potential, solution or not, up to O(h^2).
struct MetricIdentityCheck {
  std::vector<double> error;
  std::vector<std::uint8_t> valid;
  double max_error = 0.0;
};

MetricIdentityCheck ln_det_g_gradient_identity(const PotentialField& u);

}  // namespace lmaflow
