#pragma once

#include <cstdint>
#include <vector>

#include "lmaflow/grid.hpp"

namespace lmaflow {

/// Sampled symmetric derivative tensor of order 1..4.
///
/// Only canonical components (sorted index tuples) are stored, so
/// permutation symmetry holds by construction. Stencils are composed
/// per axis from second-order central first/second differences; they
/// are exact on polynomials of degree <= order + 1.
struct DerivativeTensorField {
  GridSpec grid;
  int order = 1;
  int ncomp = 0;
  int margin = 0;  // interior margin on box topology
  std::vector<std::array<int, 4>> comps;  // sorted index tuples
  std::vector<int> multiplicity;          // permutations per tuple
  std::vector<double> values;             // node-major [node*ncomp + c]
  std::vector<std::uint8_t> valid;        // per node

  double component(long node, int c) const { return values[node * ncomp + c]; }
  /// Component for an arbitrary (unsorted) index tuple.
  double component_at(long node, std::array<int, 4> idx) const;
  /// Frobenius norm squared over all n^order index combinations.
  double norm_sq(long node) const;
};

/// Canonical sorted index tuples for a symmetric order-k tensor in dim n.
std::vector<std::array<int, 4>> canonical_tuples(int dim, int order);

int tensor_interior_margin(Topology topology, int order);

/// Central-difference derivative tensors of a plain sampled scalar field.
DerivativeTensorField sample_derivatives(const GridSpec& grid,
                                         const std::vector<double>& samples,
                                         int order);

/// Sixth-order (6-point per axis) Lagrange interpolation of a sampled
/// field at an arbitrary point. Torus grids wrap; on box grids the
/// interpolation window must stay inside the grid or a std::domain_error
/// is thrown.
double interpolate_sample(const GridSpec& grid,
                          const std::vector<double>& samples,
                          const std::array<double, 3>& x);

}  // namespace lmaflow
