#pragma once

#include <functional>
#include <string>
#include <vector>

#include "lmaflow/grid.hpp"
#include "lmaflow/small_sym.hpp"
#include "lmaflow/tensors.hpp"

namespace lmaflow {

/// Scalar potential u(x) = c + (1/2) <x, Ax> + phi(x), with the quadratic
/// background (c, A) kept exact and only the perturbation phi sampled.
/// Derivatives split accordingly: D2u = A + D2phi, Dku = Dkphi for k >= 3.
struct PotentialField {
  GridSpec grid;
  double background_const = 0.0;
  SymMat background_matrix;
  std::vector<double> perturbation;

  double total_value(long node) const;
  std::array<double, 3> node_position(long node) const;
};

PotentialField make_quadratic(const GridSpec& grid, double c, const SymMat& A);

/// Fill the perturbation from a callable of node position.
void set_perturbation(PotentialField& u,
                      const std::function<double(const std::array<double, 3>&)>& f);

/// Named waveform presets for perturbations.
/// torus:  sine      amp * sum_a sin(k * 2 pi (x_a - o_a) / L_a)
///         sineprod  amp * prod_a sin(k * 2 pi (x_a - o_a) / L_a)
///         cosine    amp * sum_a cos(k * 2 pi (x_a - o_a) / L_a)
/// box:    same shapes in the normalized coordinate pi * xi, xi in [-1, 1],
///         plus bump: amp * prod_a (1 - xi_a^2)^2 (vanishes on the boundary).
void apply_waveform(PotentialField& u, const std::string& preset,
                    double amplitude, int wavenumber = 1);

/// Derivative tensors of the full potential (background folded into
/// orders 1 and 2; orders 3 and 4 come from the perturbation alone).
DerivativeTensorField derivative_tensors(const PotentialField& u, int order);

/// Per-node Hessians (valid mask shared with order-2 tensors).
std::vector<SymMat> hessian_field(const PotentialField& u,
                                  std::vector<std::uint8_t>& valid);
/// Per-node total gradients.
std::vector<std::array<double, 3>> gradient_field(
    const PotentialField& u, std::vector<std::uint8_t>& valid);

struct EigenRange {
  double mu_min = 0.0;  // min over nodes of smallest Hessian eigenvalue
  double mu_max = 0.0;  // max over nodes of largest Hessian eigenvalue
  std::vector<double> mu_field;  // smallest eigenvalue per node
  std::vector<std::uint8_t> valid;
};

EigenRange hessian_eigen_range(const PotentialField& u);

/// Uniform two-sided Hessian bounds lo*I <= D2u <= hi*I over all nodes.
struct HessianBounds {
  double lo = 0.0;
  double hi = 0.0;
};

struct BoundsReport {
  bool ok = false;
  double mu_min = 0.0, mu_max = 0.0;
  double slack_low = 0.0, slack_high = 0.0;  // mu_min - lo, hi - mu_max
  long worst_low_node = -1, worst_high_node = -1;
};

BoundsReport check_hessian_bounds(const PotentialField& u,
                                  const HessianBounds& bounds);

/// Snapshot file: text header (grid spec, c, A row-major) followed by
/// node-ordered phi values, one per line, lexicographic index order.
/// Values are printed with 17 significant digits and round-trip
/// bit-exactly.
void write_field_snapshot(const PotentialField& u, const std::string& path);
PotentialField read_field_snapshot(const std::string& path);

}  // namespace lmaflow
