#pragma once

#include <utility>
#include <vector>

#include "lmaflow/field.hpp"

namespace lmaflow {

struct ShrinkerResidualField {
  std::vector<double> residual;
  std::vector<std::uint8_t> valid;
  double norm_sup = 0.0;
  double norm_l2 = 0.0;  // root mean square over valid nodes
};

/// Exact quadratic solution of det D2u = exp{n(-u + <x,Du>/2)}:
/// u = c + <x,Ax>/2 with c = -(1/n) ln det A. A must be SPD.
PotentialField quadratic_shrinker_ma(const GridSpec& grid, const SymMat& A);

/// Exact quadratic solution of sum arctan(lambda_i) = -u + <x,Du>/2:
/// u = c + <x,Ax>/2 with c = -sum_i arctan(a_i); any symmetric A.
PotentialField quadratic_shrinker_sl(const GridSpec& grid, const SymMat& A);

/// Pointwise defect det D2u - exp{n(-u + <x,Du>/2)} from stencil
/// derivatives (background handled exactly).
ShrinkerResidualField residual_ma(const PotentialField& u);

/// Pointwise defect sum arctan(lambda_i(D2u)) - (-u + <x,Du>/2).
ShrinkerResidualField residual_sl(const PotentialField& u);

struct NewtonReport {
  int iterations = 0;
  std::vector<double> residual_history;  // sup residual, incl. initial
  std::vector<double> damping_used;      // accepted step sizes in (0, 1]
  bool converged = false;
};

struct NewtonOptions {
  double tolerance = 1e-9;      // sup residual target
  int max_iterations = 50;
  double min_damping = 1.0 / 64.0;
  // Optional manufactured source s(x) added to the equation,
  // F(u) = ... - s(x) = 0; one value per grid node (interior used).
  const std::vector<double>* source = nullptr;
};

/// Damped Newton for the log-determinant form
///   F(u) = ln det D2u + n u - (n/2) <x, Du> = 0
/// on the interior of a box grid with Dirichlet values taken from
/// `boundary`. Linearization u^{ij} d_ij + n - (n/2) <x, D.>; steps are
/// backtracked (factor 1/2 down to 1/64) until the sup residual drops by
/// at least 10% and the iterate stays strictly convex.
std::pair<PotentialField, NewtonReport> newton_solve_ma(
    const GridSpec& grid, const PotentialField& boundary,
    const PotentialField& initial_guess, const NewtonOptions& opts = {});

/// Same driver for F(u) = sum arctan(lambda_i) + u - <x,Du>/2 = 0 with
/// linearization tr((I + H^2)^{-1} D2 .) + 1 - (1/2) <x, D.>; no
/// convexity requirement (the linearized operator is always elliptic).
std::pair<PotentialField, NewtonReport> newton_solve_sl(
    const GridSpec& grid, const PotentialField& boundary,
    const PotentialField& initial_guess, const NewtonOptions& opts = {});

/// Radial profile of inf over |x| in [r, r+dr) of |x|^2 mu(x), where mu is
/// the smallest Hessian eigenvalue, against the threshold 2(n-1)/n.
struct RadialProfile {
  std::vector<double> radius;     // bin midpoints
  std::vector<double> inf_value;  // inf of |x|^2 mu(x) per bin
  double threshold = 0.0;         // 2 (n-1) / n
};

RadialProfile radial_pinch_profile(const PotentialField& u, int bins = 24);

}  // namespace lmaflow
