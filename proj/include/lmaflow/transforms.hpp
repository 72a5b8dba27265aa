#pragma once

#include <vector>

#include "lmaflow/field.hpp"
#include "lmaflow/shrinker.hpp"

namespace lmaflow {

/// Convex-conjugate pair. The dual grid is the bounding box of the sampled
/// gradient image with the primal's node counts. For strictly quadratic
/// primals the dual is the closed form (A -> A^{-1}, c -> -c); otherwise
/// the conjugate max over nodes is sharpened by one local quadratic
/// correction inside the winning cell.
struct LegendrePair {
  PotentialField primal;
  PotentialField dual;
  bool input_convex = true;  // conjugation still runs when false, but the
                             // involution will not recover the primal
};

LegendrePair legendre(const PotentialField& u);

/// Sup over matched points of | D2u*(y) - (D2u(x))^{-1} | at y = Du(x),
/// measured at the dual node nearest the gradient image. O(h) for the
/// discrete conjugate.
double hessian_duality_error(const LegendrePair& pair);

/// Sup of | (u*)* - u | over the common domain: primal nodes within
/// `interior_fraction` of the box half-width (the clipped-argmax layer at
/// the gradient-image edge does not converge and is excluded).
double legendre_involution_error(const PotentialField& u,
                                 double interior_fraction = 0.9);

/// residual_ma evaluated on the dual potential.
ShrinkerResidualField ma_duality_residual(const LegendrePair& pair);

/// Matrix map M -> (I + M)^{-1} (M - I); eigenvalues map by
/// lambda -> (lambda - 1)/(lambda + 1). Throws when I + M is singular.
SymMat lewy_hessian_map(const SymMat& hessian);

/// Pointwise image of the gradient graph under the rotation
///   xbar = (x + Du)/sqrt(2),  Dubar = (-x + Du)/sqrt(2),
/// with the mapped Hessian from lewy_hessian_map. For convex inputs the
/// mapped Hessian eigenvalues lie in [-1, 1] and the point map is
/// injective (collisions within h/2 are flagged).
struct LewyImage {
  std::vector<std::array<double, 3>> mapped_points;
  std::vector<std::array<double, 3>> mapped_gradient;
  std::vector<SymMat> mapped_hessian;
  std::vector<std::uint8_t> valid;
  bool injective = true;
};

LewyImage lewy_rotate(const PotentialField& u);

/// | sum arctan(lambda_i) - sum arctan(lambdabar_i) - n pi/4 | for the
/// eigenvalue map above; requires every lambda_i > -1 (identity branch).
double angle_shift_error(const std::vector<double>& eigs);

/// Rotate a quadratic potential solving the arctan equation: the image
/// background is Abar = (A - I)(I + A)^{-1} with the constant forced by
/// the quadratic-solution formula; returns the image residual.
struct RotatedShrinker {
  SymMat rotated_matrix;
  double rotated_const = 0.0;
  ShrinkerResidualField residual;
};

RotatedShrinker shrinker_preservation_check(const PotentialField& u);

}  // namespace lmaflow
