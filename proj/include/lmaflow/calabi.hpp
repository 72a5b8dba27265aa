#pragma once

#include <vector>

#include "lmaflow/field.hpp"
#include "lmaflow/flow.hpp"

namespace lmaflow {

/// Dense symmetric third-derivative tensor at one node (n <= 3).
struct Tensor3 {
  int n = 1;
  double v[3][3][3] = {};
};

Tensor3 tensor3_at(const DerivativeTensorField& t3, long node);
/// Pull back under an orthogonal change of frame: T~_abc = Q_ia Q_jb Q_kc T_ijk.
Tensor3 rotate_tensor3(const Tensor3& t, const double q[3][3]);
double tensor3_norm_sq(const Tensor3& t);

/// sigma = u^{kl} u^{pq} u^{rs} u_{kpr} u_{lqs}: the squared third
/// derivatives measured in the Hessian metric. Zero exactly on quadratics.
double calabi_sigma(const SymMat& hessian, const Tensor3& t);

struct CalabiSample {
  double sigma = 0.0;
  double quantity_a = 0.0;
  double quantity_b = 0.0;
};

/// sigma together with the auxiliary contractions A and B evaluated in the
/// Hessian eigenbasis. Satisfies B >= A and n B >= sigma^2 pointwise.
CalabiSample calabi_abq(const SymMat& hessian, const Tensor3& t);

struct SigmaField {
  std::vector<double> values;
  std::vector<std::uint8_t> valid;
  double sup = 0.0;
};

SigmaField sigma_field(const PotentialField& u);

struct CalabiField {
  std::vector<CalabiSample> samples;
  std::vector<std::uint8_t> valid;
};

CalabiField ab_quantities(const PotentialField& u);

/// Explicit ODE barrier sigma0 / (1 + sigma0 t / (2 n^2)), nonincreasing
/// in t; dominates sup sigma along the flow.
double sigma_supersolution_bound(double sigma0_sup, double t, int n);

/// Pointwise residual of the sigma evolution inequality,
///   d_t sigma - (1/n) u^{ij} sigma_ij + sigma^2 / (2 n^2),
/// with d_t by forward difference between the two snapshots and sigma_ij
/// by stencils on the sampled sigma field of the first snapshot. On a
/// resolved genuine flow pair this is <= discretization slack.
struct SigmaResidualField {
  std::vector<double> values;
  std::vector<std::uint8_t> valid;
  double slack = 0.0;  // 10 (h^2 + dt) * sup sigma
};

SigmaResidualField sigma_parabolic_residual(const FlowSnapshot& a,
                                            const FlowSnapshot& b);

enum class DecayQuantity { sigma, d3_sq, d4_sq };

DecayQuantity decay_quantity_from_name(const std::string& name);
std::string decay_quantity_name(DecayQuantity q);

struct DecayFit {
  double t_start = 0.0, t_end = 0.0;
  double fitted_exponent = 0.0;
  double fitted_constant = 0.0;
  bool fit_valid = false;      // false when the quantity hits zero
  bool bound_satisfied = false;
  double c_emp = 0.0;          // q(eps0) * eps0^p * 1.05
  int power = 1;               // p = 1 for sigma/d3_sq, 2 for d4_sq
};

/// Least-squares slope of log q against log t over samples with t >= eps0,
/// plus the empirical-constant upper-bound check q(t) <= c_emp / t^p.
DecayFit decay_fit(const FlowTrace& trace, DecayQuantity quantity,
                   double eps0);

}  // namespace lmaflow
