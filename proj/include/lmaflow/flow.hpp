#pragma once

#include <stdexcept>
#include <vector>

#include "lmaflow/field.hpp"

namespace lmaflow {

/// Raised when a Hessian stops being positive definite somewhere.
struct ConvexityLoss : std::runtime_error {
  long node;
  explicit ConvexityLoss(long node_, const std::string& what)
      : std::runtime_error(what), node(node_) {}
};

struct FlowState {
  double time = 0.0;
  PotentialField potential;
};

struct FlowSnapshot {
  double time = 0.0;
  PotentialField potential;
};

struct DiagnosticsRecord {
  double mu_min = 0.0;
  double mu_max = 0.0;
  double sup_sigma = 0.0;
  double sup_d3_sq = 0.0;
  double sup_d4_sq = 0.0;
  double flow_residual = 0.0;
  bool has_metric = false;
  double ln_det_g_sup = 0.0;
  double phase_range = 0.0;
};

struct TraceRecord {
  double t = 0.0;
  DiagnosticsRecord diag;
};

struct FlowTrace {
  std::vector<TraceRecord> records;  // strictly increasing t
};

struct FlowRun {
  FlowTrace trace;
  std::vector<FlowSnapshot> snapshots;
  HessianBounds initial_range;  // measured eigen range at t = 0
  long steps_taken = 0;
};

/// Right-hand side (1/n) ln det(A + D2 phi) per node. Throws ConvexityLoss
/// naming the first node whose Hessian is not positive definite.
std::vector<double> flow_rhs(const PotentialField& u);

/// One explicit Euler update phi += dt * rhs. The background (c, A) is
/// untouched. Throws ConvexityLoss if the stepped state is no longer
/// strictly convex.
FlowState flow_step(const FlowState& state, double dt);

struct FlowOptions {
  bool with_metric = false;
  double dt_safety = 0.2;  // dt = safety * h^2 * n * mu_min
};

/// Integrate to t_end with adaptive explicit stepping, recording
/// diagnostics at each sample time. Sample times must be ascending,
/// start at >= 0 and end at t_end.
FlowRun run_flow(const PotentialField& initial, double t_end,
                 const std::vector<double>& sample_times,
                 const FlowOptions& opts = {});

/// Parabolic rescaling of a snapshot series about (x0, t0):
///   y = mu (x - x0),  s = mu^2 (t - t0),
///   u_mu = mu^2 [u - u(x0,t0) - Du(x0,t0).(x - x0)].
/// The returned fields live on a box grid with spacing mu*h and satisfy
/// u_mu(0, 0) = 0 and (discretely) Du_mu(0, 0) = 0. x0 must be an
/// interior grid node; t0 must lie inside the snapshot time range.
std::vector<FlowSnapshot> parabolic_scale(
    const std::vector<FlowSnapshot>& series, const std::array<double, 3>& x0,
    double t0, double mu);

/// Self-similar extension v(x, t) = (1 - t) u(x / sqrt(1 - t)) sampled on
/// `target` (defaults to u's own grid). The quadratic background maps in
/// closed form (A fixed, c -> (1-t) c); a nonzero perturbation is
/// evaluated by sixth-order Lagrange interpolation and requires the
/// rescaled points to stay inside the source box.
PotentialField self_similar_extend(const PotentialField& u, double t);
PotentialField self_similar_extend(const PotentialField& u, double t,
                                   const GridSpec& target);

/// Sup over valid interior nodes of |(u_b - u_a)/dt - rhs(u_a)| for two
/// fields on the same grid layout (total values are differenced, so the
/// backgrounds may differ in the constant term).
double flow_residual_sup(const PotentialField& a, const PotentialField& b,
                         double dt_between);

}  // namespace lmaflow
