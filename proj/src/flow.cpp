#include "lmaflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lmaflow/calabi.hpp"
#include "lmaflow/metric.hpp"

namespace lmaflow {

namespace {

// Hessian, smallest eigenvalue and ln det in one sweep.
struct RhsSweep {
  std::vector<double> rhs;
  std::vector<std::uint8_t> valid;
  double mu_min = 0.0;
  double mu_max = 0.0;
};

RhsSweep rhs_sweep(const PotentialField& u) {
  std::vector<std::uint8_t> valid;
  const auto hess = hessian_field(u, valid);
  const int n = u.grid.dim;
  RhsSweep out;
  out.rhs.assign(hess.size(), 0.0);
  out.valid = valid;
  bool first = true;
  for (long node = 0; node < static_cast<long>(hess.size()); ++node) {
    if (!valid[node]) continue;
    const auto lam = hess[node].eigenvalues();
    if (!(lam[0] > 0.0)) {
      std::ostringstream msg;
      const auto x = u.grid.position(u.grid.unravel(node));
      msg << "convexity lost at node " << node << " (x =";
      for (int a = 0; a < n; ++a) msg << " " << x[a];
      msg << "), smallest Hessian eigenvalue " << lam[0];
      throw ConvexityLoss(node, msg.str());
    }
    double ld = 0.0;
    for (int i = 0; i < n; ++i) ld += std::log(lam[i]);
    out.rhs[node] = ld / n;
    if (first) {
      out.mu_min = lam[0];
      out.mu_max = lam[n - 1];
      first = false;
    } else {
      out.mu_min = std::min(out.mu_min, lam[0]);
      out.mu_max = std::max(out.mu_max, lam[n - 1]);
    }
  }
  return out;
}

}  // namespace

std::vector<double> flow_rhs(const PotentialField& u) {
  return rhs_sweep(u).rhs;
}

FlowState flow_step(const FlowState& state, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  const auto sweep = rhs_sweep(state.potential);
  FlowState next = state;
  next.time += dt;
  for (long node = 0; node < static_cast<long>(sweep.rhs.size()); ++node)
    if (sweep.valid[node])
      next.potential.perturbation[node] += dt * sweep.rhs[node];
  // Post-state convexity; rethrow as a step rejection diagnostic.
  try {
    rhs_sweep(next.potential);
  } catch (const ConvexityLoss& e) {
    throw ConvexityLoss(e.node, std::string("step rejected: ") + e.what());
  }
  return next;
}

namespace {

DiagnosticsRecord diagnostics_for(const PotentialField& u, bool with_metric) {
  DiagnosticsRecord d;
  const EigenRange er = hessian_eigen_range(u);
  d.mu_min = er.mu_min;
  d.mu_max = er.mu_max;

  const auto sig = sigma_field(u);
  for (long node = 0; node < static_cast<long>(sig.values.size()); ++node)
    if (sig.valid[node]) d.sup_sigma = std::max(d.sup_sigma, sig.values[node]);

  const auto t3 = derivative_tensors(u, 3);
  const auto t4 = derivative_tensors(u, 4);
  for (long node = 0; node < u.grid.total_nodes(); ++node) {
    if (t3.valid[node]) d.sup_d3_sq = std::max(d.sup_d3_sq, t3.norm_sq(node));
    if (t4.valid[node]) d.sup_d4_sq = std::max(d.sup_d4_sq, t4.norm_sq(node));
  }

  if (with_metric) {
    const InducedMetricField m = induced_metric(u);
    d.has_metric = true;
    d.ln_det_g_sup = m.ln_det_g_sup;
    d.phase_range = m.phase_max - m.phase_min;
  }
  return d;
}

}  // namespace

FlowRun run_flow(const PotentialField& initial, double t_end,
                 const std::vector<double>& sample_times,
                 const FlowOptions& opts) {
  if (sample_times.empty())
    throw std::invalid_argument("need at least one sample time");
  for (size_t k = 0; k + 1 < sample_times.size(); ++k)
    if (!(sample_times[k] < sample_times[k + 1]))
      throw std::invalid_argument("sample times must be strictly increasing");
  if (sample_times.front() < 0.0 || sample_times.back() > t_end + 1e-12)
    throw std::invalid_argument("sample times must lie in [0, t_end]");

  const int n = initial.grid.dim;
  const double h = initial.grid.min_spacing();
  const double h2 = h * h;
  const double dt_floor = 1e-12 * h2;

  FlowRun run;
  {
    const EigenRange er = hessian_eigen_range(initial);
    run.initial_range = {er.mu_min, er.mu_max};
    if (!(er.mu_min > 0.0))
      throw ConvexityLoss(-1, "initial data is not strictly convex");
  }

  FlowState state{0.0, initial};
  size_t next_sample = 0;
  const double teps = 1e-12 * std::max(1.0, t_end);

  auto maybe_record = [&](const FlowState& s) {
    while (next_sample < sample_times.size() &&
           s.time >= sample_times[next_sample] - teps) {
      TraceRecord rec;
      rec.t = sample_times[next_sample];
      rec.diag = diagnostics_for(s.potential, opts.with_metric);
      run.trace.records.push_back(rec);
      run.snapshots.push_back({sample_times[next_sample], s.potential});
      ++next_sample;
    }
  };

  maybe_record(state);
  RhsSweep sweep = rhs_sweep(state.potential);
  while (state.time < t_end - teps && next_sample < sample_times.size()) {
    // Paired caps: the nominal safety * h^2 * n * mu_min step, and the
    // explicit-Euler diffusion limit h^2 mu_min / 2 (the linearized
    // operator has top eigenvalue 1/(n mu_min) in each of n axes). The
    // second cap only binds for n = 3.
    double dt = std::min(opts.dt_safety * h2 * n * sweep.mu_min,
                         0.45 * h2 * sweep.mu_min);
    const double target = sample_times[next_sample];
    dt = std::min(dt, target - state.time);
    for (;;) {
      if (dt < dt_floor)
        throw std::runtime_error("flow dt underflow below 1e-12 h^2");
      FlowState trial = state;
      trial.time += dt;
      for (long node = 0; node < static_cast<long>(sweep.rhs.size()); ++node)
        if (sweep.valid[node])
          trial.potential.perturbation[node] += dt * sweep.rhs[node];
      try {
        RhsSweep next = rhs_sweep(trial.potential);
        state = std::move(trial);
        sweep = std::move(next);
        break;
      } catch (const ConvexityLoss&) {
        dt *= 0.5;  // reject and retry smaller
      }
    }
    ++run.steps_taken;
    maybe_record(state);
  }

  // Flow residual per record from consecutive snapshots (forward
  // difference; the final record reuses its backward pair).
  const size_t m = run.snapshots.size();
  if (m >= 2) {
    for (size_t k = 0; k < m; ++k) {
      const size_t a = (k + 1 < m) ? k : k - 1;
      const double dt = run.snapshots[a + 1].time - run.snapshots[a].time;
      run.trace.records[k].diag.flow_residual = flow_residual_sup(
          run.snapshots[a].potential, run.snapshots[a + 1].potential, dt);
    }
  }
  return run;
}

double flow_residual_sup(const PotentialField& a, const PotentialField& b,
                         double dt_between) {
  if (!a.grid.same_layout(b.grid))
    throw std::invalid_argument("fields live on different grids");
  if (!(dt_between > 0.0)) throw std::invalid_argument("dt must be positive");
  const auto sweep = rhs_sweep(a);
  double worst = 0.0;
  for (long node = 0; node < a.grid.total_nodes(); ++node) {
    if (!sweep.valid[node]) continue;
    const double dudt = (b.total_value(node) - a.total_value(node)) / dt_between;
    worst = std::max(worst, std::abs(dudt - sweep.rhs[node]));
  }
  return worst;
}

std::vector<FlowSnapshot> parabolic_scale(
    const std::vector<FlowSnapshot>& series, const std::array<double, 3>& x0,
    double t0, double mu) {
  if (series.empty()) throw std::invalid_argument("empty snapshot series");
  if (!(mu > 0.0)) throw std::invalid_argument("mu must be positive");
  const GridSpec& g = series.front().potential.grid;
  const int n = g.dim;

  if (t0 < series.front().time - 1e-12 || t0 > series.back().time + 1e-12)
    throw std::domain_error("t0 outside the snapshot time range");

  // x0 must coincide with an interior grid node.
  std::array<int, 3> i0{};
  for (int a = 0; a < n; ++a) {
    const double xi = (x0[a] - g.origin[a]) / g.spacing(a);
    i0[a] = static_cast<int>(std::lround(xi));
    if (std::abs(xi - i0[a]) > 1e-9)
      throw std::domain_error("x0 is not a grid node");
    const int lo = g.topology == Topology::box ? 1 : 0;
    if (g.topology == Topology::box &&
        (i0[a] < lo || i0[a] >= g.points[a] - 1))
      throw std::domain_error("x0 outside the grid interior");
    if (g.topology == Topology::torus) i0[a] = g.wrap(i0[a], a);
  }
  const long node0 = g.linear_index(i0);

  // Base value and stencil gradient at (x0, t0), linearly interpolated in
  // time between the bracketing snapshots.
  size_t kb = 0;
  while (kb + 1 < series.size() && series[kb + 1].time <= t0 + 1e-12) ++kb;
  double u0, g0[3];
  {
    auto value_grad = [&](const PotentialField& u, double& val, double gr[3]) {
      val = u.total_value(node0);
      std::vector<std::uint8_t> gv;
      const auto grad = gradient_field(u, gv);
      if (!gv[node0]) throw std::domain_error("x0 outside the grid interior");
      for (int a = 0; a < n; ++a) gr[a] = grad[node0][a];
    };
    double va, vb, ga[3], gb[3];
    value_grad(series[kb].potential, va, ga);
    if (kb + 1 < series.size() && t0 > series[kb].time + 1e-12) {
      value_grad(series[kb + 1].potential, vb, gb);
      const double w =
          (t0 - series[kb].time) / (series[kb + 1].time - series[kb].time);
      u0 = (1 - w) * va + w * vb;
      for (int a = 0; a < n; ++a) g0[a] = (1 - w) * ga[a] + w * gb[a];
    } else {
      u0 = va;
      for (int a = 0; a < n; ++a) g0[a] = ga[a];
    }
  }

  // Mapped grid: box with spacing mu*h, node-for-node image of the source.
  GridSpec gy;
  gy.dim = n;
  gy.topology = Topology::box;
  for (int a = 0; a < n; ++a) {
    gy.points[a] = g.points[a];
    gy.origin[a] = mu * (g.origin[a] - x0[a]);
    gy.extent[a] = mu * g.spacing(a) * (g.points[a] - 1);
  }
  gy.validate();

  std::vector<FlowSnapshot> out;
  out.reserve(series.size());
  for (const auto& snap : series) {
    FlowSnapshot mapped;
    mapped.time = mu * mu * (snap.time - t0);
    PotentialField v;
    v.grid = gy;
    v.background_const = 0.0;
    v.background_matrix = snap.potential.background_matrix;
    v.perturbation.assign(gy.total_nodes(), 0.0);
    for (long node = 0; node < g.total_nodes(); ++node) {
      const auto idx = g.unravel(node);
      const auto x = g.position(idx);
      const auto y = gy.position(idx);
      double affine = u0;
      for (int a = 0; a < n; ++a) affine += g0[a] * (x[a] - x0[a]);
      const double umu =
          mu * mu * (snap.potential.total_value(node) - affine);
      v.perturbation[gy.linear_index(idx)] =
          umu - 0.5 * v.background_matrix.quad_form(y);
    }
    mapped.potential = std::move(v);
    out.push_back(std::move(mapped));
  }
  return out;
}

PotentialField self_similar_extend(const PotentialField& u, double t) {
  return self_similar_extend(u, t, u.grid);
}

PotentialField self_similar_extend(const PotentialField& u, double t,
                                   const GridSpec& target) {
  if (!(t < 1.0)) throw std::invalid_argument("need t < 1");
  if (u.grid.topology != Topology::box)
    throw std::invalid_argument("self-similar extension needs a box grid");
  const double shrink = 1.0 - t;
  const double stretch = 1.0 / std::sqrt(shrink);

  PotentialField v;
  v.grid = target;
  v.grid.validate();
  if (v.grid.dim != u.grid.dim) throw std::invalid_argument("dim mismatch");
  v.background_matrix = u.background_matrix;
  v.background_const = shrink * u.background_const;
  v.perturbation.assign(target.total_nodes(), 0.0);

  double phi_scale = 0.0;
  for (double p : u.perturbation) phi_scale = std::max(phi_scale, std::abs(p));
  if (phi_scale == 0.0) return v;  // pure quadratic: closed form

  for (long node = 0; node < target.total_nodes(); ++node) {
    const auto x = target.position(target.unravel(node));
    std::array<double, 3> xs{};
    for (int a = 0; a < target.dim; ++a) xs[a] = x[a] * stretch;
    v.perturbation[node] =
        shrink * interpolate_sample(u.grid, u.perturbation, xs);
  }
  return v;
}

}  // namespace lmaflow
