#include "lmaflow/calabi.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lmaflow {

Tensor3 tensor3_at(const DerivativeTensorField& t3, long node) {
  if (t3.order != 3) throw std::invalid_argument("order-3 tensor expected");
  Tensor3 t;
  t.n = t3.grid.dim;
  for (int c = 0; c < t3.ncomp; ++c) {
    const auto& tup = t3.comps[c];
    const double v = t3.component(node, c);
    // Fill all permutations of the canonical tuple.
    int perm[3] = {tup[0], tup[1], tup[2]};
    std::sort(perm, perm + 3);
    do {
      t.v[perm[0]][perm[1]][perm[2]] = v;
    } while (std::next_permutation(perm, perm + 3));
  }
  return t;
}

Tensor3 rotate_tensor3(const Tensor3& t, const double q[3][3]) {
  Tensor3 out;
  out.n = t.n;
  const int n = t.n;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
              s += q[i][a] * q[j][b] * q[k][c] * t.v[i][j][k];
        out.v[a][b][c] = s;
      }
  return out;
}

double tensor3_norm_sq(const Tensor3& t) {
  double s = 0.0;
  for (int i = 0; i < t.n; ++i)
    for (int j = 0; j < t.n; ++j)
      for (int k = 0; k < t.n; ++k) s += t.v[i][j][k] * t.v[i][j][k];
  return s;
}

double calabi_sigma(const SymMat& hessian, const Tensor3& t) {
  const int n = hessian.n;
  const SymMat inv = hessian.inverse();
  double s = 0.0;
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l)
      for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q)
          for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c)
              s += inv.at(k, l) * inv.at(p, q) * inv.at(r, c) *
                   t.v[k][p][r] * t.v[l][q][c];
  return s;
}

CalabiSample calabi_abq(const SymMat& hessian, const Tensor3& t) {
  const int n = hessian.n;
  std::array<double, 3> lam;
  double q[3][3];
  hessian.eigen_decompose(lam, q);
  for (int i = 0; i < n; ++i)
    if (!(lam[i] > 0.0))
      throw std::runtime_error("Hessian not positive definite");

  const Tensor3 tt = rotate_tensor3(t, q);
  double w[3] = {};
  for (int i = 0; i < n; ++i) w[i] = 1.0 / lam[i];

  CalabiSample out;
  // sigma in the eigenbasis: sum w_k w_p w_r T_kpr^2 (sum of squares).
  for (int k = 0; k < n; ++k)
    for (int p = 0; p < n; ++p)
      for (int r = 0; r < n; ++r)
        out.sigma += w[k] * w[p] * w[r] * tt.v[k][p][r] * tt.v[k][p][r];

  for (int k = 0; k < n; ++k)
    for (int p = 0; p < n; ++p)
      for (int r = 0; r < n; ++r)
        for (int l = 0; l < n; ++l)
          for (int qq = 0; qq < n; ++qq)
            for (int i = 0; i < n; ++i) {
              const double wgt =
                  w[k] * w[p] * w[r] * w[l] * w[qq] * w[i];
              out.quantity_a += wgt * tt.v[k][p][r] * tt.v[l][qq][r] *
                                tt.v[k][l][i] * tt.v[p][qq][i];
              out.quantity_b += wgt * tt.v[k][p][r] * tt.v[l][p][r] *
                                tt.v[k][qq][i] * tt.v[l][qq][i];
            }
  return out;
}

SigmaField sigma_field(const PotentialField& u) {
  std::vector<std::uint8_t> hvalid;
  const auto hess = hessian_field(u, hvalid);
  const auto t3 = derivative_tensors(u, 3);

  SigmaField out;
  const long nnodes = u.grid.total_nodes();
  out.values.assign(nnodes, 0.0);
  out.valid.assign(nnodes, 0);
  for (long node = 0; node < nnodes; ++node) {
    if (!hvalid[node] || !t3.valid[node]) continue;
    if (!hess[node].positive_definite())
      throw std::runtime_error("singular Hessian in sigma evaluation");
    out.valid[node] = 1;
    out.values[node] = calabi_sigma(hess[node], tensor3_at(t3, node));
    out.sup = std::max(out.sup, out.values[node]);
  }
  return out;
}

CalabiField ab_quantities(const PotentialField& u) {
  std::vector<std::uint8_t> hvalid;
  const auto hess = hessian_field(u, hvalid);
  const auto t3 = derivative_tensors(u, 3);

  CalabiField out;
  const long nnodes = u.grid.total_nodes();
  out.samples.assign(nnodes, CalabiSample{});
  out.valid.assign(nnodes, 0);
  for (long node = 0; node < nnodes; ++node) {
    if (!hvalid[node] || !t3.valid[node]) continue;
    out.valid[node] = 1;
    out.samples[node] = calabi_abq(hess[node], tensor3_at(t3, node));
  }
  return out;
}

double sigma_supersolution_bound(double sigma0_sup, double t, int n) {
  if (sigma0_sup < 0.0) throw std::invalid_argument("sigma0 must be >= 0");
  return sigma0_sup / (1.0 + sigma0_sup * t / (2.0 * n * n));
}

SigmaResidualField sigma_parabolic_residual(const FlowSnapshot& a,
                                            const FlowSnapshot& b) {
  const PotentialField& ua = a.potential;
  if (!ua.grid.same_layout(b.potential.grid))
    throw std::invalid_argument("snapshots live on different grids");
  const double dt = b.time - a.time;
  if (!(dt > 0.0)) throw std::invalid_argument("snapshots out of order");
  const double h = ua.grid.min_spacing();
  if (dt > h)
    throw std::invalid_argument("snapshot spacing too coarse (dt > h)");
  const int n = ua.grid.dim;

  const SigmaField sa = sigma_field(ua);
  const SigmaField sb = sigma_field(b.potential);

  // Hessian of the sampled sigma field (stencils on sigma itself keeps the
  // check at fourth-order stencils of u).
  const auto sigma_d2 = sample_derivatives(ua.grid, sa.values, 2);
  std::vector<std::uint8_t> hvalid;
  const auto hess = hessian_field(ua, hvalid);

  SigmaResidualField out;
  const long nnodes = ua.grid.total_nodes();
  out.values.assign(nnodes, 0.0);
  out.valid.assign(nnodes, 0);
  out.slack = 10.0 * (h * h + dt) * sa.sup;

  // On box grids the sigma samples next to the frame are themselves
  // invalid, so differencing sigma needs one extra ring.
  const int extra = ua.grid.topology == Topology::box ? 3 : 0;

  for (long node = 0; node < nnodes; ++node) {
    if (!sa.valid[node] || !sb.valid[node] || !sigma_d2.valid[node]) continue;
    if (extra > 0) {
      const auto idx = ua.grid.unravel(node);
      bool deep = true;
      for (int ax = 0; ax < n; ++ax)
        if (idx[ax] < extra || idx[ax] >= ua.grid.points[ax] - extra)
          deep = false;
      if (!deep) continue;
    }
    const SymMat inv = hess[node].inverse();
    double uij_sij = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        uij_sij += inv.at(i, j) * sigma_d2.component_at(node, {i, j, 0, 0});
    const double dsdt = (sb.values[node] - sa.values[node]) / dt;
    const double s = sa.values[node];
    out.values[node] =
        dsdt - uij_sij / n + s * s / (2.0 * n * n);
    out.valid[node] = 1;
  }
  return out;
}

DecayQuantity decay_quantity_from_name(const std::string& name) {
  if (name == "sigma") return DecayQuantity::sigma;
  if (name == "d3_sq") return DecayQuantity::d3_sq;
  if (name == "d4_sq") return DecayQuantity::d4_sq;
  throw std::invalid_argument("unknown decay quantity '" + name + "'");
}

std::string decay_quantity_name(DecayQuantity q) {
  switch (q) {
    case DecayQuantity::sigma:
      return "sigma";
    case DecayQuantity::d3_sq:
      return "d3_sq";
    default:
      return "d4_sq";
  }
}

DecayFit decay_fit(const FlowTrace& trace, DecayQuantity quantity,
                   double eps0) {
  if (!(eps0 > 0.0)) throw std::invalid_argument("eps0 must be positive");
  auto value_of = [&](const TraceRecord& r) {
    switch (quantity) {
      case DecayQuantity::sigma:
        return r.diag.sup_sigma;
      case DecayQuantity::d3_sq:
        return r.diag.sup_d3_sq;
      default:
        return r.diag.sup_d4_sq;
    }
  };

  std::vector<std::pair<double, double>> pts;
  for (const auto& r : trace.records)
    if (r.t >= eps0 * (1.0 - 1e-12)) pts.emplace_back(r.t, value_of(r));
  if (pts.size() < 10)
    throw std::invalid_argument("decay fit needs at least 10 samples");

  DecayFit fit;
  fit.power = quantity == DecayQuantity::d4_sq ? 2 : 1;
  fit.t_start = pts.front().first;
  fit.t_end = pts.back().first;

  bool any_zero = false;
  for (const auto& [t, q] : pts)
    if (q <= 0.0) any_zero = true;

  if (any_zero) {
    // Quantity vanished; no log fit, bound trivially satisfied when the
    // leading sample is zero, otherwise still checked below against zero.
    fit.fit_valid = false;
  } else {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [t, q] : pts) {
      const double lx = std::log(t), ly = std::log(q);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
    }
    const double m = static_cast<double>(pts.size());
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / m;
    fit.fit_valid = true;
    fit.fitted_exponent = slope;
    fit.fitted_constant = std::exp(intercept);
  }

  const double q0 = pts.front().second;
  fit.c_emp = q0 * std::pow(pts.front().first, fit.power) * 1.05;
  fit.bound_satisfied = true;
  for (const auto& [t, q] : pts)
    if (q > fit.c_emp / std::pow(t, fit.power) + 1e-300)
      fit.bound_satisfied = false;
  return fit;
}

}  // namespace lmaflow
