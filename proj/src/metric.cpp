#include "lmaflow/metric.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lmaflow/calabi.hpp"

namespace lmaflow {

double lagrangian_phase(const SymMat& hessian) {
  const auto lam = hessian.eigenvalues();
  double p = 0.0;
  for (int i = 0; i < hessian.n; ++i) p += std::atan(lam[i]);
  return p;
}

InducedMetricField induced_metric(const PotentialField& u) {
  std::vector<std::uint8_t> valid;
  const auto hess = hessian_field(u, valid);
  const long nnodes = u.grid.total_nodes();
  const int n = u.grid.dim;

  InducedMetricField out;
  out.g.assign(nnodes, SymMat::zero(n));
  out.ln_det_g.assign(nnodes, 0.0);
  out.phase.assign(nnodes, 0.0);
  out.valid = valid;
  bool first = true;
  for (long node = 0; node < nnodes; ++node) {
    if (!valid[node]) continue;
    const SymMat h2 = hess[node].squared();
    out.g[node] = SymMat::identity(n).plus(h2);
    const auto lam = hess[node].eigenvalues();
    double ld = 0.0, ph = 0.0;
    for (int i = 0; i < n; ++i) {
      ld += std::log1p(lam[i] * lam[i]);
      ph += std::atan(lam[i]);
    }
    out.ln_det_g[node] = ld;
    out.phase[node] = ph;
    if (first) {
      out.phase_min = out.phase_max = ph;
      out.ln_det_g_sup = ld;
      first = false;
    } else {
      out.phase_min = std::min(out.phase_min, ph);
      out.phase_max = std::max(out.phase_max, ph);
      out.ln_det_g_sup = std::max(out.ln_det_g_sup, ld);
    }
  }
  if (first) throw std::runtime_error("no valid nodes for induced metric");
  return out;
}

namespace {

// Dense symmetric fourth-derivative tensor at one node.
struct Tensor4 {
  int n = 1;
  double v[3][3][3][3] = {};
};

Tensor4 tensor4_at(const DerivativeTensorField& t4, long node) {
  Tensor4 t;
  t.n = t4.grid.dim;
  for (int c = 0; c < t4.ncomp; ++c) {
    const auto& tup = t4.comps[c];
    const double val = t4.component(node, c);
    int perm[4] = {tup[0], tup[1], tup[2], tup[3]};
    std::sort(perm, perm + 4);
    do {
      t.v[perm[0]][perm[1]][perm[2]][perm[3]] = val;
    } while (std::next_permutation(perm, perm + 4));
  }
  return t;
}

}  // namespace

MetricIdentityCheck ln_det_g_gradient_identity(const PotentialField& u) {
  const int n = u.grid.dim;
  const long nnodes = u.grid.total_nodes();

  const InducedMetricField m = induced_metric(u);
  const auto t3f = derivative_tensors(u, 3);
  const auto t4f = derivative_tensors(u, 4);
  std::vector<std::uint8_t> hvalid;
  const auto hess = hessian_field(u, hvalid);

  // Stencil second derivatives of the sampled ln det g field.
  const auto ld_d2 = sample_derivatives(u.grid, m.ln_det_g, 2);

  MetricIdentityCheck out;
  out.error.assign(nnodes, 0.0);
  out.valid.assign(nnodes, 0);
  long counted = 0;

  // ln det g is only valid one ring in on boxes, so its stencil Hessian
  // needs one more; the fourth-order tensors need two.
  const int need = u.grid.topology == Topology::box ? 2 : 0;

  for (long node = 0; node < nnodes; ++node) {
    if (!m.valid[node] || !t3f.valid[node] || !t4f.valid[node] ||
        !ld_d2.valid[node])
      continue;
    if (need > 0) {
      const auto idx = u.grid.unravel(node);
      bool deep = true;
      for (int ax = 0; ax < n; ++ax)
        if (idx[ax] < need || idx[ax] >= u.grid.points[ax] - need)
          deep = false;
      if (!deep) continue;
    }

    const SymMat& h = hess[node];
    const SymMat ginv = m.g[node].inverse();
    const Tensor3 t3 = tensor3_at(t3f, node);
    const Tensor4 t4 = tensor4_at(t4f, node);

    // dg[i](a,b) = sum_k [ u_aki H_kb + H_ak u_kbi ]
    double dg[3][3][3] = {};
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          double s = 0.0;
          for (int k = 0; k < n; ++k)
            s += t3.v[a][k][i] * h.at(k, b) + h.at(a, k) * t3.v[k][b][i];
          dg[i][a][b] = s;
        }

    // ddg[i][j](a,b) = sum_k [ u_akij H_kb + u_aki u_kbj
    //                          + u_akj u_kbi + H_ak u_kbij ]
    double ddg[3][3][3][3] = {};
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) {
            double s = 0.0;
            for (int k = 0; k < n; ++k)
              s += t4.v[a][k][i][j] * h.at(k, b) +
                   t3.v[a][k][i] * t3.v[k][b][j] +
                   t3.v[a][k][j] * t3.v[k][b][i] +
                   h.at(a, k) * t4.v[k][b][i][j];
            ddg[i][j][a][b] = s;
          }

    // dginv[i](a,b) = - (ginv dg[i] ginv)(a,b)
    double dginv[3][3][3] = {};
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          double s = 0.0;
          for (int c = 0; c < n; ++c)
            for (int d = 0; d < n; ++d)
              s += ginv.at(a, c) * dg[i][c][d] * ginv.at(d, b);
          dginv[i][a][b] = -s;
        }

    double rhs = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double term1 = 0.0, term2 = 0.0;
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) {
            term1 += dginv[i][a][b] * dg[j][a][b];
            term2 += ginv.at(a, b) * ddg[i][j][a][b];
          }
        rhs += ginv.at(i, j) * (term1 + term2);
      }

    double lhs = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        lhs += ginv.at(i, j) * ld_d2.component_at(node, {i, j, 0, 0});

    out.error[node] = std::abs(lhs - rhs);
    out.valid[node] = 1;
    out.max_error = std::max(out.max_error, out.error[node]);
    ++counted;
  }
  if (counted == 0)
    throw std::runtime_error(
        "grid margin too small for the ln det g identity stencils");
  return out;
}

}  // namespace lmaflow
