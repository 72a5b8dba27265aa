#include "lmaflow/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lmaflow {

namespace {

constexpr double kPi = 3.14159265358979323846;

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Raw discrete conjugate value max_i <x_i, y> - u(x_i), plus one quadratic
// correction step inside the winning cell when stencil derivatives are
// available there. The correction keeps the conjugate within the cell and
// reduces the sampling error from O(h^2) to O(h^3) on smooth inputs.
double conjugate_value(const PotentialField& u,
                       const std::vector<std::array<double, 3>>& grad,
                       const std::vector<SymMat>& hess,
                       const std::vector<std::uint8_t>& dvalid,
                       const std::array<double, 3>& y) {
  const GridSpec& g = u.grid;
  const int n = g.dim;
  double best = -std::numeric_limits<double>::infinity();
  long best_node = -1;
  for (long node = 0; node < g.total_nodes(); ++node) {
    const auto x = g.position(g.unravel(node));
    double v = -u.total_value(node);
    for (int a = 0; a < n; ++a) v += x[a] * y[a];
    if (v > best) {
      best = v;
      best_node = node;
    }
  }
  if (best_node >= 0 && dvalid[best_node] &&
      hess[best_node].positive_definite()) {
    // Maximize <x, y> - [u_k + g.(x - x_k) + (x-x_k)^T H (x-x_k)/2] in the
    // cell: d = H^{-1} (y - g), clamped to one spacing.
    std::array<double, 3> r{};
    for (int a = 0; a < n; ++a) r[a] = y[a] - grad[best_node][a];
    auto d = hess[best_node].inverse().matvec(r);
    bool inside = true;
    for (int a = 0; a < n; ++a)
      if (std::abs(d[a]) > g.spacing(a)) inside = false;
    if (inside) {
      double corr = 0.0;
      for (int a = 0; a < n; ++a) corr += r[a] * d[a];
      corr -= 0.5 * hess[best_node].quad_form(d);
      best += corr;
    }
  }
  return best;
}

}  // namespace

LegendrePair legendre(const PotentialField& u) {
  const GridSpec& g = u.grid;
  if (g.topology != Topology::box)
    throw std::invalid_argument("legendre transform needs a box grid");
  const int n = g.dim;

  LegendrePair pair;
  pair.primal = u;

  std::vector<std::uint8_t> dvalid;
  const auto hess = hessian_field(u, dvalid);
  std::vector<std::uint8_t> gv;
  const auto grad = gradient_field(u, gv);

  double mu_min = std::numeric_limits<double>::infinity();
  std::array<double, 3> ylo{}, yhi{};
  bool first = true;
  for (long node = 0; node < g.total_nodes(); ++node) {
    if (!dvalid[node]) continue;
    mu_min = std::min(mu_min, hess[node].min_eigenvalue());
    for (int a = 0; a < n; ++a) {
      if (first || grad[node][a] < ylo[a]) ylo[a] = grad[node][a];
      if (first || grad[node][a] > yhi[a]) yhi[a] = grad[node][a];
    }
    first = false;
  }
  pair.input_convex = mu_min > 0.0;

  GridSpec dual_grid;
  dual_grid.dim = n;
  dual_grid.topology = Topology::box;
  for (int a = 0; a < n; ++a) {
    dual_grid.origin[a] = ylo[a];
    dual_grid.extent[a] = yhi[a] - ylo[a];
    dual_grid.points[a] = g.points[a];
    if (!(dual_grid.extent[a] > 0.0))
      throw std::runtime_error("degenerate gradient image");
  }
  dual_grid.validate();

  const bool pure_quadratic = max_abs(u.perturbation) == 0.0;
  if (pure_quadratic && u.background_matrix.positive_definite()) {
    // Closed form: A -> A^{-1}, c -> -c.
    pair.dual = make_quadratic(dual_grid, -u.background_const,
                               u.background_matrix.inverse());
    return pair;
  }

  PotentialField dual;
  dual.grid = dual_grid;
  if (u.background_matrix.positive_definite()) {
    dual.background_const = -u.background_const;
    dual.background_matrix = u.background_matrix.inverse();
  } else {
    dual.background_const = 0.0;
    dual.background_matrix = SymMat::zero(n);
  }
  dual.perturbation.assign(dual_grid.total_nodes(), 0.0);
  for (long node = 0; node < dual_grid.total_nodes(); ++node) {
    const auto y = dual_grid.position(dual_grid.unravel(node));
    const double ustar = conjugate_value(u, grad, hess, dvalid, y);
    dual.perturbation[node] =
        ustar - dual.background_const -
        0.5 * dual.background_matrix.quad_form(y);
  }
  pair.dual = std::move(dual);
  return pair;
}

double hessian_duality_error(const LegendrePair& pair) {
  const PotentialField& u = pair.primal;
  const PotentialField& us = pair.dual;
  const int n = u.grid.dim;

  std::vector<std::uint8_t> hv, gv, dv;
  const auto hess = hessian_field(u, hv);
  const auto grad = gradient_field(u, gv);
  const auto dual_hess = hessian_field(us, dv);

  double worst = 0.0;
  long matched = 0;
  for (long node = 0; node < u.grid.total_nodes(); ++node) {
    if (!hv[node] || !gv[node]) continue;
    if (!hess[node].positive_definite()) continue;
    // Nearest dual node to y = Du(x); skip matches outside the dual
    // interior where the dual Hessian stencil is unavailable.
    std::array<int, 3> idx{};
    bool ok = true;
    for (int a = 0; a < n; ++a) {
      const double xi =
          (grad[node][a] - us.grid.origin[a]) / us.grid.spacing(a);
      idx[a] = static_cast<int>(std::lround(xi));
      if (idx[a] < 1 || idx[a] > us.grid.points[a] - 2) ok = false;
    }
    if (!ok) continue;
    const long dnode = us.grid.linear_index(idx);
    if (!dv[dnode]) continue;
    const SymMat inv = hess[node].inverse();
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j)
        worst = std::max(
            worst, std::abs(dual_hess[dnode].at(i, j) - inv.at(i, j)));
    ++matched;
  }
  if (matched == 0)
    throw std::runtime_error("no gradient image points inside the dual grid");
  return worst;
}

ShrinkerResidualField ma_duality_residual(const LegendrePair& pair) {
  return residual_ma(pair.dual);
}

double legendre_involution_error(const PotentialField& u,
                                 double interior_fraction) {
  const LegendrePair pair = legendre(u);
  const LegendrePair back = legendre(pair.dual);
  double err = 0.0;
  long counted = 0;
  std::vector<std::uint8_t> hv;
  hessian_field(u, hv);
  for (long node = 0; node < u.grid.total_nodes(); ++node) {
    if (!hv[node]) continue;
    const auto x = u.node_position(node);
    bool inside = true;
    for (int a = 0; a < u.grid.dim; ++a) {
      const double center = u.grid.origin[a] + 0.5 * u.grid.extent[a];
      if (std::abs(x[a] - center) >
          interior_fraction * 0.5 * u.grid.extent[a])
        inside = false;
      const double xi =
          (x[a] - back.dual.grid.origin[a]) / back.dual.grid.spacing(a);
      if (xi < 0.5 || xi > back.dual.grid.points[a] - 1.5) inside = false;
    }
    if (!inside) continue;
    const double ustar2 =
        interpolate_sample(back.dual.grid, back.dual.perturbation, x) +
        back.dual.background_const +
        0.5 * back.dual.background_matrix.quad_form(x);
    err = std::max(err, std::abs(ustar2 - u.total_value(node)));
    ++counted;
  }
  if (counted == 0)
    throw std::runtime_error("no common-domain nodes for the involution");
  return err;
}

SymMat lewy_hessian_map(const SymMat& hessian) {
  std::array<double, 3> lam;
  double q[3][3];
  hessian.eigen_decompose(lam, q);
  std::array<double, 3> mapped{};
  for (int i = 0; i < hessian.n; ++i) {
    if (std::abs(lam[i] + 1.0) < 1e-12)
      throw std::domain_error("eigenvalue -1: I + H is singular");
    mapped[i] = (lam[i] - 1.0) / (lam[i] + 1.0);
  }
  return sym_from_eigen(hessian.n, mapped, q);
}

LewyImage lewy_rotate(const PotentialField& u) {
  const GridSpec& g = u.grid;
  const int n = g.dim;
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

  std::vector<std::uint8_t> hv, gv;
  const auto hess = hessian_field(u, hv);
  const auto grad = gradient_field(u, gv);

  LewyImage out;
  const long nnodes = g.total_nodes();
  out.mapped_points.assign(nnodes, {});
  out.mapped_gradient.assign(nnodes, {});
  out.mapped_hessian.assign(nnodes, SymMat::zero(n));
  out.valid.assign(nnodes, 0);

  std::vector<long> live;
  for (long node = 0; node < nnodes; ++node) {
    if (!hv[node] || !gv[node]) continue;
    const auto x = u.node_position(node);
    for (int a = 0; a < n; ++a) {
      out.mapped_points[node][a] = (x[a] + grad[node][a]) * inv_sqrt2;
      out.mapped_gradient[node][a] = (-x[a] + grad[node][a]) * inv_sqrt2;
    }
    out.mapped_hessian[node] = lewy_hessian_map(hess[node]);
    out.valid[node] = 1;
    live.push_back(node);
  }

  // Collision scan: only possible when convexity fails.
  const double tol = 0.5 * g.min_spacing();
  for (size_t i = 0; i < live.size() && out.injective; ++i)
    for (size_t j = i + 1; j < live.size(); ++j) {
      double d2 = 0.0;
      for (int a = 0; a < n; ++a) {
        const double d =
            out.mapped_points[live[i]][a] - out.mapped_points[live[j]][a];
        d2 += d * d;
      }
      if (d2 < tol * tol) {
        out.injective = false;
        break;
      }
    }
  return out;
}

double angle_shift_error(const std::vector<double>& eigs) {
  double lhs = 0.0, rhs = 0.0;
  for (double lam : eigs) {
    if (lam <= -1.0)
      throw std::domain_error("eigenvalue <= -1: identity branch invalid");
    lhs += std::atan(lam);
    rhs += std::atan((lam - 1.0) / (lam + 1.0));
  }
  rhs += eigs.size() * kPi / 4.0;
  return std::abs(lhs - rhs);
}

RotatedShrinker shrinker_preservation_check(const PotentialField& u) {
  if (max_abs(u.perturbation) != 0.0)
    throw std::invalid_argument("expected a purely quadratic potential");
  const SymMat& a = u.background_matrix;
  const auto lam = a.eigenvalues();
  if (lam[0] < 0.0)
    throw std::invalid_argument("rotation needs a convex quadratic");

  RotatedShrinker out;
  out.rotated_matrix = lewy_hessian_map(a);
  const auto mapped = out.rotated_matrix.eigenvalues();
  out.rotated_const = 0.0;
  for (int i = 0; i < u.grid.dim; ++i)
    out.rotated_const -= std::atan(mapped[i]);

  const PotentialField rotated =
      make_quadratic(u.grid, out.rotated_const, out.rotated_matrix);
  out.residual = residual_sl(rotated);
  return out;
}

}  // namespace lmaflow
