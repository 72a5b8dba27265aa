#include "lmaflow/shrinker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "lmaflow/banded.hpp"
#include "lmaflow/flow.hpp"
#include "lmaflow/metric.hpp"

namespace lmaflow {

PotentialField quadratic_shrinker_ma(const GridSpec& grid, const SymMat& A) {
  if (!A.positive_definite())
    throw std::invalid_argument("background matrix must be SPD");
  const double c = -std::log(A.det()) / grid.dim;
  return make_quadratic(grid, c, A);
}

PotentialField quadratic_shrinker_sl(const GridSpec& grid, const SymMat& A) {
  const auto lam = A.eigenvalues();
  double c = 0.0;
  for (int i = 0; i < grid.dim; ++i) c -= std::atan(lam[i]);
  return make_quadratic(grid, c, A);
}

namespace {

ShrinkerResidualField finalize_norms(ShrinkerResidualField&& f) {
  double sum_sq = 0.0;
  long count = 0;
  for (long node = 0; node < static_cast<long>(f.residual.size()); ++node) {
    if (!f.valid[node]) continue;
    f.norm_sup = std::max(f.norm_sup, std::abs(f.residual[node]));
    sum_sq += f.residual[node] * f.residual[node];
    ++count;
  }
  f.norm_l2 = count ? std::sqrt(sum_sq / count) : 0.0;
  return std::move(f);
}

}  // namespace

ShrinkerResidualField residual_ma(const PotentialField& u) {
  std::vector<std::uint8_t> hvalid, gvalid;
  const auto hess = hessian_field(u, hvalid);
  const auto grad = gradient_field(u, gvalid);
  const int n = u.grid.dim;

  ShrinkerResidualField out;
  const long nnodes = u.grid.total_nodes();
  out.residual.assign(nnodes, 0.0);
  out.valid.assign(nnodes, 0);
  for (long node = 0; node < nnodes; ++node) {
    if (!hvalid[node] || !gvalid[node]) continue;
    if (!hess[node].positive_definite())
      throw std::runtime_error("residual_ma: Hessian not positive definite");
    const auto x = u.node_position(node);
    double xdu = 0.0;
    for (int a = 0; a < n; ++a) xdu += x[a] * grad[node][a];
    const double rhs = std::exp(n * (-u.total_value(node) + 0.5 * xdu));
    out.residual[node] = hess[node].det() - rhs;
    out.valid[node] = 1;
  }
  return finalize_norms(std::move(out));
}

ShrinkerResidualField residual_sl(const PotentialField& u) {
  std::vector<std::uint8_t> hvalid, gvalid;
  const auto hess = hessian_field(u, hvalid);
  const auto grad = gradient_field(u, gvalid);
  const int n = u.grid.dim;

  ShrinkerResidualField out;
  const long nnodes = u.grid.total_nodes();
  out.residual.assign(nnodes, 0.0);
  out.valid.assign(nnodes, 0);
  for (long node = 0; node < nnodes; ++node) {
    if (!hvalid[node] || !gvalid[node]) continue;
    const auto x = u.node_position(node);
    double xdu = 0.0;
    for (int a = 0; a < n; ++a) xdu += x[a] * grad[node][a];
    out.residual[node] =
        lagrangian_phase(hess[node]) - (-u.total_value(node) + 0.5 * xdu);
    out.valid[node] = 1;
  }
  return finalize_norms(std::move(out));
}

namespace {

enum class Equation { ma, sl };

// Interior unknowns of a box grid in lexicographic order.
struct InteriorMap {
  std::array<int, 3> count{1, 1, 1};
  GridSpec grid;
  long size = 0;

  explicit InteriorMap(const GridSpec& g) : grid(g) {
    size = 1;
    for (int a = 0; a < g.dim; ++a) {
      count[a] = g.points[a] - 2;
      size *= count[a];
    }
  }
  long row_of(const std::array<int, 3>& idx) const {
    long r = 0;
    for (int a = 0; a < grid.dim; ++a) r = r * count[a] + (idx[a] - 1);
    return r;
  }
  bool interior(const std::array<int, 3>& idx) const {
    for (int a = 0; a < grid.dim; ++a)
      if (idx[a] < 1 || idx[a] > grid.points[a] - 2) return false;
    return true;
  }
  int bandwidth() const {
    switch (grid.dim) {
      case 1:
        return 1;
      case 2:
        return count[1] + 1;
      default:
        return count[1] * count[2] + count[2] + 1;
    }
  }
};

// Total-value state derivatives via plain stencils (background folded into
// the sample array, so this matches residual_* applied to the returned
// pure-sample field).
struct StateDerivs {
  std::vector<SymMat> hess;
  std::vector<std::array<double, 3>> grad;
  std::vector<std::uint8_t> valid;
};

StateDerivs state_derivs(const GridSpec& g, const std::vector<double>& u) {
  PotentialField f;
  f.grid = g;
  f.background_const = 0.0;
  f.background_matrix = SymMat::zero(g.dim);
  f.perturbation = u;
  StateDerivs d;
  d.hess = hessian_field(f, d.valid);
  std::vector<std::uint8_t> gv;
  d.grad = gradient_field(f, gv);
  return d;
}

double equation_residual_sup(Equation eq, const GridSpec& g,
                             const std::vector<double>& u,
                             const std::vector<double>* source,
                             bool* convex_ok) {
  const StateDerivs d = state_derivs(g, u);
  const int n = g.dim;
  double sup = 0.0;
  if (convex_ok) *convex_ok = true;
  for (long node = 0; node < g.total_nodes(); ++node) {
    if (!d.valid[node]) continue;
    const auto idx = g.unravel(node);
    const auto x = g.position(idx);
    double xdu = 0.0;
    for (int a = 0; a < n; ++a) xdu += x[a] * d.grad[node][a];
    double f;
    if (eq == Equation::ma) {
      if (!d.hess[node].positive_definite()) {
        if (convex_ok) *convex_ok = false;
        return 1e300;
      }
      f = std::log(d.hess[node].det()) + n * u[node] - 0.5 * n * xdu;
    } else {
      f = lagrangian_phase(d.hess[node]) + u[node] - 0.5 * xdu;
    }
    if (source) f -= (*source)[node];
    sup = std::max(sup, std::abs(f));
  }
  return sup;
}

std::pair<PotentialField, NewtonReport> newton_solve(
    Equation eq, const GridSpec& grid, const PotentialField& boundary,
    const PotentialField& initial_guess, const NewtonOptions& opts) {
  grid.validate();
  if (grid.topology != Topology::box)
    throw std::invalid_argument("Newton solve needs a box grid");
  // Direct banded factorization: desk scale only.
  const int max_points = grid.dim == 3 ? 33 : 200;
  for (int a = 0; a < grid.dim; ++a)
    if (grid.points[a] > max_points)
      throw std::invalid_argument(
          "grid too large for the direct banded solver (max " +
          std::to_string(max_points) + " points per axis in " +
          std::to_string(grid.dim) + "d)");
  if (!boundary.grid.same_layout(grid) || !initial_guess.grid.same_layout(grid))
    throw std::invalid_argument("boundary/guess grid mismatch");
  if (opts.source &&
      static_cast<long>(opts.source->size()) != grid.total_nodes())
    throw std::invalid_argument("source size mismatch");

  const int n = grid.dim;
  const InteriorMap im(grid);

  // State = total potential values; boundary ring pinned to the boundary
  // field, interior seeded from the guess.
  std::vector<double> u(grid.total_nodes());
  for (long node = 0; node < grid.total_nodes(); ++node) {
    const auto idx = grid.unravel(node);
    u[node] = im.interior(idx) ? initial_guess.total_value(node)
                               : boundary.total_value(node);
  }

  NewtonReport report;
  bool convex_ok = true;
  double res = equation_residual_sup(eq, grid, u, opts.source, &convex_ok);
  if (eq == Equation::ma && !convex_ok)
    throw ConvexityLoss(-1, "initial guess is not strictly convex");
  report.residual_history.push_back(res);

  const int bw = im.bandwidth();
  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    if (res <= opts.tolerance) {
      report.converged = true;
      break;
    }

    const StateDerivs d = state_derivs(grid, u);
    BandedMatrix jac(static_cast<int>(im.size), bw, bw);
    std::vector<double> rhs(im.size, 0.0);

    for (long node = 0; node < grid.total_nodes(); ++node) {
      if (!d.valid[node]) continue;
      const auto idx = grid.unravel(node);
      const long row = im.row_of(idx);
      const auto x = grid.position(idx);

      SymMat coeff;  // second-order coefficient matrix of the linearization
      if (eq == Equation::ma) {
        if (!d.hess[node].positive_definite())
          throw ConvexityLoss(node, "convexity lost during Newton assembly");
        coeff = d.hess[node].inverse();
      } else {
        coeff = SymMat::identity(n).plus(d.hess[node].squared()).inverse();
      }
      const double zeroth = (eq == Equation::ma) ? n : 1.0;
      const double drift = (eq == Equation::ma) ? 0.5 * n : 0.5;

      double xdu = 0.0;
      for (int a = 0; a < n; ++a) xdu += x[a] * d.grad[node][a];
      double f;
      if (eq == Equation::ma)
        f = std::log(d.hess[node].det()) + n * u[node] - 0.5 * n * xdu;
      else
        f = lagrangian_phase(d.hess[node]) + u[node] - 0.5 * xdu;
      if (opts.source) f -= (*opts.source)[node];
      rhs[row] = -f;

      auto add_entry = [&](std::array<int, 3> nb, double w) {
        if (w == 0.0) return;
        if (im.interior(nb)) jac.add(static_cast<int>(row),
                                     static_cast<int>(im.row_of(nb)), w);
        // Dirichlet neighbors contribute nothing: delta = 0 there.
      };

      // Zeroth order.
      add_entry(idx, zeroth);
      for (int a = 0; a < n; ++a) {
        const double h = grid.spacing(a);
        // Pure second derivative.
        std::array<int, 3> up = idx, dn = idx;
        up[a]++;
        dn[a]--;
        add_entry(idx, -2.0 * coeff.at(a, a) / (h * h));
        add_entry(up, coeff.at(a, a) / (h * h));
        add_entry(dn, coeff.at(a, a) / (h * h));
        // Drift -drift * x_a d_a.
        add_entry(up, -drift * x[a] / (2.0 * h));
        add_entry(dn, drift * x[a] / (2.0 * h));
        // Mixed second derivatives.
        for (int b = a + 1; b < n; ++b) {
          const double hb = grid.spacing(b);
          const double w = 2.0 * coeff.at(a, b) / (4.0 * h * hb);
          std::array<int, 3> pp = idx, pm = idx, mp = idx, mm = idx;
          pp[a]++;
          pp[b]++;
          pm[a]++;
          pm[b]--;
          mp[a]--;
          mp[b]++;
          mm[a]--;
          mm[b]--;
          add_entry(pp, w);
          add_entry(mm, w);
          add_entry(pm, -w);
          add_entry(mp, -w);
        }
      }
    }

    jac.factor();
    const std::vector<double> delta = jac.solve(rhs);

    // Backtracking: accept when the sup residual drops by >= 10% (and the
    // iterate stays convex for the log-determinant equation).
    double alpha = 1.0;
    bool accepted = false;
    std::vector<double> trial(u.size());
    while (alpha >= opts.min_damping - 1e-15) {
      trial = u;
      for (long node = 0; node < grid.total_nodes(); ++node) {
        const auto idx = grid.unravel(node);
        if (im.interior(idx)) trial[node] += alpha * delta[im.row_of(idx)];
      }
      bool trial_convex = true;
      const double trial_res =
          equation_residual_sup(eq, grid, trial, opts.source, &trial_convex);
      const bool convexity_fine = (eq != Equation::ma) || trial_convex;
      if (convexity_fine && trial_res <= 0.9 * res) {
        u = trial;
        res = trial_res;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted)
      throw std::runtime_error(
          "Newton damping exhausted (no acceptable step above 1/64)");

    report.damping_used.push_back(alpha);
    report.residual_history.push_back(res);
    report.iterations = iter + 1;
    if (res <= opts.tolerance) {
      report.converged = true;
      break;
    }
  }

  PotentialField out;
  out.grid = grid;
  out.background_const = 0.0;
  out.background_matrix = SymMat::zero(n);
  out.perturbation = std::move(u);
  return {std::move(out), std::move(report)};
}

}  // namespace

std::pair<PotentialField, NewtonReport> newton_solve_ma(
    const GridSpec& grid, const PotentialField& boundary,
    const PotentialField& initial_guess, const NewtonOptions& opts) {
  return newton_solve(Equation::ma, grid, boundary, initial_guess, opts);
}

std::pair<PotentialField, NewtonReport> newton_solve_sl(
    const GridSpec& grid, const PotentialField& boundary,
    const PotentialField& initial_guess, const NewtonOptions& opts) {
  return newton_solve(Equation::sl, grid, boundary, initial_guess, opts);
}

RadialProfile radial_pinch_profile(const PotentialField& u, int bins) {
  if (bins < 1) throw std::invalid_argument("need at least one bin");
  const EigenRange er = hessian_eigen_range(u);
  const int n = u.grid.dim;

  double r_max = 0.0;
  for (long node = 0; node < u.grid.total_nodes(); ++node) {
    if (!er.valid[node]) continue;
    const auto x = u.node_position(node);
    double r2 = 0.0;
    for (int a = 0; a < n; ++a) r2 += x[a] * x[a];
    r_max = std::max(r_max, std::sqrt(r2));
  }
  const double width = r_max / bins;

  RadialProfile out;
  out.threshold = 2.0 * (n - 1) / n;
  out.radius.assign(bins, 0.0);
  out.inf_value.assign(bins, std::numeric_limits<double>::infinity());
  for (int b = 0; b < bins; ++b) out.radius[b] = (b + 0.5) * width;

  for (long node = 0; node < u.grid.total_nodes(); ++node) {
    if (!er.valid[node]) continue;
    const auto x = u.node_position(node);
    double r2 = 0.0;
    for (int a = 0; a < n; ++a) r2 += x[a] * x[a];
    const double r = std::sqrt(r2);
    int b = std::min(bins - 1, static_cast<int>(r / width));
    out.inf_value[b] = std::min(out.inf_value[b], r2 * er.mu_field[node]);
  }
  return out;
}

}  // namespace lmaflow
