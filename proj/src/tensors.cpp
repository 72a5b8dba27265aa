#include "lmaflow/tensors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lmaflow {

namespace {

// Per-axis stencil for the m-th derivative (m = 0..4) at offsets -2..2,
// built by convolving central first/second differences.
struct AxisStencil {
  std::array<double, 5> w{};  // offsets -2..2
  int reach = 0;
};

AxisStencil axis_stencil(int m, double h) {
  AxisStencil s;
  switch (m) {
    case 0:
      s.w = {0, 0, 1, 0, 0};
      s.reach = 0;
      break;
    case 1:
      s.w = {0, -0.5 / h, 0, 0.5 / h, 0};
      s.reach = 1;
      break;
    case 2: {
      const double h2 = h * h;
      s.w = {0, 1 / h2, -2 / h2, 1 / h2, 0};
      s.reach = 1;
      break;
    }
    case 3: {
      const double h3 = h * h * h;
      s.w = {-0.5 / h3, 1 / h3, 0, -1 / h3, 0.5 / h3};
      s.reach = 2;
      break;
    }
    case 4: {
      const double h4 = h * h * h * h;
      s.w = {1 / h4, -4 / h4, 6 / h4, -4 / h4, 1 / h4};
      s.reach = 2;
      break;
    }
    default:
      throw std::invalid_argument("derivative order out of range");
  }
  return s;
}

int factorial(int k) {
  int f = 1;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

}  // namespace

std::vector<std::array<int, 4>> canonical_tuples(int dim, int order) {
  std::vector<std::array<int, 4>> out;
  std::array<int, 4> t{};
  // Nondecreasing tuples of length `order` over axes 0..dim-1.
  auto rec = [&](auto&& self, int pos, int lo) -> void {
    if (pos == order) {
      out.push_back(t);
      return;
    }
    for (int a = lo; a < dim; ++a) {
      t[pos] = a;
      self(self, pos + 1, a);
    }
  };
  rec(rec, 0, 0);
  return out;
}

int tensor_interior_margin(Topology topology, int order) {
  if (topology == Topology::torus) return 0;
  return order <= 2 ? 1 : 2;
}

double DerivativeTensorField::component_at(long node,
                                           std::array<int, 4> idx) const {
  std::sort(idx.begin(), idx.begin() + order);
  for (int c = 0; c < ncomp; ++c) {
    bool match = true;
    for (int k = 0; k < order; ++k)
      if (comps[c][k] != idx[k]) {
        match = false;
        break;
      }
    if (match) return component(node, c);
  }
  throw std::logic_error("tensor component lookup failed");
}

double DerivativeTensorField::norm_sq(long node) const {
  double s = 0.0;
  for (int c = 0; c < ncomp; ++c) {
    const double v = component(node, c);
    s += multiplicity[c] * v * v;
  }
  return s;
}

DerivativeTensorField sample_derivatives(const GridSpec& grid,
                                         const std::vector<double>& samples,
                                         int order) {
  if (order < 1 || order > 4)
    throw std::invalid_argument("derivative order must be 1..4");
  grid.validate();
  const long nnodes = grid.total_nodes();
  if (static_cast<long>(samples.size()) != nnodes)
    throw std::invalid_argument("sample count does not match grid");

  DerivativeTensorField out;
  out.grid = grid;
  out.order = order;
  out.comps = canonical_tuples(grid.dim, order);
  out.ncomp = static_cast<int>(out.comps.size());
  out.margin = tensor_interior_margin(grid.topology, order);
  out.values.assign(nnodes * out.ncomp, 0.0);
  out.valid.assign(nnodes, 0);

  for (const auto& c : out.comps) {
    std::array<int, 3> mult{};
    for (int k = 0; k < order; ++k) mult[c[k]]++;
    int m = factorial(order);
    for (int a = 0; a < 3; ++a) m /= factorial(mult[a]);
    out.multiplicity.push_back(m);
  }

  // Per-component, per-axis stencils with their nonzero offsets.
  struct CompPlan {
    std::array<AxisStencil, 3> st;
    std::array<std::vector<int>, 3> offs;
    int reach = 0;
  };
  std::vector<CompPlan> plans(out.ncomp);
  for (int c = 0; c < out.ncomp; ++c) {
    std::array<int, 3> mult{};
    for (int k = 0; k < order; ++k) mult[out.comps[c][k]]++;
    auto& plan = plans[c];
    for (int a = 0; a < grid.dim; ++a) {
      plan.st[a] = axis_stencil(mult[a], grid.spacing(a));
      for (int o = -2; o <= 2; ++o)
        if (plan.st[a].w[o + 2] != 0.0) plan.offs[a].push_back(o);
      plan.reach = std::max(plan.reach, plan.st[a].reach);
    }
  }

  const int margin = out.margin;
  const bool torus = grid.topology == Topology::torus;

  std::array<int, 3> idx{};
  for (long node = 0; node < nnodes; ++node) {
    idx = grid.unravel(node);
    if (!torus) {
      bool interior = true;
      for (int a = 0; a < grid.dim; ++a)
        if (idx[a] < margin || idx[a] >= grid.points[a] - margin) {
          interior = false;
          break;
        }
      if (!interior) continue;
    }
    out.valid[node] = 1;

    for (int c = 0; c < out.ncomp; ++c) {
      const auto& plan = plans[c];
      double acc = 0.0;
      // Tensor-product application over nonzero offsets of each axis.
      std::array<int, 3> oi{};
      const int d = grid.dim;
      auto apply = [&](auto&& self, int axis, double w) -> void {
        if (axis == d) {
          std::array<int, 3> nb = idx;
          for (int a = 0; a < d; ++a) {
            int i = idx[a] + oi[a];
            nb[a] = torus ? grid.wrap(i, a) : i;
          }
          acc += w * samples[grid.linear_index(nb)];
          return;
        }
        for (int o : plan.offs[axis]) {
          oi[axis] = o;
          self(self, axis + 1, w * plan.st[axis].w[o + 2]);
        }
      };
      apply(apply, 0, 1.0);
      out.values[node * out.ncomp + c] = acc;
    }
  }
  return out;
}

double interpolate_sample(const GridSpec& grid,
                          const std::vector<double>& samples,
                          const std::array<double, 3>& x) {
  const int kPts = 6;  // exact on degree-5 polynomials
  std::array<std::array<double, kPts>, 3> w{};
  std::array<int, 3> base{};
  for (int a = 0; a < grid.dim; ++a) {
    const double xi = (x[a] - grid.origin[a]) / grid.spacing(a);
    int ib = static_cast<int>(std::floor(xi));
    int lo = ib - 2;
    if (grid.topology == Topology::box) {
      // Shift the window inward near edges; error if it cannot fit.
      lo = std::max(0, std::min(lo, grid.points[a] - kPts));
      if (xi < -1e-9 || xi > grid.points[a] - 1 + 1e-9)
        throw std::domain_error("interpolation point outside source box");
      if (grid.points[a] < kPts)
        throw std::domain_error("grid too coarse for interpolation");
    }
    base[a] = lo;
    for (int j = 0; j < kPts; ++j) {
      double p = 1.0;
      for (int m = 0; m < kPts; ++m) {
        if (m == j) continue;
        p *= (xi - (lo + m)) / static_cast<double>(j - m);
      }
      w[a][j] = p;
    }
  }

  double acc = 0.0;
  std::array<int, 3> off{};
  auto rec = [&](auto&& self, int axis, double weight) -> void {
    if (axis == grid.dim) {
      std::array<int, 3> idx{};
      for (int a = 0; a < grid.dim; ++a) {
        int i = base[a] + off[a];
        idx[a] = grid.topology == Topology::torus ? grid.wrap(i, a) : i;
      }
      acc += weight * samples[grid.linear_index(idx)];
      return;
    }
    for (int j = 0; j < kPts; ++j) {
      off[axis] = j;
      self(self, axis + 1, weight * w[axis][j]);
    }
  };
  rec(rec, 0, 1.0);
  return acc;
}

}  // namespace lmaflow
