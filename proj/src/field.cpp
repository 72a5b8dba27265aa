#include "lmaflow/field.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lmaflow {

double PotentialField::total_value(long node) const {
  const auto x = grid.position(grid.unravel(node));
  return background_const + 0.5 * background_matrix.quad_form(x) +
         perturbation[node];
}

std::array<double, 3> PotentialField::node_position(long node) const {
  return grid.position(grid.unravel(node));
}

PotentialField make_quadratic(const GridSpec& grid, double c, const SymMat& A) {
  grid.validate();
  if (A.n != grid.dim)
    throw std::invalid_argument("background matrix dim mismatch");
  PotentialField u;
  u.grid = grid;
  u.background_const = c;
  u.background_matrix = A;
  u.perturbation.assign(grid.total_nodes(), 0.0);
  return u;
}

void set_perturbation(
    PotentialField& u,
    const std::function<double(const std::array<double, 3>&)>& f) {
  const long n = u.grid.total_nodes();
  u.perturbation.resize(n);
  for (long node = 0; node < n; ++node)
    u.perturbation[node] = f(u.node_position(node));
}

void apply_waveform(PotentialField& u, const std::string& preset,
                    double amplitude, int wavenumber) {
  const GridSpec& g = u.grid;
  const bool torus = g.topology == Topology::torus;
  auto xi = [&](const std::array<double, 3>& x, int a) {
    if (torus) return wavenumber * kTwoPi * (x[a] - g.origin[a]) / g.extent[a];
    // Box: normalized coordinate in [-1, 1].
    return 2.0 * (x[a] - g.origin[a]) / g.extent[a] - 1.0;
  };
  if (preset == "none") {
    std::fill(u.perturbation.begin(), u.perturbation.end(), 0.0);
    return;
  }
  if (preset == "sine" || preset == "cosine" || preset == "sineprod") {
    set_perturbation(u, [&](const std::array<double, 3>& x) {
      double sum = 0.0, prod = 1.0;
      for (int a = 0; a < g.dim; ++a) {
        const double arg =
            torus ? xi(x, a) : wavenumber * 3.14159265358979323846 * xi(x, a);
        sum += (preset == "cosine") ? std::cos(arg) : std::sin(arg);
        prod *= std::sin(arg);
      }
      return amplitude * (preset == "sineprod" ? prod : sum);
    });
    return;
  }
  if (preset == "bump") {
    if (torus) throw std::invalid_argument("bump preset requires box grid");
    set_perturbation(u, [&](const std::array<double, 3>& x) {
      double prod = 1.0;
      for (int a = 0; a < g.dim; ++a) {
        const double s = 1.0 - xi(x, a) * xi(x, a);
        prod *= s * s;
      }
      return amplitude * prod;
    });
    return;
  }
  throw std::invalid_argument("unknown waveform preset '" + preset + "'");
}

DerivativeTensorField derivative_tensors(const PotentialField& u, int order) {
  DerivativeTensorField t = sample_derivatives(u.grid, u.perturbation, order);
  if (order > 2) return t;
  const long nnodes = u.grid.total_nodes();
  if (order == 2) {
    for (long node = 0; node < nnodes; ++node) {
      if (!t.valid[node]) continue;
      for (int c = 0; c < t.ncomp; ++c)
        t.values[node * t.ncomp + c] +=
            u.background_matrix.at(t.comps[c][0], t.comps[c][1]);
    }
  } else {
    for (long node = 0; node < nnodes; ++node) {
      if (!t.valid[node]) continue;
      const auto ax = u.background_matrix.matvec(u.node_position(node));
      for (int c = 0; c < t.ncomp; ++c)
        t.values[node * t.ncomp + c] += ax[t.comps[c][0]];
    }
  }
  return t;
}

std::vector<SymMat> hessian_field(const PotentialField& u,
                                  std::vector<std::uint8_t>& valid) {
  const DerivativeTensorField t = derivative_tensors(u, 2);
  const long nnodes = u.grid.total_nodes();
  std::vector<SymMat> h(nnodes, SymMat::zero(u.grid.dim));
  for (long node = 0; node < nnodes; ++node) {
    if (!t.valid[node]) continue;
    for (int c = 0; c < t.ncomp; ++c)
      h[node].at(t.comps[c][0], t.comps[c][1]) = t.component(node, c);
  }
  valid = t.valid;
  return h;
}

std::vector<std::array<double, 3>> gradient_field(
    const PotentialField& u, std::vector<std::uint8_t>& valid) {
  const DerivativeTensorField t = derivative_tensors(u, 1);
  const long nnodes = u.grid.total_nodes();
  std::vector<std::array<double, 3>> g(nnodes, std::array<double, 3>{});
  for (long node = 0; node < nnodes; ++node) {
    if (!t.valid[node]) continue;
    for (int c = 0; c < t.ncomp; ++c)
      g[node][t.comps[c][0]] = t.component(node, c);
  }
  valid = t.valid;
  return g;
}

EigenRange hessian_eigen_range(const PotentialField& u) {
  std::vector<std::uint8_t> valid;
  const auto h = hessian_field(u, valid);
  EigenRange r;
  r.valid = valid;
  r.mu_field.assign(h.size(), 0.0);
  bool first = true;
  for (long node = 0; node < static_cast<long>(h.size()); ++node) {
    if (!valid[node]) continue;
    const auto lam = h[node].eigenvalues();
    const double lo = lam[0], hi = lam[u.grid.dim - 1];
    if (!std::isfinite(lo) || !std::isfinite(hi))
      throw std::runtime_error("non-finite Hessian sample at node " +
                               std::to_string(node));
    r.mu_field[node] = lo;
    if (first) {
      r.mu_min = lo;
      r.mu_max = hi;
      first = false;
    } else {
      r.mu_min = std::min(r.mu_min, lo);
      r.mu_max = std::max(r.mu_max, hi);
    }
  }
  if (first) throw std::runtime_error("no valid nodes for eigen range");
  return r;
}

BoundsReport check_hessian_bounds(const PotentialField& u,
                                  const HessianBounds& bounds) {
  if (!(bounds.lo > 0.0) || bounds.lo > bounds.hi)
    throw std::invalid_argument("bounds must satisfy 0 < lo <= hi");
  const EigenRange r = hessian_eigen_range(u);
  std::vector<std::uint8_t> valid;
  const auto h = hessian_field(u, valid);
  BoundsReport rep;
  rep.mu_min = r.mu_min;
  rep.mu_max = r.mu_max;
  rep.slack_low = r.mu_min - bounds.lo;
  rep.slack_high = bounds.hi - r.mu_max;
  rep.ok = rep.slack_low >= 0.0 && rep.slack_high >= 0.0;
  for (long node = 0; node < static_cast<long>(h.size()); ++node) {
    if (!valid[node]) continue;
    if (r.mu_field[node] == r.mu_min && rep.worst_low_node < 0)
      rep.worst_low_node = node;
    if (h[node].max_eigenvalue() == r.mu_max && rep.worst_high_node < 0)
      rep.worst_high_node = node;
  }
  return rep;
}

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_field_snapshot(const PotentialField& u, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write snapshot file " + path);
  const GridSpec& g = u.grid;
  out << "lmaflow-field 1\n";
  out << "dim " << g.dim << "\n";
  out << "topology " << topology_name(g.topology) << "\n";
  out << "origin";
  for (int a = 0; a < g.dim; ++a) out << " " << fmt17(g.origin[a]);
  out << "\nextent";
  for (int a = 0; a < g.dim; ++a) out << " " << fmt17(g.extent[a]);
  out << "\npoints";
  for (int a = 0; a < g.dim; ++a) out << " " << g.points[a];
  out << "\nc " << fmt17(u.background_const) << "\nA";
  for (int i = 0; i < g.dim; ++i)
    for (int j = 0; j < g.dim; ++j)
      out << " " << fmt17(u.background_matrix.at(i, j));
  out << "\nphi " << g.total_nodes() << "\n";
  for (long node = 0; node < g.total_nodes(); ++node)
    out << fmt17(u.perturbation[node]) << "\n";
  if (!out) throw std::runtime_error("snapshot write failed for " + path);
}

PotentialField read_field_snapshot(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read snapshot file " + path);
  std::string tag;
  int version = 0;
  in >> tag >> version;
  if (tag != "lmaflow-field" || version != 1)
    throw std::runtime_error("bad snapshot header in " + path);

  PotentialField u;
  GridSpec& g = u.grid;
  std::string key;
  in >> key;
  if (key != "dim") throw std::runtime_error("expected dim in " + path);
  in >> g.dim;
  in >> key;
  if (key != "topology") throw std::runtime_error("expected topology");
  std::string topo;
  in >> topo;
  g.topology = topology_from_name(topo);
  in >> key;
  if (key != "origin") throw std::runtime_error("expected origin");
  for (int a = 0; a < g.dim; ++a) in >> g.origin[a];
  in >> key;
  if (key != "extent") throw std::runtime_error("expected extent");
  for (int a = 0; a < g.dim; ++a) in >> g.extent[a];
  in >> key;
  if (key != "points") throw std::runtime_error("expected points");
  for (int a = 0; a < g.dim; ++a) in >> g.points[a];
  in >> key;
  if (key != "c") throw std::runtime_error("expected c");
  in >> u.background_const;
  in >> key;
  if (key != "A") throw std::runtime_error("expected A");
  u.background_matrix = SymMat::zero(g.dim);
  for (int i = 0; i < g.dim; ++i)
    for (int j = 0; j < g.dim; ++j) {
      double v;
      in >> v;
      if (j >= i) u.background_matrix.at(i, j) = v;
    }
  in >> key;
  if (key != "phi") throw std::runtime_error("expected phi");
  long count = 0;
  in >> count;
  g.validate();
  if (count != g.total_nodes())
    throw std::runtime_error("phi count mismatch in " + path);
  u.perturbation.resize(count);
  for (long node = 0; node < count; ++node) in >> u.perturbation[node];
  if (!in) throw std::runtime_error("truncated snapshot file " + path);
  return u;
}

}  // namespace lmaflow
