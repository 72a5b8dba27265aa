#include "lmaflow/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace lmaflow {

std::string topology_name(Topology t) {
  return t == Topology::torus ? "torus" : "box";
}

Topology topology_from_name(const std::string& name) {
  if (name == "torus") return Topology::torus;
  if (name == "box") return Topology::box;
  throw std::invalid_argument("unknown topology '" + name + "'");
}

double GridSpec::spacing(int axis) const {
  if (topology == Topology::torus) return extent[axis] / points[axis];
  return extent[axis] / (points[axis] - 1);
}

double GridSpec::min_spacing() const {
  double h = spacing(0);
  for (int a = 1; a < dim; ++a) h = std::min(h, spacing(a));
  return h;
}

long GridSpec::total_nodes() const {
  long n = 1;
  for (int a = 0; a < dim; ++a) n *= points[a];
  return n;
}

std::array<double, 3> GridSpec::position(const std::array<int, 3>& idx) const {
  std::array<double, 3> x{};
  for (int a = 0; a < dim; ++a) x[a] = origin[a] + idx[a] * spacing(a);
  return x;
}

long GridSpec::linear_index(const std::array<int, 3>& idx) const {
  long lin = 0;
  for (int a = 0; a < dim; ++a) lin = lin * points[a] + idx[a];
  return lin;
}

std::array<int, 3> GridSpec::unravel(long lin) const {
  std::array<int, 3> idx{};
  for (int a = dim - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(lin % points[a]);
    lin /= points[a];
  }
  return idx;
}

int GridSpec::wrap(int i, int axis) const {
  const int n = points[axis];
  int r = i % n;
  if (r < 0) r += n;
  return r;
}

bool GridSpec::same_layout(const GridSpec& other) const {
  if (dim != other.dim || topology != other.topology) return false;
  for (int a = 0; a < dim; ++a) {
    if (points[a] != other.points[a]) return false;
    if (std::abs(origin[a] - other.origin[a]) > 1e-14) return false;
    if (std::abs(extent[a] - other.extent[a]) > 1e-14) return false;
  }
  return true;
}

void GridSpec::validate() const {
  if (dim < 1 || dim > 3) throw std::invalid_argument("grid dim must be 1..3");
  for (int a = 0; a < dim; ++a) {
    if (points[a] < 8)
      throw std::invalid_argument("grid needs >= 8 points per axis");
    if (!(extent[a] > 0.0))
      throw std::invalid_argument("grid extent must be positive");
    if (!(spacing(a) > 0.0))
      throw std::invalid_argument("grid spacing must be positive");
  }
  if (topology == Topology::torus) {
    const double h0 = spacing(0);
    for (int a = 1; a < dim; ++a) {
      if (std::abs(spacing(a) - h0) > 1e-12 * h0)
        throw std::invalid_argument("torus grid requires uniform spacing");
    }
  }
}

GridSpec make_torus(int dim, int points_per_axis, double extent,
                    double origin) {
  GridSpec g;
  g.dim = dim;
  g.topology = Topology::torus;
  for (int a = 0; a < dim; ++a) {
    g.origin[a] = origin;
    g.extent[a] = extent;
    g.points[a] = points_per_axis;
  }
  g.validate();
  return g;
}

GridSpec make_box(int dim, double lo, double hi, int points_per_axis) {
  GridSpec g;
  g.dim = dim;
  g.topology = Topology::box;
  for (int a = 0; a < dim; ++a) {
    g.origin[a] = lo;
    g.extent[a] = hi - lo;
    g.points[a] = points_per_axis;
  }
  g.validate();
  return g;
}

}  // namespace lmaflow
