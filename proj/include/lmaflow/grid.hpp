#pragma once

#include <array>
#include <string>

namespace lmaflow {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

enum class Topology { torus, box };

std::string topology_name(Topology t);
Topology topology_from_name(const std::string& name);

/// Uniform rectangular grid in 1..3 dimensions.
///
/// Torus grids sample [origin, origin + extent) with index arithmetic
/// modulo points; box grids include both endpoints of each axis.
struct GridSpec {
  int dim = 1;
  Topology topology = Topology::torus;
  std::array<double, 3> origin{};
  std::array<double, 3> extent{};
  std::array<int, 3> points{1, 1, 1};

  double spacing(int axis) const;
  double min_spacing() const;
  long total_nodes() const;

  std::array<double, 3> position(const std::array<int, 3>& idx) const;

  /// Lexicographic linear index: last axis varies fastest.
  long linear_index(const std::array<int, 3>& idx) const;
  std::array<int, 3> unravel(long lin) const;

  /// Wrap an index along an axis (torus); no-op bounds otherwise.
  int wrap(int i, int axis) const;

  bool same_layout(const GridSpec& other) const;

  /// Throws std::invalid_argument on an unusable spec.
  void validate() const;
};

GridSpec make_torus(int dim, int points_per_axis, double extent = kTwoPi,
                    double origin = 0.0);
GridSpec make_box(int dim, double lo, double hi, int points_per_axis);

}  // namespace lmaflow
