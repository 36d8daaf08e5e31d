#pragma once

#include <array>
#include <cstddef>
#include <string_view>
#include <vector>

namespace bohmkit {

using Point = std::array<double, 2>;

enum class Boundary { periodic, box, absorbing };

Boundary parse_boundary(std::string_view name);
std::string_view to_string(Boundary b);

struct AxisSpec {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t points = 0;
};

/// Complex absorbing potential layer: W(d) = -strength * sin^2(pi d / (2 w)),
/// d measured from the inner edge of a layer of w cells.
struct CapSpec {
  std::size_t width_cells = 0;
  double strength = 0.0;
};

struct GridSpec {
  std::vector<AxisSpec> axes;
  Boundary boundary = Boundary::periodic;
  CapSpec cap{};
};

/// Uniform Cartesian mesh in one or two dimensions. Nodes sit at
/// x_i = origin + i * spacing, both extents included. Storage is row-major
/// with axis 0 slowest.
class Grid {
 public:
  static constexpr std::size_t kMinPoints = 8;
  static constexpr std::size_t kMinCapCells = 4;

  Grid() = default;

  int dims() const { return dims_; }
  std::size_t points(int axis) const { return n_[axis]; }
  double spacing(int axis) const { return dx_[axis]; }
  double origin(int axis) const { return origin_[axis]; }
  double upper(int axis) const { return origin_[axis] + dx_[axis] * double(n_[axis] - 1); }
  double coord(int axis, std::size_t i) const { return origin_[axis] + dx_[axis] * double(i); }
  std::size_t size() const { return n_[0] * n_[1]; }
  std::size_t index(std::size_t i0, std::size_t i1 = 0) const { return i0 * n_[1] + i1; }
  Point node(std::size_t flat) const;

  Boundary boundary() const { return boundary_; }
  const CapSpec& cap() const { return cap_; }

  /// Product of spacings: the volume element of the quadrature.
  double cell_volume() const { return dx_[0] * (dims_ == 2 ? dx_[1] : 1.0); }

  /// Trapezoid weight of node i along the axis, in units of spacing.
  double trapezoid_weight(int axis, std::size_t i) const;
  /// Full quadrature weight (including the volume element) of a flat node.
  double weight(std::size_t flat) const;

  bool contains(const Point& p) const;

  /// Angular wavenumber of FFT bin j along an axis (period n * spacing).
  double wavenumber(int axis, std::size_t j) const;

  /// Absorbing potential W <= 0 at a node, summed over axes (0 unless absorbing).
  double cap_potential(std::size_t flat) const;

  bool same_layout(const Grid& other, double rel_tol = 1e-12) const;

 private:
  friend Grid make_grid(const GridSpec& spec);

  int dims_ = 1;
  std::array<std::size_t, 2> n_{1, 1};
  std::array<double, 2> dx_{1.0, 1.0};
  std::array<double, 2> origin_{0.0, 0.0};
  Boundary boundary_ = Boundary::periodic;
  CapSpec cap_{};
};

Grid make_grid(const GridSpec& spec);

/// Convenience: a 1D grid.
Grid make_grid_1d(double lo, double hi, std::size_t points, Boundary b = Boundary::periodic,
                  CapSpec cap = {});
/// Convenience: a 2D grid with the same axis repeated.
Grid make_grid_2d(double lo, double hi, std::size_t points, Boundary b = Boundary::periodic,
                  CapSpec cap = {});
Grid make_grid_2d(const AxisSpec& a0, const AxisSpec& a1, Boundary b = Boundary::periodic,
                  CapSpec cap = {});

/// The one-dimensional grid made of a single axis of a grid.
Grid axis_grid(const Grid& g, int axis);

}  // namespace bohmkit
