#pragma once

// Finite-difference helpers shared by the field diagnostics.

#include <cstddef>
#include <vector>

#include "bohmkit/grid.hpp"

namespace bohmkit::detail {

inline std::size_t axis_pos(const Grid& g, std::size_t flat, int axis) {
  return axis == 0 ? flat / g.points(1) : flat % g.points(1);
}

inline std::size_t axis_stride(const Grid& g, int axis) { return axis == 0 ? g.points(1) : 1; }

/// Flat index of the node `delta` steps along an axis, wrapping on periodic
/// grids; -1 if it falls off a non-periodic grid.
inline long neighbor(const Grid& g, std::size_t flat, int axis, long delta) {
  const long n = long(g.points(axis));
  const long i = long(axis_pos(g, flat, axis));
  long j = i + delta;
  if (g.boundary() == Boundary::periodic) {
    j = ((j % n) + n) % n;
  } else if (j < 0 || j >= n) {
    return -1;
  }
  return long(flat) + (j - i) * long(axis_stride(g, axis));
}

/// Second derivative of nodal data along an axis: centred 3-point stencil,
/// one-sided 4-point stencils at non-periodic edges.
template <class T>
T second_derivative(const Grid& g, const std::vector<T>& f, std::size_t flat, int axis) {
  const double h2 = g.spacing(axis) * g.spacing(axis);
  const long up = neighbor(g, flat, axis, 1), down = neighbor(g, flat, axis, -1);
  if (up >= 0 && down >= 0) return (f[std::size_t(up)] - 2.0 * f[flat] + f[std::size_t(down)]) / h2;
  const long s = up >= 0 ? 1 : -1;
  const long st = s * long(axis_stride(g, axis));
  auto at = [&](long k) { return f[std::size_t(long(flat) + k * st)]; };
  return (2.0 * at(0) - 5.0 * at(1) + 4.0 * at(2) - at(3)) / h2;
}

/// First derivative of nodal data along an axis (centred, one-sided at edges).
template <class T>
T first_derivative(const Grid& g, const std::vector<T>& f, std::size_t flat, int axis) {
  const double h = g.spacing(axis);
  const long up = neighbor(g, flat, axis, 1), down = neighbor(g, flat, axis, -1);
  if (up >= 0 && down >= 0) return (f[std::size_t(up)] - f[std::size_t(down)]) / (2.0 * h);
  if (up >= 0) return (f[std::size_t(up)] - f[flat]) / h;
  return (f[flat] - f[std::size_t(down)]) / h;
}

}  // namespace bohmkit::detail
