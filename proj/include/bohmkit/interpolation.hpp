#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>

#include "bohmkit/grid.hpp"

namespace bohmkit {

/// Four-point Lagrange stencil around fractional index s on n nodes; the
/// stencil is shifted inward near the ends.
struct CubicStencil {
  std::size_t first = 0;
  std::array<double, 4> w{};
};

inline CubicStencil cubic_stencil(double s, std::size_t n) {
  CubicStencil st;
  const double fl = std::floor(s);
  long first = long(fl) - 1;
  first = std::clamp(first, 0L, long(n) - 4);
  st.first = std::size_t(first);
  const double t = s - double(first);
  st.w[0] = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
  st.w[1] = t * (t - 2.0) * (t - 3.0) / 2.0;
  st.w[2] = -t * (t - 1.0) * (t - 3.0) / 2.0;
  st.w[3] = t * (t - 1.0) * (t - 2.0) / 6.0;
  return st;
}

inline double fractional_index(const Grid& g, int axis, double x) {
  return (x - g.origin(axis)) / g.spacing(axis);
}

/// Cubic (1D) or bicubic (2D) interpolation of node data.
template <class T>
T interpolate(const Grid& g, std::span<const T> data, const Point& r) {
  const auto s0 = cubic_stencil(fractional_index(g, 0, r[0]), g.points(0));
  if (g.dims() == 1) {
    T acc{};
    for (int a = 0; a < 4; ++a) acc += s0.w[std::size_t(a)] * data[s0.first + std::size_t(a)];
    return acc;
  }
  const auto s1 = cubic_stencil(fractional_index(g, 1, r[1]), g.points(1));
  T acc{};
  for (int a = 0; a < 4; ++a) {
    T row{};
    for (int b = 0; b < 4; ++b)
      row += s1.w[std::size_t(b)] * data[g.index(s0.first + std::size_t(a), s1.first + std::size_t(b))];
    acc += s0.w[std::size_t(a)] * row;
  }
  return acc;
}

}  // namespace bohmkit
