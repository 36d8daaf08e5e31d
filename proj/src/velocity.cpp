#include "bohmkit/velocity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bohmkit/interpolation.hpp"

namespace bohmkit {

namespace {

std::size_t axis_index(const Grid& g, std::size_t flat, int axis) {
  return axis == 0 ? flat / g.points(1) : flat % g.points(1);
}

std::size_t shifted(const Grid& g, std::size_t flat, int axis, long delta) {
  const std::size_t i = axis_index(g, flat, axis);
  const long n = long(g.points(axis));
  long j = long(i) + delta;
  if (g.boundary() == Boundary::periodic) j = ((j % n) + n) % n;
  const std::size_t stride = axis == 0 ? g.points(1) : 1;
  return flat + std::size_t(j - long(i)) * stride;  // wraps correctly in unsigned arithmetic
}

}  // namespace

double velocity_cap(const WaveFunction& wf, int axis) {
  return kVelocityCapFactor * wf.hbar() * (std::numbers::pi / wf.grid().spacing(axis)) / wf.mass(axis);
}

namespace {

// increments touching a node at the noise floor carry no phase information
double floored_increment(const cplx& a, const cplx& b, double floor) {
  return std::norm(a) < floor || std::norm(b) < floor ? 0.0 : phase_increment(a, b);
}

double node_velocity_floor(const WaveFunction& wf, std::size_t flat, int axis, double floor) {
  const Grid& g = wf.grid();
  const std::size_t i = axis_index(g, flat, axis);
  const std::size_t n = g.points(axis);
  const double scale = wf.hbar() / (wf.mass(axis) * g.spacing(axis));
  const bool periodic = g.boundary() == Boundary::periodic;
  double val;
  if (!periodic && i == 0) val = scale * floored_increment(wf[flat], wf[shifted(g, flat, axis, 1)], floor);
  else if (!periodic && i + 1 == n) val = scale * floored_increment(wf[shifted(g, flat, axis, -1)], wf[flat], floor);
  else {
    const cplx c = wf[flat];
    const double up = floored_increment(c, wf[shifted(g, flat, axis, 1)], floor);
    const double down = floored_increment(wf[shifted(g, flat, axis, -1)], c, floor);
    val = 0.5 * scale * (up + down);
  }
  const double cap = velocity_cap(wf, axis);
  return std::clamp(val, -cap, cap);
}

}  // namespace

double node_velocity(const WaveFunction& wf, std::size_t flat, int axis) {
  return node_velocity_floor(wf, flat, axis, kPhaseFloorFraction * wf.max_density());
}

VelocityField velocity_field(const WaveFunction& wf) {
  const Grid& g = wf.grid();
  VelocityField f;
  f.grid = g;
  f.time = wf.time();
  f.rho_floor = kRhoFloorFraction * wf.max_density();
  f.mask.assign(g.size(), 0);
  for (std::size_t i = 0; i < g.size(); ++i) f.mask[i] = std::norm(wf[i]) < f.rho_floor ? 1 : 0;
  const bool periodic = g.boundary() == Boundary::periodic;
  const double noise = kPhaseFloorFraction * wf.max_density();
  for (int a = 0; a < g.dims(); ++a) {
    const double cap = velocity_cap(wf, a);
    const double scale = wf.hbar() / (wf.mass(a) * g.spacing(a));
    f.cap[std::size_t(a)] = cap;
    auto& v = f.v[std::size_t(a)];
    v.resize(g.size());
    const std::size_t n = g.points(a);
    const std::size_t stride = a == 0 ? (g.dims() == 2 ? g.points(1) : 1) : 1;
    const std::size_t lines = g.size() / n;
    // inc[i] is the increment from node i to node i + 1 (wrapping when periodic)
    std::vector<double> inc(n);
    for (std::size_t l = 0; l < lines; ++l) {
      const std::size_t base = a == 0 ? l : l * n;
      auto at = [&](std::size_t i) { return wf[base + i * stride]; };
      for (std::size_t i = 0; i + 1 < n; ++i) inc[i] = floored_increment(at(i), at(i + 1), noise);
      inc[n - 1] = periodic ? floored_increment(at(n - 1), at(0), noise) : 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double val;
        if (!periodic && i == 0) val = scale * inc[0];
        else if (!periodic && i + 1 == n) val = scale * inc[n - 2];
        else val = 0.5 * scale * (inc[i] + inc[i == 0 ? n - 1 : i - 1]);
        v[base + i * stride] = std::clamp(val, -cap, cap);
      }
    }
  }
  return f;
}

Point VelocityField::at(const Point& r) const {
  Point out{0.0, 0.0};
  for (int a = 0; a < grid.dims(); ++a) {
    const double val = interpolate<double>(grid, v[std::size_t(a)], r);
    out[std::size_t(a)] = std::clamp(val, -cap[std::size_t(a)], cap[std::size_t(a)]);
  }
  return out;
}

bool VelocityField::masked_at(const Point& r) const {
  auto nearest = [&](int a) {
    const double s = std::round(fractional_index(grid, a, r[std::size_t(a)]));
    return std::size_t(std::clamp(s, 0.0, double(grid.points(a) - 1)));
  };
  const std::size_t i0 = nearest(0);
  const std::size_t i1 = grid.dims() == 2 ? nearest(1) : 0;
  return mask[grid.index(i0, i1)] != 0;
}

std::size_t VelocityField::masked_count() const {
  return std::size_t(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

Point velocity_at(const WaveFunction& wf, const Point& r) {
  const Grid& g = wf.grid();
  const double floor = kPhaseFloorFraction * wf.max_density();
  Point out{0.0, 0.0};
  const auto s0 = cubic_stencil(fractional_index(g, 0, r[0]), g.points(0));
  if (g.dims() == 1) {
    double acc = 0.0;
    for (std::size_t a = 0; a < 4; ++a) acc += s0.w[a] * node_velocity_floor(wf, s0.first + a, 0, floor);
    const double cap = velocity_cap(wf, 0);
    out[0] = std::clamp(acc, -cap, cap);
    return out;
  }
  const auto s1 = cubic_stencil(fractional_index(g, 1, r[1]), g.points(1));
  for (int ax = 0; ax < 2; ++ax) {
    double acc = 0.0;
    for (std::size_t a = 0; a < 4; ++a) {
      double row = 0.0;
      for (std::size_t b = 0; b < 4; ++b)
        row += s1.w[b] * node_velocity_floor(wf, g.index(s0.first + a, s1.first + b), ax, floor);
      acc += s0.w[a] * row;
    }
    const double cap = velocity_cap(wf, ax);
    out[std::size_t(ax)] = std::clamp(acc, -cap, cap);
  }
  return out;
}

}  // namespace bohmkit
