#include "bohmkit/grid.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "bohmkit/error.hpp"

namespace bohmkit {

Boundary parse_boundary(std::string_view name) {
  if (name == "periodic") return Boundary::periodic;
  if (name == "box") return Boundary::box;
  if (name == "absorbing") return Boundary::absorbing;
  throw ConfigError("unknown boundary '" + std::string(name) +
                    "' (expected periodic, box or absorbing)");
}

std::string_view to_string(Boundary b) {
  switch (b) {
    case Boundary::periodic: return "periodic";
    case Boundary::box: return "box";
    case Boundary::absorbing: return "absorbing";
  }
  return "periodic";
}

Grid make_grid(const GridSpec& spec) {
  using detail::require;
  require(spec.axes.size() == 1 || spec.axes.size() == 2, "grid must have 1 or 2 axes");
  Grid g;
  g.dims_ = int(spec.axes.size());
  for (int a = 0; a < g.dims_; ++a) {
    const auto& ax = spec.axes[std::size_t(a)];
    require(ax.hi > ax.lo, "grid axis " + std::to_string(a) + ": extent must be positive");
    require(ax.points >= Grid::kMinPoints,
            "grid axis " + std::to_string(a) + ": need at least 8 points, got " +
                std::to_string(ax.points));
    g.n_[std::size_t(a)] = ax.points;
    g.origin_[std::size_t(a)] = ax.lo;
    g.dx_[std::size_t(a)] = (ax.hi - ax.lo) / double(ax.points - 1);
  }
  g.boundary_ = spec.boundary;
  if (spec.boundary == Boundary::absorbing) {
    require(spec.cap.width_cells >= Grid::kMinCapCells,
            "absorbing boundary needs a CAP at least 4 cells wide");
    require(spec.cap.strength >= 0.0, "CAP strength must be non-negative");
    for (int a = 0; a < g.dims_; ++a)
      require(2 * spec.cap.width_cells < g.n_[std::size_t(a)], "CAP layers overlap on axis " +
                                                                std::to_string(a));
    g.cap_ = spec.cap;
  }
  return g;
}

Grid make_grid_1d(double lo, double hi, std::size_t points, Boundary b, CapSpec cap) {
  return make_grid(GridSpec{{AxisSpec{lo, hi, points}}, b, cap});
}

Grid make_grid_2d(double lo, double hi, std::size_t points, Boundary b, CapSpec cap) {
  return make_grid(GridSpec{{AxisSpec{lo, hi, points}, AxisSpec{lo, hi, points}}, b, cap});
}

Grid make_grid_2d(const AxisSpec& a0, const AxisSpec& a1, Boundary b, CapSpec cap) {
  return make_grid(GridSpec{{a0, a1}, b, cap});
}

Grid axis_grid(const Grid& g, int axis) {
  return make_grid(GridSpec{{AxisSpec{g.origin(axis), g.upper(axis), g.points(axis)}},
                            g.boundary(), g.cap()});
}

Point Grid::node(std::size_t flat) const {
  const std::size_t i0 = flat / n_[1];
  const std::size_t i1 = flat % n_[1];
  return {coord(0, i0), dims_ == 2 ? coord(1, i1) : 0.0};
}

double Grid::trapezoid_weight(int axis, std::size_t i) const {
  if (boundary_ == Boundary::periodic) return 1.0;
  return (i == 0 || i + 1 == n_[std::size_t(axis)]) ? 0.5 : 1.0;
}

double Grid::weight(std::size_t flat) const {
  const std::size_t i0 = flat / n_[1];
  double w = trapezoid_weight(0, i0) * dx_[0];
  if (dims_ == 2) w *= trapezoid_weight(1, flat % n_[1]) * dx_[1];
  return w;
}

bool Grid::contains(const Point& p) const {
  for (int a = 0; a < dims_; ++a) {
    if (!(p[std::size_t(a)] >= origin(a) && p[std::size_t(a)] <= upper(a))) return false;
  }
  return true;
}

double Grid::wavenumber(int axis, std::size_t j) const {
  const auto n = n_[std::size_t(axis)];
  const double dk = 2.0 * std::numbers::pi / (double(n) * dx_[std::size_t(axis)]);
  const auto signed_j = j <= n / 2 ? double(j) : double(j) - double(n);
  return dk * signed_j;
}

double Grid::cap_potential(std::size_t flat) const {
  if (boundary_ != Boundary::absorbing || cap_.strength == 0.0) return 0.0;
  const double w = double(cap_.width_cells);
  double total = 0.0;
  const std::size_t idx[2] = {flat / n_[1], flat % n_[1]};
  for (int a = 0; a < dims_; ++a) {
    const auto n = n_[std::size_t(a)];
    const double from_lo = double(cap_.width_cells) - double(idx[a]);
    const double from_hi = double(idx[a]) - double(n - 1 - cap_.width_cells);
    const double depth = std::max(from_lo, from_hi);
    if (depth > 0.0) {
      const double s = std::sin(0.5 * std::numbers::pi * depth / w);
      total -= cap_.strength * s * s;
    }
  }
  return total;
}

bool Grid::same_layout(const Grid& o, double rel_tol) const {
  if (dims_ != o.dims_) return false;
  for (int a = 0; a < dims_; ++a) {
    const auto k = std::size_t(a);
    if (n_[k] != o.n_[k]) return false;
    if (std::abs(dx_[k] - o.dx_[k]) > rel_tol * dx_[k]) return false;
    if (std::abs(origin_[k] - o.origin_[k]) > rel_tol * 1e3 * dx_[k]) return false;
  }
  return true;
}

}  // namespace bohmkit
