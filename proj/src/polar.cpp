#include "bohmkit/polar.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>

#include "bohmkit/error.hpp"
#include "bohmkit/interpolation.hpp"
#include "bohmkit/observables.hpp"
#include "stencil.hpp"

namespace bohmkit {

using detail::neighbor;

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

void check_sequence(const WaveFunction& a, const WaveFunction& b, const WaveFunction& c) {
  detail::require(a.grid().same_layout(b.grid()) && b.grid().same_layout(c.grid()),
                  "snapshots must share one grid");
  const double d1 = b.time() - a.time(), d2 = c.time() - b.time();
  detail::require(d1 > 0.0 && std::abs(d2 - d1) <= 1e-9 * d1, "snapshots must be equally spaced in time");
}

}  // namespace

PolarFields polar_decompose(const WaveFunction& wf) {
  const Grid& g = wf.grid();
  const std::size_t n = g.size();
  const double hbar = wf.hbar();
  PolarFields f;
  f.grid = g;
  f.time = wf.time();
  f.constants = wf.constants();
  f.R.resize(n);
  f.S.resize(n);
  f.mask.resize(n);
  f.region.assign(n, -1);
  const double floor = kRhoFloorFraction * wf.max_density();
  for (std::size_t i = 0; i < n; ++i) {
    f.R[i] = std::abs(wf[i]);
    f.S[i] = hbar * std::arg(wf[i]);
    f.mask[i] = std::norm(wf[i]) < floor ? 1 : 0;
  }

  // Seeds in order of decreasing density so that each region is anchored at its maximum.
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < n; ++i)
    if (!f.mask[i]) order.push_back(i);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return f.R[a] > f.R[b]; });

  std::queue<std::size_t> q;
  for (std::size_t seed : order) {
    if (f.region[seed] >= 0) continue;
    const int id = f.regions++;
    f.region[seed] = id;
    q.push(seed);
    while (!q.empty()) {
      const std::size_t cur = q.front();
      q.pop();
      const double phase_cur = f.S[cur] / hbar;
      for (int axis = 0; axis < g.dims(); ++axis)
        for (long d : {-1L, 1L}) {
          const long nb = neighbor(g, cur, axis, d);
          if (nb < 0) continue;
          const auto j = std::size_t(nb);
          if (f.mask[j] || f.region[j] >= 0) continue;
          const double target = phase_cur + std::arg(wf[j] * std::conj(wf[cur]));
          const double principal = std::arg(wf[j]);
          f.S[j] = hbar * (principal + two_pi * std::round((target - principal) / two_pi));
          f.region[j] = id;
          q.push(j);
        }
    }
  }
  return f;
}

std::vector<double> quantum_potential(const PolarFields& f) {
  const Grid& g = f.grid;
  std::vector<double> q(g.size(), 0.0);
  const double hbar = f.constants.hbar;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (f.mask[i] || f.R[i] == 0.0) continue;
    double lap = 0.0;
    for (int a = 0; a < g.dims(); ++a)
      lap += hbar * hbar / (2.0 * f.constants.mass[std::size_t(a)]) * detail::second_derivative(g, f.R, i, a);
    q[i] = -lap / f.R[i];
  }
  return q;
}

std::vector<double> quantum_potential(const WaveFunction& wf) { return quantum_potential(polar_decompose(wf)); }

PolarFields polar_fields(const WaveFunction& wf) {
  PolarFields f = polar_decompose(wf);
  f.Q = quantum_potential(f);
  return f;
}

double action_difference(const PolarFields& f, std::size_t i, std::size_t j) {
  const double hbar = f.constants.hbar;
  if (f.R[i] == 0.0 || f.R[j] == 0.0) return 0.0;  // arg(0) carries no phase
  const double d = f.S[j] - f.S[i];
  double wrapped = d - two_pi * hbar * std::round(d / (two_pi * hbar));
  // A sign change of a real profile shows up as a jump of exactly pi hbar.
  const double jump = std::numbers::pi * hbar;
  if (std::abs(std::abs(wrapped) - jump) <= 1e-10 * jump) wrapped = 0.0;
  return wrapped;
}

std::vector<double> action_gradient(const PolarFields& f, int axis) {
  const Grid& g = f.grid;
  std::vector<double> out(g.size(), 0.0);
  const double h = g.spacing(axis);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const long up = neighbor(g, i, axis, 1), down = neighbor(g, i, axis, -1);
    if (up >= 0 && down >= 0)
      out[i] = (action_difference(f, std::size_t(down), i) + action_difference(f, i, std::size_t(up))) / (2.0 * h);
    else if (up >= 0)
      out[i] = action_difference(f, i, std::size_t(up)) / h;
    else if (down >= 0)
      out[i] = action_difference(f, std::size_t(down), i) / h;
  }
  return out;
}

std::vector<double> phase_gradient_velocity(const PolarFields& f, int axis) {
  auto v = action_gradient(f, axis);
  for (auto& x : v) x /= f.constants.mass[std::size_t(axis)];
  return v;
}

std::vector<double> qhj_residual(const WaveFunction& prev, const WaveFunction& mid, const WaveFunction& next,
                                 const Potential& pot) {
  check_sequence(prev, mid, next);
  const Grid& g = mid.grid();
  const double dt = mid.time() - prev.time();
  const PolarFields f = polar_fields(mid);
  std::vector<double> grad[2];
  for (int a = 0; a < g.dims(); ++a) grad[a] = action_gradient(f, a);
  std::vector<double> v, w;
  pot.sample(g, mid.time(), v, w);
  std::vector<double> res(g.size(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (f.mask[i]) continue;
    const double dsdt = mid.hbar() * std::arg(next[i] * std::conj(prev[i])) / (2.0 * dt);
    double kin = 0.0;
    for (int a = 0; a < g.dims(); ++a) kin += grad[a][i] * grad[a][i] / (2.0 * mid.mass(a));
    res[i] = dsdt + kin + v[i] + f.Q[i];
  }
  return res;
}

std::vector<double> continuity_residual(const WaveFunction& prev, const WaveFunction& mid, const WaveFunction& next) {
  check_sequence(prev, mid, next);
  const Grid& g = mid.grid();
  const double dt = mid.time() - prev.time();
  const auto j = current_density(mid);
  const auto vf_mask = velocity_field(mid).mask;
  std::vector<double> res(g.size(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (vf_mask[i]) continue;
    double div = 0.0;
    for (int a = 0; a < g.dims(); ++a) div += detail::first_derivative(g, j[std::size_t(a)], i, a);
    res[i] = (std::norm(next[i]) - std::norm(prev[i])) / (2.0 * dt) + div;
  }
  return res;
}

double circulation(const VelocityField& v, const Point& c, double radius, std::size_t samples) {
  detail::require(v.grid.dims() == 2, "circulation needs a 2D field");
  detail::require(samples >= 8 && radius > 0.0, "circulation needs a positive radius and >= 8 samples");
  // Trapezoid rule on the periodic loop parameter (spectrally accurate).
  double sum = 0.0;
  const double dth = two_pi / double(samples);
  for (std::size_t s = 0; s < samples; ++s) {
    const double th = dth * double(s);
    const Point r{c[0] + radius * std::cos(th), c[1] + radius * std::sin(th)};
    const Point u = v.at(r);
    sum += (-u[0] * std::sin(th) + u[1] * std::cos(th)) * radius * dth;
  }
  return sum;
}

long winding_number(const WaveFunction& wf, const Point& c, double radius, std::size_t samples) {
  detail::require(wf.grid().dims() == 2, "winding number needs a 2D field");
  std::vector<cplx> data(wf.values().begin(), wf.values().end());
  auto value = [&](double th) {
    const Point r{c[0] + radius * std::cos(th), c[1] + radius * std::sin(th)};
    return interpolate<cplx>(wf.grid(), data, r);
  };
  double total = 0.0;
  cplx prev = value(0.0);
  for (std::size_t s = 1; s <= samples; ++s) {
    const cplx cur = value(two_pi * double(s) / double(samples));
    total += std::arg(cur * std::conj(prev));
    prev = cur;
  }
  return std::lround(total / two_pi);
}

double max_unmasked(const std::vector<double>& x, const std::vector<std::uint8_t>& mask) {
  double m = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!mask[i]) m = std::max(m, std::abs(x[i]));
  return m;
}

}  // namespace bohmkit
