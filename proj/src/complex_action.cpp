#include "bohmkit/complex_action.hpp"

#include <cmath>
#include <numbers>

#include "bohmkit/error.hpp"
#include "stencil.hpp"

namespace bohmkit {

using detail::neighbor;

namespace {

const cplx I(0.0, 1.0);

void check_sequence(const WaveFunction& a, const WaveFunction& b, const WaveFunction& c) {
  detail::require(a.grid().same_layout(b.grid()) && b.grid().same_layout(c.grid()),
                  "snapshots must share one grid");
  const double d1 = b.time() - a.time(), d2 = c.time() - b.time();
  detail::require(d1 > 0.0 && std::abs(d2 - d1) <= 1e-9 * d1, "snapshots must be equally spaced in time");
}

// Cell difference of S_bar from i to (i + k steps); k may be negative.
cplx step_diff(const ComplexActionField& f, std::size_t i, int axis, long k) {
  const long j = neighbor(f.grid, i, axis, k);
  return k > 0 ? complex_action_difference(f, i, std::size_t(j)) : -complex_action_difference(f, std::size_t(j), i);
}

// Centred first derivative of S_bar, one-sided at non-periodic edges.
cplx gradient_at(const ComplexActionField& f, std::size_t i, int axis) {
  const double h = f.grid.spacing(axis);
  const long up = neighbor(f.grid, i, axis, 1), down = neighbor(f.grid, i, axis, -1);
  if (up >= 0 && down >= 0) return (step_diff(f, i, axis, 1) - step_diff(f, i, axis, -1)) / (2.0 * h);
  if (up >= 0) return step_diff(f, i, axis, 1) / h;
  return -step_diff(f, i, axis, -1) / h;
}

}  // namespace

ComplexActionField complex_action(const WaveFunction& wf) {
  const PolarFields p = polar_decompose(wf);
  const double hbar = wf.hbar();
  ComplexActionField f;
  f.grid = p.grid;
  f.time = p.time;
  f.constants = p.constants;
  f.mask = p.mask;
  f.region = p.region;
  f.regions = p.regions;
  f.R = p.R;
  f.S_bar.assign(p.R.size(), cplx(0.0));
  for (std::size_t i = 0; i < p.R.size(); ++i)
    if (p.R[i] > 0.0) f.S_bar[i] = cplx(p.S[i], -hbar * std::log(p.R[i]));
  return f;
}

cplx complex_action_difference(const ComplexActionField& f, std::size_t i, std::size_t j) {
  const double hbar = f.constants.hbar;
  if (f.R[i] == 0.0 || f.R[j] == 0.0) return 0.0;
  const double two_pi_hbar = 2.0 * std::numbers::pi * hbar;
  const double d = f.S_bar[j].real() - f.S_bar[i].real();
  double re = d - two_pi_hbar * std::round(d / two_pi_hbar);
  const double jump = std::numbers::pi * hbar;
  if (std::abs(std::abs(re) - jump) <= 1e-10 * jump) re = 0.0;
  return {re, f.S_bar[j].imag() - f.S_bar[i].imag()};
}

std::array<std::vector<cplx>, 2> complex_velocity(ComplexActionField& f) {
  const Grid& g = f.grid;
  for (int a = 0; a < g.dims(); ++a) {
    auto& v = f.v_bar[std::size_t(a)];
    v.assign(g.size(), cplx(0.0));
    const double m = f.constants.mass[std::size_t(a)];
    for (std::size_t i = 0; i < g.size(); ++i)
      if (!f.mask[i]) v[i] = gradient_at(f, i, a) / m;
  }
  return f.v_bar;
}

std::vector<cplx> complex_quantum_potential(ComplexActionField& f) {
  const Grid& g = f.grid;
  const double hbar = f.constants.hbar;
  f.Q_bar.assign(g.size(), cplx(0.0));
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (f.mask[i]) continue;
    cplx div = 0.0;
    for (int a = 0; a < g.dims(); ++a) {
      const double h = g.spacing(a);
      const double m = f.constants.mass[std::size_t(a)];
      const long up = neighbor(g, i, a, 1), down = neighbor(g, i, a, -1);
      if (up >= 0 && down >= 0) {
        const cplx v_plus = step_diff(f, i, a, 1) / (m * h);
        const cplx v_minus = -step_diff(f, i, a, -1) / (m * h);
        div += (v_plus - v_minus) / h;
      } else {
        // One-sided edge: half-node velocities at +1/2, +3/2, +5/2 inward.
        const long s = up >= 0 ? 1 : -1;
        const long n1 = neighbor(g, i, a, s), n2 = neighbor(g, i, a, 2 * s);
        auto vh = [&](std::size_t from) { return step_diff(f, from, a, s) / (m * h); };
        div += (-2.0 * vh(i) + 3.0 * vh(std::size_t(n1)) - vh(std::size_t(n2))) / h;
      }
    }
    f.Q_bar[i] = -0.5 * I * hbar * div;
  }
  return f.Q_bar;
}

std::vector<cplx> complex_laplacian_potential(const ComplexActionField& f) {
  const Grid& g = f.grid;
  std::vector<cplx> out(g.size(), cplx(0.0));
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (f.mask[i]) continue;
    cplx lap = 0.0;
    for (int a = 0; a < g.dims(); ++a)
      lap += detail::second_derivative(g, f.S_bar, i, a) / f.constants.mass[std::size_t(a)];
    out[i] = -0.5 * I * f.constants.hbar * lap;
  }
  return out;
}

std::vector<cplx> cqhj_residual(const WaveFunction& prev, const WaveFunction& mid, const WaveFunction& next,
                                const Potential& pot) {
  check_sequence(prev, mid, next);
  const Grid& g = mid.grid();
  const double dt = mid.time() - prev.time();
  const double hbar = mid.hbar();
  ComplexActionField f = complex_action(mid);
  complex_quantum_potential(f);
  std::vector<double> v, w;
  pot.sample(g, mid.time(), v, w);
  std::vector<cplx> res(g.size(), cplx(0.0));
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (f.mask[i]) continue;
    const cplx dsdt = -I * hbar * std::log(next[i] / prev[i]) / (2.0 * dt);
    cplx kin = 0.0;
    for (int a = 0; a < g.dims(); ++a) {
      const cplx d = gradient_at(f, i, a);
      kin += d * d / (2.0 * mid.mass(a));
    }
    res[i] = dsdt + kin + v[i] + f.Q_bar[i];
  }
  return res;
}

}  // namespace bohmkit
