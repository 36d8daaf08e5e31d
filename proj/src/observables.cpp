#include "bohmkit/observables.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "bohmkit/error.hpp"
#include "bohmkit/fft.hpp"
#include "bohmkit/interpolation.hpp"
#include "stencil.hpp"

namespace bohmkit {

using detail::neighbor;

OperatorSpec OperatorSpec::position(int axis) {
  OperatorSpec s;
  s.kind = OperatorKind::position;
  s.axis = axis;
  return s;
}

OperatorSpec OperatorSpec::momentum(int axis) {
  OperatorSpec s;
  s.kind = OperatorKind::momentum;
  s.axis = axis;
  return s;
}

OperatorSpec OperatorSpec::kinetic() {
  OperatorSpec s;
  s.kind = OperatorKind::kinetic;
  return s;
}

OperatorSpec OperatorSpec::potential_energy(Potential v) {
  OperatorSpec s;
  s.kind = OperatorKind::potential;
  s.potential = std::move(v);
  return s;
}

OperatorSpec OperatorSpec::hamiltonian(Potential v) {
  OperatorSpec s;
  s.kind = OperatorKind::hamiltonian;
  s.potential = std::move(v);
  return s;
}

OperatorSpec OperatorSpec::current(const Point& r0, int axis) {
  OperatorSpec s;
  s.kind = OperatorKind::current;
  s.at = r0;
  s.axis = axis;
  return s;
}

OperatorSpec OperatorSpec::custom(Coef a, std::array<Coef, 2> b, std::array<Coef, 2> c) {
  OperatorSpec s;
  s.kind = OperatorKind::custom;
  s.a = std::move(a);
  s.b = std::move(b);
  s.c = std::move(c);
  return s;
}

std::string OperatorSpec::name() const {
  switch (kind) {
    case OperatorKind::position: return "position_" + std::to_string(axis);
    case OperatorKind::momentum: return "momentum_" + std::to_string(axis);
    case OperatorKind::kinetic: return "kinetic";
    case OperatorKind::potential: return "potential";
    case OperatorKind::hamiltonian: return "hamiltonian";
    case OperatorKind::current: return "current_" + std::to_string(axis);
    case OperatorKind::custom: return "custom";
  }
  return "custom";
}

namespace {

std::size_t axis_index(const Grid& g, std::size_t flat, int axis) { return detail::axis_pos(g, flat, axis); }

// Multiplies the spectrum of psi along one axis by f(k) and transforms back.
std::vector<cplx> spectral(const Grid& g, std::span<const cplx> psi, int axis, const std::function<double(double)>& f) {
  Fft fft(g.points(0), g.dims() == 2 ? g.points(1) : 1);
  std::vector<cplx> s(psi.begin(), psi.end());
  fft.forward(s);
  const double inv_n = 1.0 / double(g.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] *= inv_n * f(g.wavenumber(axis, axis_index(g, i, axis)));
  fft.backward(s);
  return s;
}

std::vector<cplx> momentum_of(const Grid& g, std::span<const cplx> psi, int axis, double hbar) {
  if (g.boundary() == Boundary::periodic) return spectral(g, psi, axis, [hbar](double k) { return hbar * k; });
  std::vector<cplx> out(g.size());
  const double h = g.spacing(axis);
  const cplx f(0.0, -hbar / (2.0 * h));
  for (std::size_t i = 0; i < g.size(); ++i) {
    const long up = neighbor(g, i, axis, 1), down = neighbor(g, i, axis, -1);
    const cplx pu = up >= 0 ? psi[std::size_t(up)] : 0.0;
    const cplx pd = down >= 0 ? psi[std::size_t(down)] : 0.0;
    out[i] = f * (pu - pd);
  }
  return out;
}

// p_k c(r) p_k psi.
std::vector<cplx> pcp_of(const Grid& g, std::span<const cplx> psi, int axis, double hbar,
                         const std::function<double(const Point&)>& c) {
  std::vector<cplx> out(g.size());
  if (g.boundary() == Boundary::periodic) {
    std::vector<cplx> t = momentum_of(g, psi, axis, hbar);
    for (std::size_t i = 0; i < g.size(); ++i) t[i] *= c(g.node(i));
    return momentum_of(g, t, axis, hbar);
  }
  const double h = g.spacing(axis);
  const double f = -hbar * hbar / (h * h);
  auto c_half = [&](std::size_t i, long dir) {  // coefficient at the half node between i and its neighbour
    Point r = g.node(i);
    r[std::size_t(axis)] += 0.5 * double(dir) * h;
    return c(r);
  };
  for (std::size_t i = 0; i < g.size(); ++i) {
    const long up = neighbor(g, i, axis, 1), down = neighbor(g, i, axis, -1);
    const cplx pu = up >= 0 ? psi[std::size_t(up)] : 0.0;
    const cplx pd = down >= 0 ? psi[std::size_t(down)] : 0.0;
    out[i] = f * (c_half(i, 1) * (pu - psi[i]) - c_half(i, -1) * (psi[i] - pd));
  }
  return out;
}

std::vector<cplx> kinetic_of(const Grid& g, std::span<const cplx> psi, const Constants& c) {
  std::vector<cplx> out(g.size(), 0.0);
  for (int a = 0; a < g.dims(); ++a) {
    const double m = c.mass[std::size_t(a)];
    std::vector<cplx> t;
    if (g.boundary() == Boundary::periodic) {
      t = spectral(g, psi, a, [&](double k) { return c.hbar * c.hbar * k * k / (2.0 * m); });
    } else {
      t = pcp_of(g, psi, a, c.hbar, [m](const Point&) { return 1.0 / (2.0 * m); });
    }
    for (std::size_t i = 0; i < g.size(); ++i) out[i] += t[i];
  }
  return out;
}

std::vector<cplx> apply_on(const Grid& g, const Constants& c, std::span<const cplx> psi, double t,
                           const OperatorSpec& op) {
  std::vector<cplx> out(g.size(), 0.0);
  switch (op.kind) {
    case OperatorKind::position:
      for (std::size_t i = 0; i < g.size(); ++i) out[i] = g.node(i)[std::size_t(op.axis)] * psi[i];
      return out;
    case OperatorKind::momentum:
      return momentum_of(g, psi, op.axis, c.hbar);
    case OperatorKind::kinetic:
      return kinetic_of(g, psi, c);
    case OperatorKind::potential:
    case OperatorKind::hamiltonian: {
      std::vector<double> v, w;
      op.potential.sample(g, t, v, w);
      if (op.kind == OperatorKind::hamiltonian) out = kinetic_of(g, psi, c);
      for (std::size_t i = 0; i < g.size(); ++i) out[i] += v[i] * psi[i];
      return out;
    }
    case OperatorKind::custom: {
      if (op.a)
        for (std::size_t i = 0; i < g.size(); ++i) out[i] += op.a(g.node(i)) * psi[i];
      for (int k = 0; k < g.dims(); ++k) {
        if (const auto& b = op.b[std::size_t(k)]) {
          const auto p_psi = momentum_of(g, psi, k, c.hbar);
          std::vector<cplx> b_psi(g.size());
          for (std::size_t i = 0; i < g.size(); ++i) b_psi[i] = b(g.node(i)) * psi[i];
          const auto p_b_psi = momentum_of(g, b_psi, k, c.hbar);
          for (std::size_t i = 0; i < g.size(); ++i) out[i] += 0.5 * (b(g.node(i)) * p_psi[i] + p_b_psi[i]);
        }
        if (const auto& cc = op.c[std::size_t(k)]) {
          const auto t2 = pcp_of(g, psi, k, c.hbar, cc);
          for (std::size_t i = 0; i < g.size(); ++i) out[i] += t2[i];
        }
      }
      return out;
    }
    case OperatorKind::current:
      throw InvalidArgument("the point-current operator has no grid representation; use expectation_operator");
  }
  return out;
}

cplx quadrature(const Grid& g, std::span<const cplx> a, std::span<const cplx> b) {
  cplx s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) s += g.weight(i) * std::conj(a[i]) * b[i];
  return s;
}

}  // namespace

std::vector<cplx> apply_momentum(const WaveFunction& wf, int axis) {
  detail::require(axis >= 0 && axis < wf.grid().dims(), "momentum axis out of range");
  return momentum_of(wf.grid(), wf.values(), axis, wf.hbar());
}

std::vector<cplx> apply_operator(const WaveFunction& wf, const OperatorSpec& op) {
  return apply_on(wf.grid(), wf.constants(), wf.values(), wf.time(), op);
}

double hermiticity_defect(const Grid& g, const Constants& c, const OperatorSpec& op) {
  // Smooth test fields vanishing at the grid edges.
  auto field = [&](double k, double shift) {
    std::vector<cplx> v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Point r = g.node(i);
      cplx z = 1.0;
      for (int a = 0; a < g.dims(); ++a) {
        const double u = (r[std::size_t(a)] - g.origin(a)) / (g.upper(a) - g.origin(a));
        const double s = std::sin(std::numbers::pi * u);
        z *= s * s * (1.0 + 0.3 * std::cos(2 * std::numbers::pi * (u + shift))) *
             std::polar(1.0, k * r[std::size_t(a)]);
      }
      v[i] = z;
    }
    return v;
  };
  const auto phi = field(0.7 / g.spacing(0) * 0.05, 0.1);
  const auto psi = field(-1.3 / g.spacing(0) * 0.05, 0.35);
  const auto a_psi = apply_on(g, c, psi, 0.0, op);
  const auto a_phi = apply_on(g, c, phi, 0.0, op);
  const cplx lhs = quadrature(g, phi, a_psi);
  const cplx rhs = quadrature(g, a_phi, psi);
  return std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs));
}

Expectation expectation_operator_detail(const WaveFunction& wf, const OperatorSpec& op) {
  const Grid& g = wf.grid();
  Expectation e;
  if (op.kind == OperatorKind::current) {
    detail::require(op.axis >= 0 && op.axis < g.dims(), "current axis out of range");
    const auto p_psi = apply_momentum(wf, op.axis);
    const cplx psi_r = interpolate<cplx>(g, wf.values(), op.at);
    const cplx p_r = interpolate<cplx>(g, p_psi, op.at);
    e.value = (std::conj(psi_r) * p_r).real() / wf.mass(op.axis);
    return e;
  }
  if (op.kind == OperatorKind::custom) {
    const double d = hermiticity_defect(g, wf.constants(), op);
    if (d > 1e-10) throw InvalidArgument("custom operator failed the Hermiticity check (defect " + std::to_string(d) + ")");
  }
  const auto a_psi = apply_operator(wf, op);
  const cplx v = quadrature(g, wf.values(), a_psi);
  e.value = v.real();
  e.imag_residue = std::abs(v.imag());
  if (e.imag_residue > 1e-10 * std::max(1.0, std::abs(e.value)))
    throw InvalidArgument("expectation value of " + op.name() + " has imaginary residue " + std::to_string(e.imag_residue));
  return e;
}

double expectation_operator(const WaveFunction& wf, const OperatorSpec& op) {
  return expectation_operator_detail(wf, op).value;
}

std::vector<double> local_mean_value(const WaveFunction& wf, const OperatorSpec& op) {
  const auto a_psi = apply_operator(wf, op);
  const double floor = kRhoFloorFraction * wf.max_density();
  std::vector<double> out(wf.size(), 0.0);
  for (std::size_t i = 0; i < wf.size(); ++i) {
    const double rho = std::norm(wf[i]);
    if (rho < floor || rho == 0.0) continue;
    out[i] = (std::conj(wf[i]) * a_psi[i]).real() / rho;
  }
  return out;
}

MeanStderr expectation_trajectories(const TrajectoryEnsemble& ens, const std::function<double(const Point&)>& a_b) {
  std::vector<double> x;
  x.reserve(ens.size());
  for (std::size_t a = 0; a < ens.size(); ++a)
    if (!ens.exited(a)) x.push_back(a_b(ens.position[a]));
  if (x.empty()) throw InvalidArgument("trajectory expectation over an empty ensemble");
  return mean_stderr(x);
}

MeanStderr expectation_trajectories(const TrajectoryEnsemble& ens, const Grid& grid, const std::vector<double>& a_b) {
  detail::require(a_b.size() == grid.size(), "local field does not match the grid");
  return expectation_trajectories(ens, [&](const Point& r) { return interpolate<double>(grid, a_b, r); });
}

std::array<std::vector<double>, 2> current_density(const WaveFunction& wf) {
  const auto vf = velocity_field(wf);
  std::array<std::vector<double>, 2> j;
  for (int a = 0; a < wf.grid().dims(); ++a) {
    j[std::size_t(a)].resize(wf.size());
    for (std::size_t i = 0; i < wf.size(); ++i) j[std::size_t(a)][i] = std::norm(wf[i]) * vf.v[std::size_t(a)][i];
  }
  return j;
}

void write_observables_csv(const std::vector<ObservableRow>& rows, const std::filesystem::path& path,
                           const PhysicalUnits& units) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path.string());
  os << "t,value,stderr,route\n";
  char buf[192];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.10g,%.12g,%.6g,%s\n", units.time_from_internal(r.t), r.value, r.std_error,
                  r.route.c_str());
    os << buf;
  }
}

}  // namespace bohmkit
