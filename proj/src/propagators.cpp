#include "bohmkit/propagators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "bohmkit/error.hpp"

namespace bohmkit {

using detail::require;

Method parse_method(std::string_view name) {
  if (name == "split_operator" || name == "split") return Method::split_operator;
  if (name == "crank_nicolson" || name == "cn") return Method::crank_nicolson;
  throw ConfigError("unknown integrator '" + std::string(name) +
                    "' (expected split_operator or crank_nicolson)");
}

std::string_view to_string(Method m) {
  return m == Method::split_operator ? "split_operator" : "crank_nicolson";
}

Method default_method(Boundary b) {
  return b == Boundary::box ? Method::crank_nicolson : Method::split_operator;
}

Propagator::Propagator(Grid grid, Constants constants, Potential potential)
    : grid_(std::move(grid)), constants_(constants), potential_(std::move(potential)) {
  absorbing_ = potential_.has_imaginary() ||
               (grid_.boundary() == Boundary::absorbing && grid_.cap().strength > 0.0);
}

void Propagator::check_compatible(const WaveFunction& wf) const {
  require(wf.grid().same_layout(grid_), "wavefunction grid does not match the propagator grid");
  for (int a = 0; a < grid_.dims(); ++a)
    require(wf.mass(a) == constants_.mass[std::size_t(a)] && wf.hbar() == constants_.hbar,
            "wavefunction constants do not match the propagator");
}

void Propagator::sample_potential(double t) {
  if (sampled_ && !potential_.time_dependent()) return;
  potential_.sample(grid_, t, v_, w_);
  if (grid_.boundary() == Boundary::absorbing)
    for (std::size_t i = 0; i < grid_.size(); ++i) w_[i] += grid_.cap_potential(i);
  sampled_ = true;
}

// ---------------------------------------------------------------------------

SplitOperator::SplitOperator(Grid grid, Constants constants, Potential potential)
    : Propagator(std::move(grid), constants, std::move(potential)),
      fft_(grid_.points(0), grid_.dims() == 2 ? grid_.points(1) : 1) {
  require(grid_.boundary() != Boundary::box,
          "split-operator needs a periodic or absorbing grid; use Crank-Nicolson for box grids");
  kinetic_.resize(grid_.size());
  const double hbar = constants_.hbar;
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    const std::size_t j0 = i / grid_.points(1), j1 = i % grid_.points(1);
    double e = 0.0;
    const double k0 = grid_.wavenumber(0, j0);
    e += hbar * hbar * k0 * k0 / (2.0 * constants_.mass[0]);
    if (grid_.dims() == 2) {
      const double k1 = grid_.wavenumber(1, j1);
      e += hbar * hbar * k1 * k1 / (2.0 * constants_.mass[1]);
    }
    kinetic_[i] = e;
  }
}

WaveFunction SplitOperator::step(WaveFunction wf, double dt) {
  check_compatible(wf);
  if (dt == 0.0) return wf;
  require(!(dt < 0.0 && absorbing_), "backward propagation with an absorbing potential");
  const double hbar = constants_.hbar;
  const double t_mid = wf.time() + 0.5 * dt;
  if (potential_.time_dependent() || pot_dt_ != dt || pot_phase_.empty()) {
    sample_potential(t_mid);
    const double vmax = std::abs(*std::max_element(v_.begin(), v_.end(), [](double a, double b) {
      return std::abs(a) < std::abs(b);
    }));
    if (vmax * std::abs(dt) / hbar > std::numbers::pi)
      throw InvalidArgument("time step too large: max|V| dt / hbar exceeds pi");
    const double half = 0.5 * dt / hbar;
    pot_phase_.resize(v_.size());
    for (std::size_t i = 0; i < v_.size(); ++i) {
      const double ph = -v_[i] * half;
      pot_phase_[i] = std::exp(w_[i] * half) * cplx(std::cos(ph), std::sin(ph));
    }
    pot_dt_ = dt;
  }

  if (kin_dt_ != dt || kin_phase_.empty()) {
    kin_phase_.resize(kinetic_.size());
    const double inv_n = 1.0 / double(grid_.size());
    for (std::size_t i = 0; i < kinetic_.size(); ++i) {
      const double ph = -kinetic_[i] * dt / hbar;
      kin_phase_[i] = inv_n * cplx(std::cos(ph), std::sin(ph));
    }
    kin_dt_ = dt;
  }

  const double time = wf.time() + dt;
  std::vector<cplx> psi = std::move(wf).release();
  for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= pot_phase_[i];
  fft_.forward(psi);
  for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= kin_phase_[i];
  fft_.backward(psi);
  for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= pot_phase_[i];
  return WaveFunction(grid_, std::move(psi), time, constants_);
}

// ---------------------------------------------------------------------------

void crank_nicolson_line(std::span<cplx> psi, std::span<const double> v, std::span<const double> w,
                         double dx, double mass, double hbar, double dt,
                         std::vector<cplx>& scratch) {
  const std::size_t n = psi.size();
  if (n < 3) return;
  const std::size_t m = n - 2;  // interior unknowns
  scratch.resize(2 * m);
  cplx* cp = scratch.data();      // modified super-diagonal
  cplx* dp = scratch.data() + m;  // modified rhs / solution
  const double alpha = hbar * hbar / (2.0 * mass * dx * dx);
  const double tau = 0.5 * dt / hbar;
  const cplx off(0.0, -tau * alpha);  // A_{i,i+1} = A_{i,i-1}
  const cplx boff(0.0, tau * alpha);  // B_{i,i+-1}
  const bool has_w = !w.empty();

  cplx prev_pivot_c = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t i = k + 1;
    const double wi = has_w ? w[i] : 0.0;
    const cplx h(wi, -(2.0 * alpha + v[i]));  // -i H_ii
    const cplx diag_a = 1.0 - tau * h;        // 1 + i tau H_ii
    const cplx diag_b = 1.0 + tau * h;        // 1 - i tau H_ii
    cplx r = diag_b * psi[i] + boff * (psi[i - 1] + psi[i + 1]);
    cplx pivot = diag_a;
    if (k > 0) {
      pivot -= off * prev_pivot_c;
      r -= off * dp[k - 1];
    }
    const double pn = std::norm(pivot);
    const double floor = 1e-12 * (1.0 + 2.0 * tau * alpha);
    if (!(pn > floor * floor) || !std::isfinite(pn))
      throw SingularSystem("Crank-Nicolson tridiagonal system is singular at node " +
                           std::to_string(i));
    const cplx inv = std::conj(pivot) / pn;
    cp[k] = off * inv;
    dp[k] = r * inv;
    prev_pivot_c = cp[k];
  }
  for (std::size_t k = m - 1; k-- > 0;) dp[k] -= cp[k] * dp[k + 1];
  psi[0] = 0.0;
  psi[n - 1] = 0.0;
  for (std::size_t k = 0; k < m; ++k) psi[k + 1] = dp[k];
}

CrankNicolson::CrankNicolson(Grid grid, Constants constants, Potential potential)
    : Propagator(std::move(grid), constants, std::move(potential)) {
  require(grid_.boundary() != Boundary::periodic,
          "Crank-Nicolson needs a box or absorbing grid; use split-operator for periodic grids");
}

void CrankNicolson::sweep(std::vector<cplx>& psi, int axis, double dt, double pot_scale) {
  const std::size_t n0 = grid_.points(0), n1 = grid_.points(1);
  const std::size_t len = axis == 0 ? n0 : n1;
  const std::size_t lines = axis == 0 ? n1 : n0;
  line_.resize(len);
  line_v_.resize(len);
  line_w_.resize(len);
  for (std::size_t l = 0; l < lines; ++l) {
    if (grid_.dims() == 2 && (l == 0 || l + 1 == lines)) {
      for (std::size_t k = 0; k < len; ++k) psi[axis == 0 ? grid_.index(k, l) : grid_.index(l, k)] = 0.0;
      continue;
    }
    for (std::size_t k = 0; k < len; ++k) {
      const std::size_t idx = axis == 0 ? grid_.index(k, l) : grid_.index(l, k);
      line_[k] = psi[idx];
      line_v_[k] = pot_scale * v_[idx];
      line_w_[k] = pot_scale * w_[idx];
    }
    crank_nicolson_line(line_, line_v_, line_w_, grid_.spacing(axis), constants_.mass[std::size_t(axis)],
                        constants_.hbar, dt, scratch_);
    for (std::size_t k = 0; k < len; ++k) psi[axis == 0 ? grid_.index(k, l) : grid_.index(l, k)] = line_[k];
  }
}

WaveFunction CrankNicolson::step(WaveFunction wf, double dt) {
  check_compatible(wf);
  if (dt == 0.0) return wf;
  require(!(dt < 0.0 && absorbing_), "backward propagation with an absorbing potential");
  sample_potential(wf.time() + 0.5 * dt);
  const double time = wf.time() + dt;
  std::vector<cplx> psi = std::move(wf).release();
  if (grid_.dims() == 1) {
    crank_nicolson_line(psi, v_, w_, grid_.spacing(0), constants_.mass[0], constants_.hbar, dt,
                        scratch_);
  } else {
    sweep(psi, 0, 0.5 * dt, 0.5);
    sweep(psi, 1, dt, 0.5);
    sweep(psi, 0, 0.5 * dt, 0.5);
  }
  return WaveFunction(grid_, std::move(psi), time, constants_);
}

// ---------------------------------------------------------------------------

std::unique_ptr<Propagator> make_propagator(Method m, const Grid& grid, const Constants& c,
                                            const Potential& pot) {
  if (m == Method::split_operator) return std::make_unique<SplitOperator>(grid, c, pot);
  return std::make_unique<CrankNicolson>(grid, c, pot);
}

std::unique_ptr<Propagator> make_propagator(const WaveFunction& like, const Potential& pot) {
  return make_propagator(default_method(like.grid().boundary()), like.grid(), like.constants(), pot);
}

WaveFunction step_split_operator(const WaveFunction& wf, const Potential& pot, double dt) {
  SplitOperator p(wf.grid(), wf.constants(), pot);
  return p.step(wf, dt);
}

WaveFunction step_crank_nicolson(const WaveFunction& wf, const Potential& pot, double dt) {
  CrankNicolson p(wf.grid(), wf.constants(), pot);
  return p.step(wf, dt);
}

double default_time_step(const WaveFunction& wf, const Potential& pot) {
  std::vector<double> v, w;
  pot.sample(wf.grid(), wf.time(), v, w);
  double vmax = 0.0;
  for (double x : v) vmax = std::max(vmax, std::abs(x));
  // Kinetic scale from the state's spectrum: (|<k>| + 3 dk)^2 hbar^2 / 2m per axis.
  const Grid& g = wf.grid();
  Fft fft(g.points(0), g.dims() == 2 ? g.points(1) : 1);
  std::vector<cplx> spec(wf.values().begin(), wf.values().end());
  fft.forward(spec);
  double total = 0.0;
  double ekin = 0.0;
  double k1[2] = {0, 0}, k2[2] = {0, 0};
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const double p = std::norm(spec[i]);
    total += p;
    for (int a = 0; a < g.dims(); ++a) {
      const double k = g.wavenumber(a, a == 0 ? i / g.points(1) : i % g.points(1));
      k1[a] += p * k;
      k2[a] += p * k * k;
    }
  }
  for (int a = 0; a < g.dims(); ++a) {
    const double mean = k1[a] / total;
    const double sd = std::sqrt(std::max(0.0, k2[a] / total - mean * mean));
    const double k = std::abs(mean) + 3.0 * sd;
    ekin += wf.hbar() * wf.hbar() * k * k / (2.0 * wf.mass(a));
  }
  const double scale = std::max({vmax, ekin, 1e-300});
  return 0.05 * wf.hbar() / scale;
}

}  // namespace bohmkit
