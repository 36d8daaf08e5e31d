#include "bohmkit/sap.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>

#include "bohmkit/error.hpp"
#include "bohmkit/propagators.hpp"
#include "bohmkit/sampling.hpp"

namespace bohmkit {

void SapParams::validate() const {
  for (std::size_t j = 0; j < 3; ++j)
    detail::require(depth[j] > 0.0 && width[j] > 0.0, "trap depths and widths must be positive");
  const double wmax = *std::max_element(width.begin(), width.end());
  detail::require(d_min > wmax, "minimum trap separation must exceed the trap width");
  detail::require(d_max > d_min, "need d_max > d_min");
  detail::require(T > 0.0, "total time must be positive");
  detail::require(pulse_width > 0.0 && std::abs(delay) < 0.5, "need pulse_width > 0 and |delay| < 0.5");
}

namespace {
double separation(const SapParams& p, double t, double centre) {
  const double u = (t - centre) / (p.pulse_width * p.T);
  return p.d_max - (p.d_max - p.d_min) * std::exp(-u * u);
}
double gauss_trap(double depth, double width, double x, double c) {
  const double u = (x - c) / width;
  return -depth * std::exp(-0.5 * u * u);
}
}  // namespace

double SapParams::separation_left(double t) const { return separation(*this, t, T * (0.5 + delay)); }
double SapParams::separation_right(double t) const { return separation(*this, t, T * (0.5 - delay)); }

std::array<double, 3> SapParams::centers(double t) const {
  return {-separation_left(t), 0.0, separation_right(t)};
}

double triple_well_value(const SapParams& p, double x, double t) {
  const auto c = p.centers(t);
  double v = 0.0;
  for (std::size_t j = 0; j < 3; ++j) v += gauss_trap(p.depth[j], p.width[j], x, c[j]);
  return v;
}

Potential triple_well_potential(const SapParams& p) {
  return Potential::analytic([p](const Point& r, double t) { return triple_well_value(p, r[0], t); }, true);
}

std::vector<double> box_spectrum(const std::vector<double>& v, double dx, double hbar, double mass,
                                 std::size_t count, std::vector<double>* ground) {
  const std::size_t n = v.size();
  detail::require(n >= 5, "spectrum needs at least 5 nodes");
  const std::size_t m = n - 2;
  const double a = hbar * hbar / (2.0 * mass * dx * dx);
  Eigen::VectorXd diag(static_cast<Eigen::Index>(m)), sub(static_cast<Eigen::Index>(m - 1));
  for (std::size_t i = 0; i < m; ++i) diag[Eigen::Index(i)] = 2.0 * a + v[i + 1];
  sub.setConstant(-a);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, ground ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error("tridiagonal eigensolver failed");
  std::vector<double> out;
  for (std::size_t k = 0; k < std::min(count, m); ++k) out.push_back(es.eigenvalues()[Eigen::Index(k)]);
  if (ground) {
    ground->assign(n, 0.0);
    const auto col = es.eigenvectors().col(0);
    const double sign = col.sum() < 0.0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < m; ++i) (*ground)[i + 1] = sign * col[Eigen::Index(i)] / std::sqrt(dx);
  }
  return out;
}

TunnelTable::TunnelTable(double depth_a, double width_a, double depth_b, double width_b, double dx, double hbar,
                         double mass, double d_lo, double d_hi, double step) {
  detail::require(d_hi > d_lo && step > 0.0 && dx > 0.0, "bad tunnel table range");
  const double pad = 8.0 * std::max(width_a, width_b) + 5.0;
  auto mesh = [&](double half) {
    const std::size_t n = std::size_t(std::ceil(2.0 * half / dx)) + 1;
    return std::pair{n, -0.5 * double(n - 1) * dx};
  };
  {
    const auto [n, x0] = mesh(pad);
    std::vector<double> va(n), vb(n);
    for (std::size_t i = 0; i < n; ++i) {
      va[i] = gauss_trap(depth_a, width_a, x0 + double(i) * dx, 0.0);
      vb[i] = gauss_trap(depth_b, width_b, x0 + double(i) * dx, 0.0);
    }
    eps_ = {box_spectrum(va, dx, hbar, mass, 1)[0], box_spectrum(vb, dx, hbar, mass, 1)[0]};
  }
  const double mean = 0.5 * (eps_[0] + eps_[1]), delta = eps_[1] - eps_[0];
  for (double d = d_lo; d <= d_hi + 1e-9; d += step) {
    const auto [n, x0] = mesh(0.5 * d + pad);
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = x0 + double(i) * dx;
      v[i] = gauss_trap(depth_a, width_a, x, -0.5 * d) + gauss_trap(depth_b, width_b, x, 0.5 * d);
    }
    const auto e = box_spectrum(v, dx, hbar, mass, 2);
    // split^2 = delta^2 + 4 J^2 for two coupled levels
    const double split = e[1] - e[0];
    const double j = 0.5 * std::sqrt(std::max(split * split - delta * delta, 1e-300));
    d_.push_back(d);
    logj_.push_back(std::log(j));
    shift_.push_back(0.5 * (e[0] + e[1]) - mean);
  }
  detail::require(d_.size() >= 2, "tunnel table needs at least two separations");
}

namespace {
std::pair<std::size_t, double> locate(const std::vector<double>& d, double x) {
  const double f = (x - d.front()) / (d[1] - d[0]);
  const auto i = std::size_t(std::clamp(std::floor(f), 0.0, double(d.size() - 2)));
  return {i, f - double(i)};
}
}  // namespace

double TunnelTable::coupling(double d) const {
  const auto [i, f] = locate(d_, d);  // linear extrapolation of log J outside
  return std::exp((1.0 - f) * logj_[i] + f * logj_[i + 1]);
}

double TunnelTable::shift(double d) const {
  if (d >= d_.back()) return shift_.back();
  if (d <= d_.front()) return shift_.front();
  const auto [i, f] = locate(d_, d);
  return (1.0 - f) * shift_[i] + f * shift_[i + 1];
}

std::array<double, 3> dark_state(double theta) { return {std::cos(theta), 0.0, -std::sin(theta)}; }

ThreeModeResult three_mode_sap_model(const std::function<double(double)>& J_LM,
                                     const std::function<double(double)>& J_MR, double T, double dt,
                                     const std::function<std::array<double, 3>(double)>& onsite,
                                     double record_interval) {
  detail::require(T > 0.0 && dt > 0.0, "three-mode model needs T > 0 and dt > 0");
  using cplx = std::complex<double>;
  const auto steps = std::size_t(std::ceil(T / dt - 1e-9));
  const double h = T / double(steps);
  const std::size_t every =
      record_interval > 0.0 ? std::max<std::size_t>(1, std::size_t(std::llround(record_interval / h))) : 1;
  Eigen::Vector3cd c(1.0, 0.0, 0.0);
  ThreeModeResult r;
  auto record = [&](double t) {
    r.t.push_back(t);
    for (int k = 0; k < 3; ++k) r.population[std::size_t(k)].push_back(std::norm(c[k]));
    const double th = std::atan2(J_LM(t), J_MR(t));
    const auto d = dark_state(th);
    r.theta.push_back(th);
    r.dark_overlap.push_back(std::norm(d[0] * c[0] + d[2] * c[2]));
  };
  record(0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es;
  for (std::size_t s = 1; s <= steps; ++s) {
    const double tm = (double(s) - 0.5) * h;
    const std::array<double, 3> e = onsite ? onsite(tm) : std::array<double, 3>{};
    const double a = J_LM(tm), b = J_MR(tm);
    Eigen::Matrix3d H;
    H << e[0], -a, 0.0, -a, e[1], -b, 0.0, -b, e[2];
    es.compute(H);
    const Eigen::Matrix3cd V = es.eigenvectors().cast<cplx>();
    Eigen::Vector3cd p = V.adjoint() * c;
    for (int k = 0; k < 3; ++k) p[k] *= std::polar(1.0, -es.eigenvalues()[k] * h);
    c = V * p;
    if (s % every == 0 || s == steps) record(s == steps ? T : double(s) * h);
  }
  return r;
}

// ---------------------------------------------------------------------------

namespace {

// Node weights of the left / middle / right basins, split at the midpoints
// between neighbouring trap centres.
std::array<double, 3> basin_populations(const WaveFunction& wf, const std::array<double, 3>& c) {
  const Grid& g = wf.grid();
  const double b1 = 0.5 * (c[0] + c[1]), b2 = 0.5 * (c[1] + c[2]);
  std::array<double, 3> p{};
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.coord(0, i);
    p[x < b1 ? 0 : (x <= b2 ? 1 : 2)] += g.weight(i) * std::norm(wf[i]);
  }
  return p;
}

int basin_of(double x, const std::array<double, 3>& c) {
  return x < 0.5 * (c[0] + c[1]) ? 0 : (x <= 0.5 * (c[1] + c[2]) ? 1 : 2);
}

}  // namespace

SapResult run_sap(const SapParams& p, const SapRunOptions& opt) {
  p.validate();
  detail::require(opt.dx > 0.0 && opt.dt > 0.0 && opt.margin > 0.0, "SAP run needs dx, dt, margin > 0");
  detail::require(opt.M >= 1, "SAP run needs at least one trajectory");
  const double half = p.d_max + opt.margin;
  const auto n = std::size_t(std::ceil(2.0 * half / opt.dx)) + 1;
  const Grid g = make_grid_1d(-half, half, n, Boundary::box);
  const Constants k{opt.hbar, {opt.mass, 1.0}};

  // left-trap ground state of the same 3-point Hamiltonian
  std::vector<double> v_left(n), ground;
  const double xl0 = p.centers(0.0)[0];
  for (std::size_t i = 0; i < n; ++i) v_left[i] = gauss_trap(p.depth[0], p.width[0], g.coord(0, i), xl0);
  box_spectrum(v_left, g.spacing(0), opt.hbar, opt.mass, 1, &ground);
  std::vector<cplx> psi0(ground.begin(), ground.end());
  WaveFunction wf = normalize(WaveFunction(g, std::move(psi0), 0.0, k));

  // three-mode oracle from the calibrated pair couplings
  const TunnelTable lm(p.depth[0], p.width[0], p.depth[1], p.width[1], g.spacing(0), opt.hbar, opt.mass,
                       p.d_min - 0.5, p.d_max + 0.5);
  const TunnelTable mr(p.depth[1], p.width[1], p.depth[2], p.width[2], g.spacing(0), opt.hbar, opt.mass,
                       p.d_min - 0.5, p.d_max + 0.5);
  const double rec = opt.record_interval > 0.0 ? opt.record_interval : p.T / 400.0;

  SapResult res;
  auto jl = [&](double t) { return lm.coupling(p.separation_left(t)); };
  auto jr = [&](double t) { return mr.coupling(p.separation_right(t)); };
  auto onsite = [&](double t) {
    const double sl = lm.shift(p.separation_left(t)), sr = mr.shift(p.separation_right(t));
    return std::array<double, 3>{lm.isolated_energy(0) + sl, lm.isolated_energy(1) + sl + sr,
                                 mr.isolated_energy(1) + sr};
  };
  res.model = three_mode_sap_model(jl, jr, p.T, std::min(opt.dt, 0.5), onsite, rec);

  CrankNicolson prop(g, k, triple_well_potential(p));
  TrajectoryEnsemble ens = make_ensemble(sample_quantum_equilibrium(wf, opt.M, opt.seed), 0.0, 1, 1, opt.seed);
  FieldTimeline tl;
  tl.push(wf);
  update_velocities(ens, tl);

  std::vector<double> own_peak(opt.M, 0.0);
  res.member_middle_peak.assign(opt.M, 0.0);
  std::vector<char> own_peak_middle(opt.M, 0);
  auto observe = [&](double t, bool record) {
    const auto c = p.centers(t);
    const auto pop = basin_populations(wf, c);
    res.max_middle_population = std::max(res.max_middle_population, pop[1]);
    res.max_norm_drift = std::max(res.max_norm_drift, std::abs(1.0 - (pop[0] + pop[1] + pop[2])));
    for (std::size_t a = 0; a < ens.size(); ++a) {
      if (ens.exited(a)) continue;
      const double s = std::abs(ens.velocity[a][0]);
      const bool mid = basin_of(ens.position[a][0], c) == 1;
      if (mid) res.member_middle_peak[a] = std::max(res.member_middle_peak[a], s);
      if (s > own_peak[a]) {
        own_peak[a] = s;
        own_peak_middle[a] = mid;
      }
    }
    if (record) {
      res.t.push_back(t);
      for (std::size_t j = 0; j < 3; ++j) res.population[j].push_back(pop[j]);
      ens.record();
    }
  };
  observe(0.0, true);

  const auto steps = std::size_t(std::ceil(p.T / opt.dt - 1e-9));
  const double h = p.T / double(steps);
  const std::size_t every = std::max<std::size_t>(1, std::size_t(std::llround(rec / h)));
  for (std::size_t s = 1; s <= steps; ++s) {
    const double ta = (double(s) - 0.5) * h, tb = s == steps ? p.T : double(s) * h;
    wf = prop.step(std::move(wf), 0.5 * h).with_time(ta);
    tl.push(wf);
    wf = prop.step(std::move(wf), 0.5 * h).with_time(tb);
    tl.push(wf);
    advance_trajectories(ens, tl, h);
    ens.time = tb;
    update_velocities(ens, tl);
    observe(tb, s % every == 0 || s == steps);
    tl.drop_before(tb);
  }

  res.fidelity = res.population[2].back();
  res.model_fidelity = res.model.population[2].back();
  std::size_t peaks = 0;
  for (std::size_t a = 0; a < opt.M; ++a) peaks += own_peak_middle[a] ? 1 : 0;
  res.peak_in_middle_fraction = double(peaks) / double(opt.M);
  std::vector<double> sorted = res.member_middle_peak;
  std::sort(sorted.begin(), sorted.end());
  res.peak_middle_speed = opt.M % 2 ? sorted[opt.M / 2] : 0.5 * (sorted[opt.M / 2 - 1] + sorted[opt.M / 2]);
  res.max_middle_speed = sorted.back();
  res.adiabatic = res.fidelity >= 0.5;
  res.ensemble = std::move(ens);
  return res;
}

}  // namespace bohmkit
