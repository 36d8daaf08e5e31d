#include "bohmkit/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "bohmkit/error.hpp"
#include "bohmkit/observables.hpp"
#include "bohmkit/polar.hpp"
#include "bohmkit/sampling.hpp"
#include "bohmkit/stats.hpp"

namespace bohmkit {

namespace {

constexpr double kPi = std::numbers::pi;

// first two moments of |psi|^2 along axis 0 of a 1D field
std::pair<double, double> mean_width(const WaveFunction& wf) {
  const Grid& g = wf.grid();
  double s0 = 0.0, s1 = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double w = g.weight(i) * std::norm(wf[i]), x = g.coord(0, i);
    s0 += w;
    s1 += w * x;
    s2 += w * x * x;
  }
  const double m = s1 / s0;
  return {m, std::sqrt(std::max(0.0, s2 / s0 - m * m))};
}

double median(std::vector<double> v) {
  detail::require(!v.empty(), "median of an empty set");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

double free_gaussian_width(double sigma0, double t, double hbar, double mass) {
  const double r = hbar * t / (2.0 * mass * sigma0 * sigma0);
  return sigma0 * std::sqrt(1.0 + r * r);
}

FreePacketResult run_free_packet(const FreePacketParams& p) {
  detail::require(p.steps >= 1 && p.dt > 0.0 && p.M >= 1, "free packet needs steps, dt and M");
  const Grid g = make_grid_1d(p.lo, p.hi, p.points, Boundary::periodic);
  const WaveFunction wf = init_gaussian(g, {{p.center, 0.0}, {p.sigma, 1.0}, {p.k0, 0.0}}, p.constants);
  const double hbar = p.constants.hbar, m = p.constants.mass[0];
  SplitOperator prop(g, p.constants);

  FreePacketResult res;
  std::vector<WaveFunction> last;  // the last three states, for the continuity residual
  CoevolutionOptions opt;
  opt.dt = p.dt;
  opt.record_interval = p.record_interval;
  opt.field_checkpoints.interval = p.record_interval;
  opt.field_checkpoints.on_step = [&](const WaveFunction& s) {
    last.push_back(s);
    if (last.size() > 3) last.erase(last.begin());
  };
  opt.on_record = [&](const WaveFunction& s, const TrajectoryEnsemble&) {
    const double t = s.time(), w = mean_width(s).second, we = free_gaussian_width(p.sigma, t, hbar, m);
    res.t.push_back(t);
    res.width.push_back(w);
    res.width_exact.push_back(we);
    res.max_width_error = std::max(res.max_width_error, std::abs(w - we) / we);
  };
  const double t1 = p.dt * double(p.steps);
  auto ens = make_ensemble(sample_quantum_equilibrium(wf, p.M, p.seed), 0.0, 1, 1, p.seed);
  CoevolutionResult run = coevolve(wf, prop, std::move(ens), t1, opt);

  for (double n : run.record.norms) res.max_norm_drift = std::max(res.max_norm_drift, std::abs(n - 1.0));
  if (last.size() == 3) {
    const auto r = continuity_residual(last[0], last[1], last[2]);
    for (double v : r) res.continuity_max = std::max(res.continuity_max, std::abs(v));
  }
  // x(t) = x_c(t) + (x(0) - x_c(0)) sigma(t) / sigma0
  const TrajectoryEnsemble& e = run.ensemble;
  for (std::size_t h = 0; h < e.times.size(); ++h) {
    const double t = e.times[h];
    const double xc = p.center + hbar * p.k0 * t / m, scale = free_gaussian_width(p.sigma, t, hbar, m) / p.sigma;
    for (std::size_t a = 0; a < e.size(); ++a) {
      const double want = xc + (e.coordinate(0, a, 0) - p.center) * scale;
      res.max_path_error = std::max(res.max_path_error, std::abs(e.coordinate(h, a, 0) - want));
    }
  }
  res.ensemble = std::move(run.ensemble);
  res.final_state = std::move(run.record.final_state);
  return res;
}

HarmonicResult run_harmonic_coherent(const HarmonicParams& p) {
  detail::require(p.omega > 0.0 && p.dt > 0.0 && p.periods > 0.0 && p.M >= 1, "harmonic run needs omega, dt, periods, M > 0");
  const double hbar = p.constants.hbar, m = p.constants.mass[0], w = p.omega;
  const Grid g = make_grid_1d(p.lo, p.hi, p.points, Boundary::periodic);
  const double sigma = std::sqrt(hbar / (2.0 * m * w));
  const WaveFunction wf = init_gaussian(g, {{p.displacement, 0.0}, {sigma, 1.0}, {0.0, 0.0}}, p.constants);
  const Potential pot = Potential::analytic([m, w](const Point& r, double) { return 0.5 * m * w * w * r[0] * r[0]; });
  SplitOperator prop(g, p.constants, pot);
  const OperatorSpec h = OperatorSpec::hamiltonian(pot);
  const double e0 = expectation_operator(wf, h);

  HarmonicResult res;
  CoevolutionOptions opt;
  opt.dt = p.dt;
  opt.record_interval = p.record_interval;
  opt.field_checkpoints.interval = p.record_interval;
  opt.on_record = [&](const WaveFunction& s, const TrajectoryEnsemble&) {
    const double t = s.time();
    const auto [mx, wd] = mean_width(s);
    const double want = p.displacement * std::cos(w * t);
    res.t.push_back(t);
    res.mean_x.push_back(mx);
    res.width.push_back(wd);
    res.max_centroid_error = std::max(res.max_centroid_error, std::abs(mx - want));
    res.max_width_change = std::max(res.max_width_change, std::abs(wd - sigma) / sigma);
    res.energy_drift = std::max(res.energy_drift, std::abs(expectation_operator(s, h) - e0) / std::abs(e0));
  };
  const double t1 = p.periods * 2.0 * kPi / w;
  auto ens = make_ensemble(sample_quantum_equilibrium(wf, p.M, p.seed), 0.0, 1, 1, p.seed);
  CoevolutionResult run = coevolve(wf, prop, std::move(ens), t1, opt);
  const TrajectoryEnsemble& e = run.ensemble;
  for (std::size_t k = 0; k < e.times.size(); ++k) {
    const double shift = p.displacement * (std::cos(w * e.times[k]) - 1.0);
    for (std::size_t a = 0; a < e.size(); ++a)
      res.max_rigid_error =
          std::max(res.max_rigid_error, std::abs(e.coordinate(k, a, 0) - e.coordinate(0, a, 0) - shift));
  }
  res.ensemble = std::move(run.ensemble);
  return res;
}

double eckart_transmission(const EckartParams& b, double k, double hbar, double mass) {
  detail::require(b.a > 0.0, "Eckart barrier needs a > 0");
  if (k <= 0.0) return 0.0;
  const double s = std::sinh(kPi * k * b.a);
  const double q = 8.0 * mass * b.V0 * b.a * b.a / (hbar * hbar) - 1.0;
  const double c = q >= 0.0 ? std::cosh(0.5 * kPi * std::sqrt(q)) : std::cos(0.5 * kPi * std::sqrt(-q));
  // large arguments: both terms overflow together
  if (!std::isfinite(s * s) || !std::isfinite(c * c)) {
    const double ls = kPi * k * b.a, lc = q >= 0.0 ? 0.5 * kPi * std::sqrt(q) : 0.0;
    return 1.0 / (1.0 + std::exp(2.0 * (lc - ls)));
  }
  return s * s / (s * s + c * c);
}

double eckart_packet_transmission(const EckartParams& b, double k0, double sigma, double hbar, double mass) {
  detail::require(sigma > 0.0, "packet width must be positive");
  const double sk = 0.5 / sigma;
  const double lo = std::max(0.0, k0 - 10.0 * sk), hi = k0 + 10.0 * sk;
  const std::size_t n = 4000;  // Simpson, even
  const double h = (hi - lo) / double(n);
  double acc = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    const double k = lo + h * double(i);
    const double wgt = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    const double z = (k - k0) / sk;
    acc += wgt * std::exp(-0.5 * z * z) * eckart_transmission(b, k, hbar, mass);
  }
  return acc * h / 3.0 / (sk * std::sqrt(2.0 * kPi));
}

BarrierResult run_barrier(const BarrierParams& p) {
  detail::require(p.dt > 0.0 && p.t_end > 0.0 && p.M >= 1, "barrier run needs dt, t_end, M > 0");
  detail::require(p.k0 > 0.0, "the packet must move towards the barrier (k0 > 0)");
  detail::require(p.x0 + 4.0 * p.sigma < p.barrier.center - 4.0 * p.barrier.a,
                  "the packet must start clear of the barrier");
  const Grid g = make_grid_1d(p.lo, p.hi, p.points, p.boundary);
  const WaveFunction wf = init_gaussian(g, {{p.x0, 0.0}, {p.sigma, 1.0}, {p.k0, 0.0}}, p.constants);
  const EckartParams b = p.barrier;
  const Potential pot = Potential::analytic([b](const Point& r, double) {
    const double c = std::cosh((r[0] - b.center) / b.a);
    return b.V0 / (c * c);
  });
  auto prop = make_propagator(default_method(p.boundary), g, p.constants, pot);
  auto ens = make_ensemble(sample_quantum_equilibrium(wf, p.M, p.seed), 0.0, 1, 1, p.seed);

  BarrierResult res;
  std::vector<std::size_t> order(p.M);
  std::iota(order.begin(), order.end(), std::size_t(0));
  std::sort(order.begin(), order.end(), [&](auto i, auto j) { return ens.position[i][0] < ens.position[j][0]; });
  CoevolutionOptions opt;
  opt.dt = p.dt;
  opt.record_interval = p.record_interval > 0.0 ? p.record_interval : p.t_end / 100.0;
  opt.field_checkpoints.interval = opt.record_interval;
  opt.on_record = [&](const WaveFunction&, const TrajectoryEnsemble& e) {
    for (std::size_t i = 1; i < order.size(); ++i)
      if (e.position[order[i]][0] < e.position[order[i - 1]][0]) res.ordering_preserved = false;
  };
  CoevolutionResult run = coevolve(wf, *prop, std::move(ens), p.t_end, opt);

  const WaveFunction& f = run.record.final_state;
  double total = 0.0, beyond = 0.0, near = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.coord(0, i), w = g.weight(i) * std::norm(f[i]);
    total += w;
    if (x > b.center) beyond += w;
    if (std::abs(x - b.center) < 5.0 * b.a) near += w;
  }
  res.transmission_grid = beyond / total;
  res.residual_near_barrier = near / total;
  res.transmission_exact =
      eckart_packet_transmission(b, p.k0, p.sigma, p.constants.hbar, p.constants.mass[0]);
  std::size_t through = 0;
  for (const Point& r : run.ensemble.position) through += r[0] > b.center ? 1 : 0;
  const double frac = double(through) / double(p.M);
  res.transmission_trajectories = frac;
  res.trajectory_stderr = std::sqrt(std::max(frac * (1.0 - frac), 1.0 / double(p.M)) / double(p.M));
  res.ensemble = std::move(run.ensemble);
  return res;
}

double fringe_visibility(const std::vector<double>& y, double floor_fraction) {
  if (y.size() < 3) return 0.0;
  const double top = *std::max_element(y.begin(), y.end());
  if (top <= 0.0) return 0.0;
  const double floor = floor_fraction * top;
  double best = 0.0;
  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    if (!(y[i] < y[i - 1] && y[i] <= y[i + 1])) continue;
    // climb to the neighbouring maxima on both sides
    std::size_t l = i, r = i;
    while (l > 0 && y[l - 1] >= y[l]) --l;
    while (r + 1 < y.size() && y[r + 1] >= y[r]) ++r;
    const double peak = std::min(y[l], y[r]);
    if (peak < floor) continue;
    best = std::max(best, (peak - y[i]) / (peak + y[i]));
  }
  return best;
}

DoubleSlitResult run_double_slit(const DoubleSlitParams& p) {
  detail::require(p.dt > 0.0 && p.t_end > 0.0 && p.M >= 1, "double slit needs dt, t_end, M > 0");
  detail::require(p.separation > 0.0 && p.sigma_y > 0.0, "slits need a separation and a width");
  detail::require(p.single_slit || p.lower_amplitude > 0.0, "the lower aperture needs a positive amplitude");
  const Grid g = make_grid_2d({p.x_lo, p.x_hi, p.points_x}, {-p.y_half_width, p.y_half_width, p.points_y},
                              Boundary::periodic);
  const double ys = 0.5 * p.separation;
  WaveFunction wf = init_gaussian(g, {{p.x0, ys}, {p.sigma_x, p.sigma_y}, {p.kx, 0.0}}, p.constants);
  if (!p.single_slit) {
    const WaveFunction lower = init_gaussian(g, {{p.x0, -ys}, {p.sigma_x, p.sigma_y}, {p.kx, 0.0}}, p.constants);
    wf = normalize(superpose(wf, 1.0, lower, p.lower_amplitude));
  }
  SplitOperator prop(g, p.constants);
  auto ens = make_ensemble(sample_quantum_equilibrium(spectral_refine(wf, std::max<std::size_t>(1, p.sample_refine)), p.M, p.seed),
                           0.0, 1, 2, p.seed);

  DoubleSlitResult res;
  res.symmetric = !p.single_slit && p.lower_amplitude == 1.0;
  res.upper.resize(p.M);
  for (std::size_t a = 0; a < p.M; ++a) res.upper[a] = ens.position[a][1] > 0.0 ? 1 : 0;
  CoevolutionOptions opt;
  opt.dt = p.dt;
  opt.record_interval = p.record_interval > 0.0 ? p.record_interval : p.t_end / 20.0;
  opt.field_checkpoints.interval = opt.record_interval;
  CoevolutionResult run = coevolve(wf, prop, std::move(ens), p.t_end, opt);
  const WaveFunction& f = run.record.final_state;

  std::size_t crossed = 0;
  std::vector<double> yf(p.M);
  for (std::size_t a = 0; a < p.M; ++a) {
    yf[a] = run.ensemble.position[a][1];
    if (res.symmetric && (yf[a] > 0.0) != bool(res.upper[a])) ++crossed;
  }
  res.non_mixing_fraction = double(crossed) / double(p.M);
  const LinearDensityCdf cdf = marginal_cdf(f, 1);
  const Chi2Result chi = chi2_equiprobable(
      yf, [&](double y) { return cdf.cdf(y); }, [&](double u) { return cdf.quantile(u); });
  res.chi2_p_value = chi.p_value;
  res.chi2_statistic = chi.statistic;
  res.chi2_bins = chi.bins;

  const std::size_t n = g.points(1);
  res.y_nodes.resize(n);
  res.y_marginal.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    res.y_nodes[j] = g.coord(1, j);
    for (std::size_t i = 0; i < g.points(0); ++i)
      res.y_marginal[j] += g.trapezoid_weight(0, i) * g.spacing(0) * std::norm(f[g.index(i, j)]);
  }
  res.visibility = fringe_visibility(res.y_marginal);
  res.ensemble = std::move(run.ensemble);
  res.final_state = f;
  return res;
}

WellMomentumResult run_well_momentum(const WellMomentumParams& p) {
  detail::require(p.L > 0.0 && p.n >= 1, "well needs L > 0 and n >= 1");
  detail::require(p.box_points >= 9 && p.box_points % 2 == 1, "box_points must be odd (centre on a node)");
  detail::require(p.free_points > 2 * p.box_points, "free grid must be larger than the box");
  detail::require(p.t_release >= 0.0 && p.t_flight > 0.0 && p.dt_box > 0.0 && p.dt_free > 0.0 && p.M >= 1,
                  "well run needs positive times, steps and M");
  const double hbar = p.constants.hbar, m = p.constants.mass[0];
  const Grid box = make_grid_1d(0.0, p.L, p.box_points, Boundary::box);
  const double dx = box.spacing(0);
  WaveFunction wf = init_well_eigenstate(box, p.L, p.n, 0.0, p.constants);
  auto ens = make_ensemble(sample_quantum_equilibrium(wf, p.M, p.seed), 0.0, 1, 1, p.seed);

  WellMomentumResult res;
  res.p_exact = p.n * kPi * hbar / p.L;
  if (p.t_release > 0.0) {
    CrankNicolson cn(box, p.constants);
    CoevolutionOptions opt;
    opt.dt = p.dt_box;
    opt.record_interval = p.t_release;
    opt.field_checkpoints.interval = p.t_release;
    std::vector<double> x0(p.M);
    for (std::size_t a = 0; a < p.M; ++a) x0[a] = ens.position[a][0];
    CoevolutionResult run = coevolve(wf, cn, std::move(ens), p.t_release, opt);
    ens = std::move(run.ensemble);
    for (std::size_t a = 0; a < p.M; ++a)
      res.max_displacement_before = std::max(res.max_displacement_before, std::abs(ens.position[a][0] - x0[a]));
    wf = std::move(run.record.final_state);
  }

  // same nodes on a periodic grid centred on the well
  const std::size_t off = p.free_points / 2 - (p.box_points - 1) / 2;
  const double lo = -double(off) * dx;
  const Grid free = make_grid_1d(lo, lo + dx * double(p.free_points - 1), p.free_points, Boundary::periodic);
  std::vector<cplx> psi(p.free_points, cplx(0.0));
  for (std::size_t i = 0; i < p.box_points; ++i) psi[off + i] = wf[i];
  WaveFunction released(free, std::move(psi), p.t_release, p.constants);

  ens.times.clear();
  ens.position_history.clear();
  ens.velocity_history.clear();
  ens.flags_history.clear();
  SplitOperator prop(free, p.constants);
  CoevolutionOptions opt;
  opt.dt = p.dt_free;
  opt.record_interval = p.t_flight / 10.0;
  opt.field_checkpoints.interval = opt.record_interval;
  CoevolutionResult run = coevolve(released, prop, std::move(ens), p.t_release + p.t_flight, opt);

  const WaveFunction& f = run.record.final_state;
  double total = 0.0, inner = 0.0;
  for (std::size_t i = 0; i < free.size(); ++i) {
    const double w = free.weight(i) * std::norm(f[i]);
    total += w;
    if (std::abs(free.coord(0, i) - 0.5 * p.L) < p.L) inner += w;
  }
  res.overlap = inner / total;
  if (res.overlap > p.max_overlap)
    throw InvalidArgument("flight time too short: " + std::to_string(res.overlap) +
                          " of the density is still within L of the well");

  // time of flight over the second half, where the offset of the start
  // point inside the well no longer biases the estimate
  const TrajectoryEnsemble& e = run.ensemble;
  const std::size_t last = e.times.size() - 1, mid = last / 2;
  const double span = e.times[last] - e.times[mid];
  res.p_estimate.resize(p.M);
  std::vector<double> mag(p.M);
  std::size_t positive = 0;
  for (std::size_t a = 0; a < p.M; ++a) {
    res.p_estimate[a] = m * (e.coordinate(last, a, 0) - e.coordinate(mid, a, 0)) / span;
    mag[a] = std::abs(res.p_estimate[a]);
    positive += res.p_estimate[a] > 0.0 ? 1 : 0;
  }
  res.median_abs_p = median(mag);
  res.positive_fraction = double(positive) / double(p.M);
  res.ensemble = std::move(run.ensemble);
  return res;
}

}  // namespace bohmkit
