#include "bohmkit/conditional.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>

#include "bohmkit/error.hpp"
#include "bohmkit/interpolation.hpp"
#include "bohmkit/parallel.hpp"
#include "bohmkit/rng.hpp"
#include "bohmkit/sampling.hpp"
#include "bohmkit/units.hpp"
#include "bohmkit/velocity.hpp"

namespace bohmkit {

double TwoBodyConfig::k0(int a) const {
  const PacketSpec& p = packet[std::size_t(a)];
  const double m = constants.mass[std::size_t(a)];
  return double(p.direction) * std::sqrt(2.0 * m * p.e0) / constants.hbar;
}

void TwoBodyConfig::validate() const {
  detail::require(F >= 0.0, "coupling F must be >= 0");
  detail::require(hi > lo, "grid bounds must satisfy lo < hi");
  detail::require(points_1d >= 16 && points_2d >= 16, "grids need at least 16 points per axis");
  detail::require(dt > 0.0 && t_end >= 0.0, "need dt > 0 and t_end >= 0");
  detail::require(M >= 1, "need at least one realization");
  for (const PacketSpec& p : packet) {
    detail::require(p.e0 >= 0.0 && p.sigma > 0.0, "packets need e0 >= 0 and sigma > 0");
    detail::require(p.direction == 1 || p.direction == -1, "packet direction must be +1 or -1");
    detail::require(p.center - 3 * p.sigma > lo && p.center + 3 * p.sigma < hi, "packets must lie inside the grid");
  }
}

TwoBodyConfig two_electron_benchmark(double F_eV_per_m2, double t_end_fs, double dt_fs, std::size_t M,
                                     std::uint64_t seed) {
  const PhysicalUnits u(UnitSystem::ev_nm_fs);
  TwoBodyConfig cfg;
  cfg.F = u.stiffness_to_internal(F_eV_per_m2 * 1e-18);  // eV/nm^2
  cfg.packet[0] = {u.energy_to_internal(0.06), 50.0, 25.0, 1};
  cfg.packet[1] = {u.energy_to_internal(0.04), -50.0, 25.0, 1};
  cfg.frame_velocity = 0.5 * (cfg.k0(0) + cfg.k0(1));
  cfg.dt = u.time_to_internal(dt_fs);
  cfg.t_end = u.time_to_internal(t_end_fs);
  cfg.record_interval = u.time_to_internal(20.0);
  cfg.M = M;
  cfg.seed = seed;
  return cfg;
}

WaveFunction initial_packet(const TwoBodyConfig& cfg, int a, bool boosted) {
  const Grid g = make_grid_1d(cfg.lo, cfg.hi, cfg.points_1d, Boundary::box);
  const PacketSpec& p = cfg.packet[std::size_t(a)];
  const double m = cfg.constants.mass[std::size_t(a)];
  const double k = cfg.k0(a) - (boosted ? m * cfg.frame_velocity / cfg.constants.hbar : 0.0);
  return init_gaussian(g, {{p.center, 0}, {p.sigma, 0}, {k, 0}}, {cfg.constants.hbar, {m, 1.0}});
}

std::vector<Point> sample_product_state(const TwoBodyConfig& cfg) {
  cfg.validate();
  const LinearDensityCdf c1 = marginal_cdf(initial_packet(cfg, 0, false), 0);
  const LinearDensityCdf c2 = marginal_cdf(initial_packet(cfg, 1, false), 0);
  std::vector<Point> out(cfg.M);
  for (std::size_t a = 0; a < cfg.M; ++a) {
    auto rng = make_stream(cfg.seed, a + 1);
    const double x1 = c1.quantile(uniform01(rng));
    out[a] = {x1, c2.quantile(uniform01(rng))};
  }
  return out;
}

KineticSeries ensemble_kinetic_energy(const TrajectoryEnsemble& ens, const Constants& c) {
  detail::require(ens.size() > 0, "kinetic energy of an empty ensemble");
  KineticSeries s;
  s.particles = ens.particles;
  const std::size_t P = ens.particles;
  std::vector<double> k;
  for (std::size_t h = 0; h < ens.times.size(); ++h) {
    s.t.push_back(ens.times[h]);
    std::size_t active = 0;
    for (std::size_t a = 0; a < ens.size(); ++a)
      if (!(ens.flags_history[h][a] & kExited)) ++active;
    s.active.push_back(active);
    for (std::size_t p = 0; p < P; ++p) {
      k.clear();
      for (std::size_t a = 0; a < ens.size(); ++a) {
        if (ens.flags_history[h][a] & kExited) continue;
        const Point& v = ens.velocity_history[h][a];
        const double v2 = P == 1 && ens.spatial_dims == 2 ? v[0] * v[0] + v[1] * v[1] : v[p] * v[p];
        k.push_back(0.5 * c.mass[p] * v2);
      }
      if (k.empty()) throw InvalidArgument("kinetic energy of an empty ensemble");
      const MeanStderr ms = mean_stderr(k);
      s.K[p].push_back(ms.mean);
      s.std_error[p].push_back(ms.std_error);
    }
  }
  return s;
}

// ---------------------------------------------------------------------------

namespace {

WaveFunction initial_product_2d(const TwoBodyConfig& cfg) {
  const Grid g = make_grid_1d(cfg.lo, cfg.hi, cfg.points_2d, Boundary::periodic);
  WaveFunction w[2];
  for (int a = 0; a < 2; ++a) {
    const PacketSpec& p = cfg.packet[std::size_t(a)];
    const double m = cfg.constants.mass[std::size_t(a)];
    const double k = cfg.k0(a) - m * cfg.frame_velocity / cfg.constants.hbar;
    w[a] = init_gaussian(g, {{p.center, 0}, {p.sigma, 0}, {k, 0}}, {cfg.constants.hbar, {m, 1.0}});
  }
  return product_state(w[0], w[1]);
}

Potential coupling_potential(double F) {
  return Potential::analytic([F](const Point& r, double) { return F * (r[0] - r[1]) * (r[0] - r[1]); });
}

// Quadrature of rho m (v_a + u)^2 / 2 over the plane.
double quadrature_kinetic(const WaveFunction& wf, int a, double u) {
  const auto vf = velocity_field(wf);
  const Grid& g = wf.grid();
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double rho = g.weight(i) * std::norm(wf[i]);
    den += rho;
    if (vf.mask[i]) continue;
    const double v = vf.v[std::size_t(a)][i] + u;
    num += rho * 0.5 * wf.mass(a) * v * v;
  }
  return num / den;
}

// Shifts a boosted-frame ensemble history to the lab frame in place.
void to_lab_frame(TrajectoryEnsemble& ens, double u, std::size_t dims) {
  for (std::size_t h = 0; h < ens.times.size(); ++h) {
    const double shift = u * ens.times[h];
    for (std::size_t a = 0; a < ens.size(); ++a)
      for (std::size_t k = 0; k < dims; ++k) {
        ens.position_history[h][a][k] += shift;
        if (!(ens.flags_history[h][a] & kExited)) ens.velocity_history[h][a][k] += u;
      }
  }
  for (std::size_t a = 0; a < ens.size(); ++a)
    for (std::size_t k = 0; k < dims; ++k) {
      ens.position[a][k] += u * ens.time;
      if (!(ens.flags[a] & kExited)) ens.velocity[a][k] += u;
    }
}

}  // namespace

ExactTwoBodyResult solve_exact_2d(const TwoBodyConfig& cfg, std::vector<Point> start, bool store_fields) {
  cfg.validate();
  if (start.empty()) start = sample_product_state(cfg);
  const double u = cfg.frame_velocity;
  const WaveFunction phi = initial_product_2d(cfg);
  // Lab positions at t = 0 coincide with the boosted frame.
  auto ens = make_ensemble(start, 0.0, 2, 1, cfg.seed);
  SplitOperator prop(phi.grid(), phi.constants(), coupling_potential(cfg.F));

  ExactTwoBodyResult res;
  res.quadrature.particles = 2;
  CoevolutionOptions opt;
  opt.dt = cfg.dt;
  opt.record_interval = cfg.record_interval;
  opt.field_checkpoints.store_fields = store_fields;
  opt.field_checkpoints.interval = cfg.record_interval;
  opt.on_record = [&](const WaveFunction& wf, const TrajectoryEnsemble& e) {
    res.quadrature.t.push_back(wf.time());
    res.quadrature.active.push_back(e.active());
    for (int a = 0; a < 2; ++a) {
      res.quadrature.K[std::size_t(a)].push_back(quadrature_kinetic(wf, a, u));
      res.quadrature.std_error[std::size_t(a)].push_back(0.0);
    }
  };
  auto co = coevolve(phi, prop, std::move(ens), cfg.t_end, opt);
  res.record = std::move(co.record);
  res.ensemble = std::move(co.ensemble);
  to_lab_frame(res.ensemble, u, 2);
  res.trajectories = ensemble_kinetic_energy(res.ensemble, cfg.constants);
  return res;
}

ConditionalSlice conditional_slice(const WaveFunction& phi, double x2) {
  const Grid& g = phi.grid();
  detail::require(g.dims() == 2, "conditional slice needs a 2D field");
  if (!(x2 >= g.origin(1) && x2 <= g.upper(1))) throw InvalidArgument("slice position outside the grid");
  const Grid line = make_grid_1d(g.origin(0), g.upper(0), g.points(0), g.boundary(), g.cap());
  std::vector<cplx> v(g.points(0), 0.0);
  const double s = fractional_index(g, 1, x2);
  const double sr = std::round(s);
  if (std::abs(s - sr) <= 1e-12) {
    const auto j = std::size_t(sr);
    for (std::size_t i = 0; i < g.points(0); ++i) v[i] = phi[g.index(i, j)];
  } else {
    const CubicStencil st = cubic_stencil(s, g.points(1));
    for (std::size_t i = 0; i < g.points(0); ++i)
      for (std::size_t k = 0; k < 4; ++k) v[i] += st.w[k] * phi[g.index(i, st.first + k)];
  }
  ConditionalSlice out;
  out.zero_field = std::all_of(v.begin(), v.end(), [](cplx z) { return z == cplx(0.0); });
  out.field = WaveFunction(line, std::move(v), phi.time(), Constants{phi.hbar(), {phi.mass(0), 1.0}});
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct Line {
  double x0 = 0.0, dx = 1.0;
  std::size_t n = 0;
  double cap = 0.0;
};

double line_node_velocity(const std::vector<cplx>& psi, std::size_t i, double scale) {
  if (i == 0) return scale * phase_increment(psi[0], psi[1]);
  if (i + 1 == psi.size()) return scale * phase_increment(psi[i - 1], psi[i]);
  return 0.5 * scale * (phase_increment(psi[i - 1], psi[i]) + phase_increment(psi[i], psi[i + 1]));
}

// Cubic interpolation of node velocities, as velocity_at() for 1D fields.
double line_velocity(const std::vector<cplx>& psi, const Line& l, double scale, double x) {
  const CubicStencil st = cubic_stencil((x - l.x0) / l.dx, l.n);
  double acc = 0.0;
  for (std::size_t k = 0; k < 4; ++k) acc += st.w[k] * line_node_velocity(psi, st.first + k, scale);
  return std::clamp(acc, -l.cap, l.cap);
}

double line_norm2(const std::vector<cplx>& psi, double dx) {
  double s = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double w = (i == 0 || i + 1 == psi.size()) ? 0.5 : 1.0;
    s += w * std::norm(psi[i]);
  }
  return s * dx;
}

}  // namespace

ConditionalResult run_conditional(const TwoBodyConfig& cfg, std::vector<Point> start, const CouplingHook& hook) {
  cfg.validate();
  if (start.empty()) start = sample_product_state(cfg);
  detail::require(start.size() == cfg.M, "start points must match M");
  const double u = cfg.frame_velocity;
  const double hbar = cfg.constants.hbar;
  const WaveFunction init[2] = {initial_packet(cfg, 0, true), initial_packet(cfg, 1, true)};
  const Grid& g = init[0].grid();
  Line line;
  line.x0 = g.origin(0);
  line.dx = g.spacing(0);
  line.n = g.points(0);
  const double lo = g.origin(0), hi = g.upper(0);

  const std::size_t steps = cfg.t_end > 0.0 ? std::size_t(std::max(1.0, std::ceil(cfg.t_end / cfg.dt - 1e-9))) : 0;
  const double h = steps ? cfg.t_end / double(steps) : 0.0;
  const std::size_t rec_every =
      cfg.record_interval > 0.0 && h > 0.0 ? std::max<std::size_t>(1, std::size_t(std::llround(cfg.record_interval / h)))
                                           : 1;
  std::vector<std::size_t> rec_steps{0};
  for (std::size_t s = 1; s <= steps; ++s)
    if (s % rec_every == 0 || s == steps) rec_steps.push_back(s);
  const std::size_t R = rec_steps.size();

  TrajectoryEnsemble ens = make_ensemble(start, 0.0, 2, 1, cfg.seed);
  ens.times.resize(R);
  for (std::size_t r = 0; r < R; ++r) ens.times[r] = r + 1 == R && steps ? cfg.t_end : double(rec_steps[r]) * h;
  ens.position_history.assign(R, std::vector<Point>(cfg.M));
  ens.velocity_history.assign(R, std::vector<Point>(cfg.M));
  ens.flags_history.assign(R, std::vector<std::uint8_t>(cfg.M, 0));

  ConditionalResult res;
  res.max_norm_drift.assign(steps, 0.0);
  std::mutex merge;

  parallel_for(cfg.M, [&](std::size_t begin, std::size_t end) {
    std::vector<double> drift(steps, 0.0);
    std::vector<cplx> psi[2], old[2], scratch;
    std::vector<double> pot(line.n);
    std::array<double, 2> scale{}, cap{};
    for (int a = 0; a < 2; ++a) {
      scale[std::size_t(a)] = hbar / (cfg.constants.mass[std::size_t(a)] * line.dx);
      cap[std::size_t(a)] = velocity_cap(init[a], 0);
    }
    for (std::size_t alpha = begin; alpha < end; ++alpha) {
      for (int a = 0; a < 2; ++a) psi[a].assign(init[a].values().begin(), init[a].values().end());
      // Boosted-frame configuration; equals the lab one at t = 0.
      Point x = start[alpha];
      bool exited = false;
      double exit_time = 0.0;
      std::size_t r = 0;
      auto velocity_now = [&](int a, double xa) {
        Line l = line;
        l.cap = cap[std::size_t(a)];
        return line_velocity(psi[a], l, scale[std::size_t(a)], xa);
      };
      auto record = [&](double t) {
        const double tl = exited ? exit_time : t;  // exited members stay frozen
        ens.position_history[r][alpha] = {x[0] + u * tl, x[1] + u * tl};
        if (exited) {
          ens.velocity_history[r][alpha] = {0.0, 0.0};
          ens.flags_history[r][alpha] = kExited;
        } else {
          ens.velocity_history[r][alpha] = {velocity_now(0, x[0]) + u, velocity_now(1, x[1]) + u};
        }
        ++r;
      };
      record(0.0);
      for (std::size_t s = 1; s <= steps; ++s) {
        const double t = double(s - 1) * h;
        if (!exited) {
          const Point x_start = x;
          for (int a = 0; a < 2; ++a) {
            for (std::size_t i = 0; i < line.n; ++i) {
              const double xi = line.x0 + double(i) * line.dx;
              const double d = a == 0 ? xi - x_start[1] : x_start[0] - xi;
              pot[i] = cfg.F * d * d;
              if (hook) pot[i] += hook(a, xi, x_start, t);
            }
            old[a] = psi[a];
            crank_nicolson_line(psi[a], pot, {}, line.dx, cfg.constants.mass[std::size_t(a)], hbar, h, scratch);
            const double n2 = line_norm2(psi[a], line.dx);
            drift[s - 1] = std::max(drift[s - 1], std::abs(1.0 - std::sqrt(n2)));
            const double inv = 1.0 / std::sqrt(n2);
            for (auto& z : psi[a]) z *= inv;
          }
          for (int a = 0; a < 2; ++a) {
            Line l = line;
            l.cap = cap[std::size_t(a)];
            const double sc = scale[std::size_t(a)];
            auto v = [&](double xa, double frac) {
              const double v0 = line_velocity(old[a], l, sc, xa);
              const double v1 = line_velocity(psi[a], l, sc, xa);
              return (1.0 - frac) * v0 + frac * v1;
            };
            const double x0 = x[std::size_t(a)];
            const double k1 = v(x0, 0.0);
            const double k2 = v(x0 + 0.5 * h * k1, 0.5);
            const double k3 = v(x0 + 0.5 * h * k2, 0.5);
            const double k4 = v(x0 + h * k3, 1.0);
            x[std::size_t(a)] = x0 + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
          }
          if (!(x[0] >= lo && x[0] <= hi && x[1] >= lo && x[1] <= hi)) {
            exited = true;
            exit_time = t + h;
          }
        }
        if (r < R && rec_steps[r] == s) record(s == steps ? cfg.t_end : double(s) * h);
      }
      const double t_final = exited ? exit_time : (steps ? cfg.t_end : 0.0);
      ens.position[alpha] = {x[0] + u * t_final, x[1] + u * t_final};
      ens.velocity[alpha] = ens.velocity_history[R - 1][alpha];
      ens.flags[alpha] = exited ? kExited : 0;
      ens.exit_time[alpha] = exited ? exit_time : 0.0;
    }
    std::lock_guard<std::mutex> lock(merge);
    for (std::size_t s = 0; s < steps; ++s) res.max_norm_drift[s] = std::max(res.max_norm_drift[s], drift[s]);
  });

  ens.time = steps ? cfg.t_end : 0.0;
  res.excluded = ens.size() - ens.active();
  res.kinetic = ensemble_kinetic_energy(ens, cfg.constants);
  res.ensemble = std::move(ens);
  return res;
}

double relative_l2(const std::vector<double>& a, const std::vector<double>& ref) {
  detail::require(a.size() == ref.size() && !a.empty(), "series must have equal nonzero length");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - ref[i]) * (a[i] - ref[i]);
    den += ref[i] * ref[i];
  }
  return std::sqrt(num / den);
}

void write_kinetic_csv(const KineticSeries& s, const std::filesystem::path& path, const PhysicalUnits& units) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path.string());
  os << "t,K1,K2,stderr1,stderr2,M_active\n";
  char buf[256];
  for (std::size_t i = 0; i < s.t.size(); ++i) {
    auto e = [&](std::size_t p, const std::array<std::vector<double>, 2>& v) {
      return p < s.particles ? units.energy_from_internal(v[p][i]) : 0.0;
    };
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.6g,%.6g,%zu\n", units.time_from_internal(s.t[i]),
                  e(0, s.K), e(1, s.K), e(0, s.std_error), e(1, s.std_error), s.active[i]);
    os << buf;
  }
}

}  // namespace bohmkit
