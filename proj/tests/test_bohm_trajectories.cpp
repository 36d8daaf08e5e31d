#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <numeric>

#include "bohmkit/error.hpp"
#include "bohmkit/parallel.hpp"
#include "bohmkit/sampling.hpp"
#include "bohmkit/stats.hpp"
#include "bohmkit/trajectories.hpp"

using namespace bohmkit;

namespace {

constexpr double pi = std::numbers::pi;

// Free Gaussian (hbar = m = 1) with initial width s0 and momentum k0.
struct FreeGaussian {
  double xc, s0, k0;
  double sigma(double t) const { return s0 * std::sqrt(1 + std::pow(t / (2 * s0 * s0), 2)); }
  double rate(double t) const {  // sigma'/sigma
    const double u = t / (2 * s0 * s0);
    return u / (2 * s0 * s0) / (1 + u * u);
  }
  double center(double t) const { return xc + k0 * t; }
  double velocity(double x, double t) const { return k0 + (x - center(t)) * rate(t); }
  double path(double x0, double t) const { return center(t) + (x0 - xc) * sigma(t) / s0; }
};

double bisect(const std::function<double(double)>& f, double target, double lo, double hi) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("velocity field of real eigenstates vanishes") {
  const double L = 100.0;
  const Grid g = make_grid_1d(0, L, 1001, Boundary::box);
  for (int n : {1, 4, 10}) {
    const auto vf = velocity_field(init_well_eigenstate(g, L, n));
    double vmax = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
      if (!vf.mask[i]) vmax = std::max(vmax, std::abs(vf.v[0][i]));
    CHECK(vmax == 0.0);
  }
}

TEST_CASE("zero-velocity theorem for globally constant phase") {
  const Grid g = make_grid_2d(-10, 10, 64);
  const WaveFunction wf = init_gaussian(g, {{1, -2}, {2, 1.5}, {0, 0}}).scaled(std::polar(1.0, 2.1));
  const auto vf = velocity_field(wf);
  const double bound = 1e-10 / g.spacing(0);
  double vmax = 0.0;
  for (int a = 0; a < 2; ++a)
    for (std::size_t i = 0; i < g.size(); ++i)
      if (!vf.mask[i]) vmax = std::max(vmax, std::abs(vf.v[std::size_t(a)][i]));
  CHECK(vmax < bound);
}

TEST_CASE("plane-wave Gaussian has uniform velocity hbar k0 / m") {
  const Grid g = make_grid_1d(-40, 40, 1024);
  const double k0 = 1.7;
  Constants c{1.0, {2.5, 1.0}};
  const auto vf = velocity_field(init_gaussian(g, {{0, 0}, {4, 0}, {k0, 0}}, c));
  double err = 0.0;
  std::size_t unmasked = 0;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!vf.mask[i]) {
      err = std::max(err, std::abs(vf.v[0][i] - k0 / 2.5));
      ++unmasked;
    }
  CHECK(unmasked > 100);
  CHECK(err < 1e-10);
  CHECK(vf.masked_count() + unmasked == g.size());
}

TEST_CASE("free Gaussian velocity field at t > 0 and the masking rule") {
  const FreeGaussian fg{-10, 2, 0.8};
  const Grid g = make_grid_1d(-60, 60, 2048);
  const WaveFunction wf0 = init_gaussian(g, {{fg.xc, 0}, {fg.s0, 0}, {fg.k0, 0}});
  SplitOperator prop(g, {});
  const auto rec = evolve(wf0, prop, 0, 10, 0.01);
  const auto vf = velocity_field(rec.final_state);
  const double rho_max = rec.final_state.max_density();
  double err = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(bool(vf.mask[i]) == (std::norm(rec.final_state[i]) < 1e-12 * rho_max));
    if (vf.mask[i]) continue;
    const double ex = fg.velocity(g.coord(0, i), 10);
    err = std::max(err, std::abs(vf.v[0][i] - ex));
    scale = std::max(scale, std::abs(ex));
  }
  CHECK(err / scale < 1e-3);
  // Local evaluation agrees with the full-field interpolation.
  for (double x : {-3.3, 0.0, 4.71}) CHECK(std::abs(velocity_at(rec.final_state, {x, 0})[0] - vf.at({x, 0})[0]) < 1e-13);
}

TEST_CASE("velocity clamp") {
  const Grid g = make_grid_1d(-10, 10, 201);
  std::vector<cplx> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) v[i] = (i % 2 ? 1.0 : -1.0) * std::polar(1.0 + double(i), 0.3 * double(i * i));
  const auto vf = velocity_field(WaveFunction(g, v));
  const double cap = 10 * pi / g.spacing(0);
  CHECK(vf.cap[0] == doctest::Approx(cap));
  for (double x = -10; x <= 10; x += 0.013) CHECK(std::abs(vf.at({x, 0})[0]) <= cap);
}

TEST_CASE("quantum-equilibrium sampling: uniform density passes KS") {
  const double L = 10.0;
  const Grid g = make_grid_1d(0, L, 101, Boundary::box);
  const WaveFunction wf(g, std::vector<cplx>(g.size(), 1.0 / std::sqrt(L)));
  const std::size_t M = 10000;
  const auto pts = sample_quantum_equilibrium(wf, M, 12345);
  std::vector<double> x(M);
  for (std::size_t a = 0; a < M; ++a) x[a] = pts[a][0];
  const double d = ks_statistic(x, [&](double s) { return std::clamp(s / L, 0.0, 1.0); });
  CHECK(d < 1.63 / std::sqrt(double(M)));
  // Determinism per seed, and different seeds give different draws.
  const auto again = sample_quantum_equilibrium(wf, M, 12345);
  CHECK(std::equal(pts.begin(), pts.end(), again.begin()));
  CHECK(sample_quantum_equilibrium(wf, 4, 1)[0][0] != sample_quantum_equilibrium(wf, 4, 2)[0][0]);
}

TEST_CASE("quantum-equilibrium sampling: narrow packet stays within 3 sigma") {
  const Grid g = make_grid_1d(-10, 10, 2001);
  const double s = 2.0 * g.spacing(0);
  const auto pts = sample_quantum_equilibrium(init_gaussian(g, {{1.234, 0}, {s, 0}, {0, 0}}), 2000, 7);
  for (const auto& p : pts) CHECK(std::abs(p[0] - 1.234) < 3.0 * s * 1.5);
  std::size_t within = 0;
  for (const auto& p : pts) within += std::abs(p[0] - 1.234) <= 3.0 * s;
  CHECK(double(within) / 2000.0 > 0.99);
}

TEST_CASE("quantum-equilibrium sampling: sin^2 density of the n = 3 well") {
  const double L = 100.0;
  const int n = 3;
  const Grid g = make_grid_1d(0, L, 2001, Boundary::box);
  const std::size_t M = 100000;
  const auto pts = sample_quantum_equilibrium(init_well_eigenstate(g, L, n), M, 99);
  std::vector<double> x(M);
  for (std::size_t a = 0; a < M; ++a) x[a] = pts[a][0];
  auto cdf = [&](double s) {
    s = std::clamp(s, 0.0, L);
    return s / L - std::sin(2 * n * pi * s / L) / (2 * n * pi);
  };
  auto quantile = [&](double u) { return bisect(cdf, u, 0, L); };
  const auto r = chi2_equiprobable(x, cdf, quantile);
  CHECK(r.bins == 50);
  CHECK(r.p_value > 0.01);
}

TEST_CASE("2D sampling reproduces both marginals") {
  const Grid g = make_grid_2d(-12, 12, 128);
  const WaveFunction wf = init_gaussian(g, {{-1, 2}, {1.5, 2.5}, {0.5, 0}});
  const std::size_t M = 20000;
  const auto pts = sample_quantum_equilibrium(wf, M, 3);
  for (int a = 0; a < 2; ++a) {
    const double c = a == 0 ? -1 : 2, s = a == 0 ? 1.5 : 2.5;
    std::vector<double> x(M);
    for (std::size_t k = 0; k < M; ++k) x[k] = pts[k][std::size_t(a)];
    auto cdf = [&](double v) { return 0.5 * std::erfc(-(v - c) / (s * std::sqrt(2.0))); };
    auto q = [&](double u) { return bisect(cdf, u, -12, 12); };
    CHECK(chi2_equiprobable(x, cdf, q).p_value > 0.01);
  }
}

TEST_CASE("stationary eigenstate: trajectories stay at rest") {
  const double L = 100.0;
  const Grid g = make_grid_1d(0, L, 1001, Boundary::box);
  const WaveFunction wf = init_well_eigenstate(g, L, 3);
  CrankNicolson prop(g, {});
  auto ens = make_ensemble(sample_quantum_equilibrium(wf, 500, 5), 0, 1, 1);
  const auto start = ens.position;
  const auto res = coevolve(wf, prop, ens, 200.0, {.dt = 1.0});
  double disp = 0.0;
  for (std::size_t a = 0; a < start.size(); ++a)
    disp = std::max(disp, std::abs(res.ensemble.position[a][0] - start[a][0]));
  CHECK(disp < 1e-12 * L);
}

TEST_CASE("free Gaussian trajectories follow the scaling law") {
  const FreeGaussian fg{-10, 2, 0.8};
  const Grid g = make_grid_1d(-60, 60, 2048);
  const WaveFunction wf0 = init_gaussian(g, {{fg.xc, 0}, {fg.s0, 0}, {fg.k0, 0}});
  SplitOperator prop(g, {});
  std::vector<Point> start;
  for (double f : {-2.0, -1.0, 0.0, 1.0, 2.5}) start.push_back({fg.xc + f * fg.s0, 0});
  const auto res = coevolve(wf0, prop, make_ensemble(start, 0, 1, 1), 12.0, {.dt = 0.02});
  const double t = res.ensemble.time;
  CHECK(t == 12.0);
  for (std::size_t a = 0; a < start.size(); ++a) {
    const double ex = fg.path(start[a][0], t);
    CHECK(std::abs(res.ensemble.position[a][0] - ex) < 1e-3 * fg.sigma(t));
  }
}

TEST_CASE("1D non-crossing and equivariance through an interference event") {
  const Grid g = make_grid_1d(-50, 50, 1024);
  const WaveFunction a = init_gaussian(g, {{-12, 0}, {2, 0}, {2, 0}});
  const WaveFunction b = init_gaussian(g, {{12, 0}, {2, 0}, {-2, 0}});
  const WaveFunction wf0 = normalize(superpose(a, 1.0, b, 1.0));
  SplitOperator prop(g, {});
  const std::size_t M = 10000;
  auto ens = make_ensemble(sample_quantum_equilibrium(wf0, M, 2024), 0, 1, 1, 2024);
  std::vector<std::size_t> order(M);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto i, auto j) { return ens.position[i][0] < ens.position[j][0]; });
  bool ordered = true;
  const auto res = coevolve(wf0, prop, ens, 6.0, {.dt = 0.005, .on_record = [&](const WaveFunction&, const TrajectoryEnsemble& e) {
                              for (std::size_t k = 1; k < M; ++k)
                                if (!(e.position[order[k - 1]][0] <= e.position[order[k]][0])) ordered = false;
                            }});
  CHECK(ordered);
  CHECK(res.ensemble.active() == M);
  const LinearDensityCdf ref = marginal_cdf(res.record.final_state, 0);
  std::vector<double> x(M);
  for (std::size_t k = 0; k < M; ++k) x[k] = res.ensemble.position[k][0];
  const auto chi = chi2_equiprobable(x, [&](double s) { return ref.cdf(s); }, [&](double u) { return ref.quantile(u); });
  CHECK(chi.p_value > 0.01);
}

TEST_CASE("RK4 order on an analytic field") {
  const FreeGaussian fg{0, 1, 0.5};
  const AnalyticVelocity src([&](const Point& r, double t) { return Point{fg.velocity(r[0], t), 0}; });
  auto run = [&](double dt) {
    auto ens = make_ensemble({{-1.5, 0}, {0.3, 0}, {2, 0}}, 0, 1, 1);
    const auto steps = std::size_t(std::llround(4.0 / dt));
    for (std::size_t s = 0; s < steps; ++s) advance_trajectories(ens, src, dt);
    return ens.position;
  };
  const auto p1 = run(0.4), p2 = run(0.2), p3 = run(0.1);
  double d1 = 0.0, d2 = 0.0, err = 0.0;
  for (std::size_t a = 0; a < p1.size(); ++a) {
    d1 = std::max(d1, std::abs(p1[a][0] - p2[a][0]));
    d2 = std::max(d2, std::abs(p2[a][0] - p3[a][0]));
  }
  for (std::size_t a = 0; a < p3.size(); ++a) err = std::max(err, std::abs(p3[a][0] - fg.path(std::array{-1.5, 0.3, 2.0}[a], 4.0)));
  CHECK(d2 < d1 / 15.0);
  CHECK(err < 1e-6);
}

TEST_CASE("field timeline: missing samples and linear interpolation in time") {
  const Grid g = make_grid_1d(-20, 20, 256);
  const auto wf = init_gaussian(g, {{0, 0}, {2, 0}, {1, 0}});
  std::vector<cplx> v2(wf.values().begin(), wf.values().end());
  for (std::size_t i = 0; i < g.size(); ++i) v2[i] *= std::polar(1.0, 0.5 * g.coord(0, i));
  FieldTimeline tl;
  tl.push(wf);
  tl.push(wf.with_values(v2, 1.0));
  CHECK(tl.velocity({0.3, 0}, 0.25)[0] == doctest::Approx(1.125).epsilon(1e-9));
  CHECK_THROWS_AS(tl.velocity({0, 0}, 1.5), MissingTimeSample);
  CHECK_THROWS_AS(tl.velocity({0, 0}, -0.1), MissingTimeSample);
  auto ens = make_ensemble({{0, 0}}, 0.5, 1, 1);
  CHECK_THROWS_AS(advance_trajectories(ens, tl, 1.0), MissingTimeSample);
}

TEST_CASE("exited members are flagged and frozen") {
  const Grid g = make_grid_1d(-10, 10, 128, Boundary::absorbing, CapSpec{8, 1.0});
  const AnalyticVelocity src([](const Point&, double) { return Point{1.0, 0}; },
                             [&](const Point& r) { return inside_interior(g, r); });
  auto ens = make_ensemble({{7.0, 0}, {-3.0, 0}}, 0, 1, 1);
  for (int s = 0; s < 20; ++s) advance_trajectories(ens, src, 0.1);
  CHECK(ens.exited(0));
  CHECK(!ens.exited(1));
  CHECK(ens.active() == 1);
  const double frozen = ens.position[0][0];
  CHECK(ens.exit_time[0] == doctest::Approx(1.8));  // interior ends at 10 - 8 dx
  for (int s = 0; s < 5; ++s) advance_trajectories(ens, src, 0.1);
  CHECK(ens.position[0][0] == frozen);
  CHECK(ens.position[1][0] == doctest::Approx(-0.5));
}

TEST_CASE("streamlines: plane wave lines are straight and match co-evolution") {
  const Grid g = make_grid_2d(-20, 20, 128);
  const WaveFunction wf0 = init_gaussian(g, {{-4, 0}, {4, 4}, {0.8, 0.3}});
  SplitOperator prop(g, {});
  std::vector<Point> launch;
  for (double y = -3; y <= 3; y += 1.5) launch.push_back({-4, y});
  const auto co = coevolve(wf0, prop, make_ensemble(launch, 0, 1, 2), 4.0, {.dt = 0.02});
  const auto fine = coevolve(wf0, prop, make_ensemble(launch, 0, 1, 2), 4.0, {.dt = 0.01});
  double tol = 0.0;
  for (std::size_t a = 0; a < launch.size(); ++a)
    for (int k = 0; k < 2; ++k)
      tol = std::max(tol, std::abs(co.ensemble.position[a][std::size_t(k)] - fine.ensemble.position[a][std::size_t(k)]));
  // Checkpoints at every half step: the reconstruction sees the same samples.
  const auto stored = evolve(wf0, prop, 0, 4.0, 0.01, {.store_fields = true});
  const auto sl = streamline_reconstruction(stored, launch, 0.02);
  double dev = 0.0;
  for (std::size_t a = 0; a < launch.size(); ++a)
    for (int k = 0; k < 2; ++k)
      dev = std::max(dev, std::abs(sl.position[a][std::size_t(k)] - co.ensemble.position[a][std::size_t(k)]));
  MESSAGE("integrator tolerance " << tol << ", streamline deviation " << dev);
  CHECK(dev < 10 * std::max(tol, 1e-12));

  // A pure plane wave gives straight, uniformly moving lines.
  std::vector<cplx> pw(g.size());
  const double kx = g.wavenumber(0, 3), ky = g.wavenumber(1, 2);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Point r = g.node(i);
    pw[i] = std::polar(1.0, kx * r[0] + ky * r[1]);
  }
  const auto rec = evolve(WaveFunction(g, pw), prop, 0, 2.0, 0.05, {.store_fields = true});
  const auto lines = streamline_reconstruction(rec, {{0, 0}, {5, -5}}, 0.05);
  for (std::size_t h = 0; h < lines.times.size(); ++h) {
    const double t = lines.times[h];
    CHECK(std::abs(lines.position_history[h][1][0] - (5 + kx * t)) < 1e-9);
    CHECK(std::abs(lines.position_history[h][1][1] - (-5 + ky * t)) < 1e-9);
  }
}

TEST_CASE("streamline launch in a masked region is rejected") {
  const double L = 10.0;
  const Grid g = make_grid_1d(0, L, 101, Boundary::box);
  CrankNicolson prop(g, {});
  const auto rec = evolve(init_well_eigenstate(g, L, 2), prop, 0, 1.0, 0.1, {.store_fields = true});
  CHECK_THROWS_AS(streamline_reconstruction(rec, {{5.0, 0}}, 0.1), InvalidArgument);
  CHECK_NOTHROW(streamline_reconstruction(rec, {{2.5, 0}}, 0.1));
}

TEST_CASE("determinism across runs and thread counts; CSV output") {
  const Grid g = make_grid_2d(-15, 15, 64);
  const WaveFunction wf0 = init_gaussian(g, {{0, 0}, {2, 2}, {0.5, -0.2}});
  auto run = [&](std::size_t threads) {
    set_thread_count(threads);
    SplitOperator prop(g, {});
    auto ens = make_ensemble(sample_quantum_equilibrium(wf0, 300, 77), 0, 1, 2, 77);
    return coevolve(wf0, prop, ens, 1.0, {.dt = 0.05, .record_interval = 0.25}).ensemble;
  };
  const auto a = run(1), b = run(1), c = run(3);
  set_thread_count(1);
  CHECK(a.position == b.position);
  CHECK(a.position == c.position);
  CHECK(a.velocity_history == c.velocity_history);
  CHECK(a.times.size() == 5);

  const auto dir = std::filesystem::temp_directory_path() / "bohmkit_traj_test";
  std::filesystem::create_directories(dir);
  write_trajectories_csv(a, dir / "a.csv");
  write_trajectories_csv(b, dir / "b.csv");
  std::ifstream fa(dir / "a.csv"), fb(dir / "b.csv");
  const std::string sa((std::istreambuf_iterator<char>(fa)), {}), sb((std::istreambuf_iterator<char>(fb)), {});
  CHECK(sa == sb);
  CHECK(sa.rfind("t,alpha,k,x,y,vx,vy,flags\n", 0) == 0);
  CHECK(std::count(sa.begin(), sa.end(), '\n') == 1 + 5 * 300);
  write_trajectories_ndjson(a, dir / "a.ndjson");
  std::ifstream fn(dir / "a.ndjson");
  const std::string sn((std::istreambuf_iterator<char>(fn)), {});
  CHECK(std::count(sn.begin(), sn.end(), '\n') == 5);
  std::filesystem::remove_all(dir);
}
