#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "bohmkit/error.hpp"
#include "bohmkit/fft.hpp"
#include "bohmkit/observables.hpp"
#include "bohmkit/propagators.hpp"
#include "bohmkit/sampling.hpp"

using namespace bohmkit;

namespace {

constexpr double pi = std::numbers::pi;

double plane_k(const Grid& g, int mode) { return 2 * pi * mode / (double(g.points(0)) * g.spacing(0)); }

WaveFunction plane_wave(const Grid& g, int mode, Constants c = {}) {
  const double k = plane_k(g, mode);
  std::vector<cplx> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) v[i] = std::polar(1.0, k * g.node(i)[0]);
  return normalize(WaveFunction(g, std::move(v), 0.0, c));
}

Potential harmonic(double w) {
  return Potential::analytic([w](const Point& r, double) { return 0.5 * w * w * r[0] * r[0]; });
}

double quadrature(const Grid& g, const WaveFunction& wf, const std::vector<double>& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) s += g.weight(i) * std::norm(wf[i]) * a[i];
  return s;
}

// Free packet evolved to t = 2 with an equilibrium ensemble riding along.
struct Evolved {
  WaveFunction wf;
  TrajectoryEnsemble ens;
};

Evolved evolved_packet(std::size_t M, std::uint64_t seed) {
  const Grid g = make_grid_1d(-40, 40, 1024);
  const WaveFunction wf = init_gaussian(g, {{-3, 0}, {1.5, 0}, {1.0, 0}});
  SplitOperator prop(g, {}, {});
  auto ens = make_ensemble(sample_quantum_equilibrium(wf, M, seed), 0.0, 1, 1, seed);
  CoevolutionOptions opt;
  opt.dt = 0.02;
  opt.record_interval = 2.0;
  auto res = coevolve(wf, prop, ens, 2.0, opt);
  return {res.record.final_state, std::move(res.ensemble)};
}

}  // namespace

TEST_CASE("operator-route expectation values") {
  SUBCASE("<x> of a centred Gaussian") {
    const Grid g = make_grid_1d(-20, 20, 801);
    CHECK(std::abs(expectation_operator(init_gaussian(g, {{0, 0}, {2, 0}, {0.7, 0}}), OperatorSpec::position())) <
          1e-10);
  }
  SUBCASE("<p> and <H> of well eigenstates") {
    const double L = 10.0;
    const Grid g = make_grid_1d(0, L, 1001, Boundary::box);
    for (int n : {1, 3, 5}) {
      const WaveFunction wf = init_well_eigenstate(g, L, n);
      CHECK(std::abs(expectation_operator(wf, OperatorSpec::momentum())) < 1e-12);
      const double e = n * n * pi * pi / (2 * L * L);
      CHECK(expectation_operator(wf, OperatorSpec::hamiltonian()) == doctest::Approx(e).epsilon(1e-4));
    }
  }
  SUBCASE("<p> of a moving packet, spectral and finite-difference") {
    const Grid gp = make_grid_1d(-30, 30, 512);
    const Grid gb = make_grid_1d(-30, 30, 2048, Boundary::box);
    for (const Grid& g : {gp, gb}) {
      const WaveFunction wf = init_gaussian(g, {{1, 0}, {2, 0}, {0.9, 0}}, {1.0, {3.0, 1.0}});
      const double tol = g.boundary() == Boundary::periodic ? 1e-10 : 3e-4;
      CHECK(std::abs(expectation_operator(wf, OperatorSpec::momentum()) - 0.9) < tol);
      const double ke = (0.9 * 0.9 + 1.0 / (4 * 4.0)) / (2 * 3.0);
      CHECK(std::abs(expectation_operator(wf, OperatorSpec::kinetic()) - ke) < tol);
    }
  }
  SUBCASE("harmonic ground state energy") {
    const Grid g = make_grid_1d(-10, 10, 512);
    const WaveFunction wf = init_gaussian(g, {{0, 0}, {std::sqrt(0.5), 0}, {0, 0}});
    CHECK(expectation_operator(wf, OperatorSpec::hamiltonian(harmonic(1.0))) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(expectation_operator(wf, OperatorSpec::potential_energy(harmonic(1.0))) ==
          doctest::Approx(0.25).epsilon(1e-10));
  }
}

TEST_CASE("local mean values") {
  const double L = 10.0;
  const Grid g = make_grid_1d(0, L, 501, Boundary::box);
  const WaveFunction wn = init_well_eigenstate(g, L, 4);
  for (double a : local_mean_value(wn, OperatorSpec::momentum())) CHECK(a == 0.0);
  const auto x = local_mean_value(wn, OperatorSpec::position());
  const auto mask = velocity_field(wn).mask;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!mask[i]) CHECK(x[i] == doctest::Approx(g.node(i)[0]).epsilon(1e-14));

  const Grid gp = make_grid_1d(0, 40, 400);
  const double k = plane_k(gp, 9), m = 1.8;
  for (double t : local_mean_value(plane_wave(gp, 9, {1.0, {m, 1.0}}), OperatorSpec::kinetic()))
    CHECK(std::abs(t - k * k / (2 * m)) < 1e-10);
}

TEST_CASE("density-weighted local means reproduce the operator route") {
  const Grid g1 = make_grid_1d(-20, 20, 512);
  const Grid g2 = make_grid_2d(-14, 14, 128, Boundary::box);
  const WaveFunction a = normalize(superpose(init_gaussian(g1, {{-3, 0}, {1.5, 0}, {1, 0}}), 1.0,
                                             init_gaussian(g1, {{2, 0}, {1, 0}, {-0.5, 0}}), cplx(0.2, 0.5)));
  const WaveFunction b = init_gaussian(g2, {{1, -1}, {1.2, 1.6}, {0.6, -0.3}}, {1.0, {1.3, 2.0}});
  const std::vector<OperatorSpec> ops = {
      OperatorSpec::position(0),
      OperatorSpec::momentum(0),
      OperatorSpec::kinetic(),
      OperatorSpec::potential_energy(harmonic(0.7)),
      OperatorSpec::hamiltonian(harmonic(0.7)),
      OperatorSpec::custom([](const Point& r) { return r[0] * r[0]; },
                           {[](const Point& r) { return 0.3 * r[0]; }, {}},
                           {[](const Point& r) { return 1.0 + 0.1 * r[0] * r[0]; }, {}}),
  };
  for (const WaveFunction* wf : {&a, &b})
    for (const auto& op : ops) {
      const double direct = expectation_operator(*wf, op);
      const double local = quadrature(wf->grid(), *wf, local_mean_value(*wf, op));
      CHECK_MESSAGE(std::abs(direct - local) < 1e-8 * std::max(1.0, std::abs(direct)), op.name());
    }
}

TEST_CASE("Hermiticity validation") {
  const Grid g = make_grid_1d(-10, 10, 400, Boundary::box);
  const Constants c{};
  for (const auto& op : {OperatorSpec::momentum(), OperatorSpec::kinetic(), OperatorSpec::position(),
                         OperatorSpec::custom({}, {[](const Point& r) { return std::sin(r[0]); }, {}},
                                              {[](const Point& r) { return 2.0 + std::cos(r[0]); }, {}})})
    CHECK(hermiticity_defect(g, c, op) < 1e-10);
  const Grid gp = make_grid_2d(-10, 10, 64);
  const std::array<OperatorSpec::Coef, 2> cy{{{}, [](const Point& r) { return 1.0 + 0.2 * r[1]; }}};
  CHECK(hermiticity_defect(gp, c, OperatorSpec::custom({}, {}, cy)) < 1e-10);

  // A coefficient that is not a function of position breaks the symmetry.
  int calls = 0;
  const auto bad = OperatorSpec::custom({}, {[&calls](const Point&) { return double(++calls % 7); }, {}});
  CHECK(hermiticity_defect(g, c, bad) > 1e-10);
  CHECK_THROWS_AS(expectation_operator(init_gaussian(g, {{0, 0}, {1, 0}, {0, 0}}), bad), InvalidArgument);
}

TEST_CASE("trajectory route agrees with the operator route") {
  const Evolved e = evolved_packet(10000, 17);
  const WaveFunction& wf = e.wf;
  CHECK(wf.time() == doctest::Approx(2.0));
  CHECK(e.ens.active() == e.ens.size());
  const Grid& g = wf.grid();
  const std::vector<OperatorSpec> ops = {OperatorSpec::position(), OperatorSpec::momentum(), OperatorSpec::kinetic(),
                                         OperatorSpec::potential_energy(harmonic(0.5))};
  for (const auto& op : ops) {
    const double direct = expectation_operator(wf, op);
    const auto traj = expectation_trajectories(e.ens, g, local_mean_value(wf, op));
    CHECK_MESSAGE(std::abs(traj.mean - direct) < 3 * traj.std_error, op.name());
    CHECK(traj.std_error > 0.0);
  }
  // The guidance velocity is the local momentum over m.
  const auto vf = velocity_field(wf);
  const auto p = expectation_trajectories(e.ens, [&](const Point& r) { return vf.at(r)[0]; });
  CHECK(std::abs(p.mean - expectation_operator(wf, OperatorSpec::momentum())) < 3 * p.std_error);
}

TEST_CASE("trajectory-route standard error scales as 1/sqrt(M)") {
  double prev = 0.0;
  for (std::size_t M : {1000u, 4000u, 16000u}) {
    const Grid g = make_grid_1d(-20, 20, 512);
    const WaveFunction wf = init_gaussian(g, {{0, 0}, {1.5, 0}, {0, 0}});
    const auto ens = make_ensemble(sample_quantum_equilibrium(wf, M, 5), 0.0, 1, 1, 5);
    const auto r = expectation_trajectories(ens, [](const Point& x) { return x[0]; });
    if (prev > 0.0) CHECK(prev / r.std_error == doctest::Approx(2.0).epsilon(0.2));
    prev = r.std_error;
  }
}

TEST_CASE("trajectory-route edge cases") {
  const double L = 10.0;
  const Grid g = make_grid_1d(0, L, 401, Boundary::box);
  const WaveFunction wf = init_well_eigenstate(g, L, 3);
  auto ens = make_ensemble(sample_quantum_equilibrium(wf, 2000, 3), 0.0, 1, 1, 3);
  const auto c = expectation_trajectories(ens, [](const Point&) { return 2.5; });
  CHECK(c.mean == 2.5);
  CHECK(c.std_error == 0.0);
  const auto vf = velocity_field(wf);
  const auto p = expectation_trajectories(ens, [&](const Point& r) { return wf.mass(0) * vf.at(r)[0]; });
  CHECK(p.mean == 0.0);
  for (auto& f : ens.flags) f |= kExited;
  CHECK_THROWS_AS(expectation_trajectories(ens, [](const Point&) { return 1.0; }), InvalidArgument);
}

TEST_CASE("current density") {
  const Grid g = make_grid_2d(-10, 10, 64);
  const auto j0 = current_density(init_gaussian(g, {{0, 0}, {2, 2}, {0, 0}}));
  for (int a = 0; a < 2; ++a)
    for (double v : j0[std::size_t(a)]) CHECK(v == 0.0);

  const Grid g1 = make_grid_1d(0, 30, 300);
  const double m = 2.0, k = plane_k(g1, 4);
  const WaveFunction pw = plane_wave(g1, 4, {1.0, {m, 1.0}});
  const auto j = current_density(pw);
  for (std::size_t i = 0; i < g1.size(); ++i) CHECK(std::abs(j[0][i] - std::norm(pw[i]) * k / m) < 1e-12);

  // j = rho v, and the point-current operator at a node agrees with it.
  const Grid gs = make_grid_1d(-20, 20, 1024);
  const WaveFunction wf = normalize(superpose(init_gaussian(gs, {{-2, 0}, {1.5, 0}, {1, 0}}), 1.0,
                                              init_gaussian(gs, {{2, 0}, {1.5, 0}, {-0.5, 0}}), 0.6));
  const auto js = current_density(wf);
  const auto vf = velocity_field(wf);
  double jmax = 0.0;
  for (std::size_t i = 0; i < gs.size(); ++i) {
    if (!vf.mask[i]) CHECK(std::abs(js[0][i] - std::norm(wf[i]) * vf.v[0][i]) < 1e-10);
    jmax = std::max(jmax, std::abs(js[0][i]));
  }
  for (std::size_t i : {400u, 480u, 512u, 600u}) {
    const double op = expectation_operator(wf, OperatorSpec::current(gs.node(i), 0));
    CHECK(std::abs(op - js[0][i]) < 1e-3 * jmax);
  }
}

TEST_CASE("local momentum vanishes while the momentum spectrum sits at +-n pi hbar / L") {
  const double L = 10.0;
  const int n = 10;
  const Grid g = make_grid_1d(0, L, 401, Boundary::box);
  const WaveFunction wn = init_well_eigenstate(g, L, n);
  for (double a : local_mean_value(wn, OperatorSpec::momentum())) CHECK(a == 0.0);

  // Momentum distribution of the embedded state on a long periodic line.
  const std::size_t N = 16384;
  const double dx = g.spacing(0);
  std::vector<cplx> buf(N, 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) buf[i] = wn[i];
  Fft(N).forward(buf);
  std::size_t best = 0;
  for (std::size_t j = 0; j < N / 2; ++j)
    if (std::norm(buf[j]) > std::norm(buf[best])) best = j;
  const double p_peak = 2 * pi * double(best) / (double(N) * dx);
  CHECK(p_peak == doctest::Approx(n * pi / L).epsilon(0.02));
  // The spectrum is symmetric: |phi(p)| = |phi(-p)|.
  CHECK(std::abs(std::abs(buf[best]) - std::abs(buf[N - best])) < 1e-10 * std::abs(buf[best]));
}

TEST_CASE("observable CSV") {
  const auto dir = std::filesystem::temp_directory_path() / "bohmkit_obs_csv";
  std::filesystem::create_directories(dir);
  const auto path = dir / "obs.csv";
  write_observables_csv({{0.0, 1.5, 0.0, "operator"}, {1.0, 1.25, 0.01, "trajectory"}}, path);
  std::ifstream is(path);
  std::string line;
  std::getline(is, line);
  CHECK(line == "t,value,stderr,route");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 2);
}
