#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "bohmkit/error.hpp"
#include "bohmkit/experiments.hpp"
#include "bohmkit/sampling.hpp"

using namespace bohmkit;

namespace {

constexpr double pi = std::numbers::pi;
using cd = std::complex<double>;

// Transmission by integrating psi'' = 2 (V - E) psi from an outgoing wave on
// the right back to the left and reading off the incoming amplitude.
double shooting_transmission(double V0, double a, double k) {
  const double E = 0.5 * k * k, L = 25.0 * a;
  const int n = 200000;
  const double h = -2.0 * L / n;
  auto V = [&](double x) { return V0 / (std::cosh(x / a) * std::cosh(x / a)); };
  cd psi = std::exp(cd(0, k * L)), dpsi = cd(0, k) * psi;
  double x = L;
  auto f = [&](double xx, cd p) { return 2.0 * (V(xx) - E) * p; };
  for (int i = 0; i < n; ++i) {
    const cd k1p = dpsi, k1d = f(x, psi);
    const cd k2p = dpsi + 0.5 * h * k1d, k2d = f(x + 0.5 * h, psi + 0.5 * h * k1p);
    const cd k3p = dpsi + 0.5 * h * k2d, k3d = f(x + 0.5 * h, psi + 0.5 * h * k2p);
    const cd k4p = dpsi + h * k3d, k4d = f(x + h, psi + h * k3p);
    psi += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    dpsi += h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
    x += h;
  }
  // psi = A e^{ikx} + B e^{-ikx} at x = -L
  const cd A = 0.5 * (psi + dpsi / cd(0, k)) * std::exp(cd(0, -k * x));
  return 1.0 / std::norm(A);
}

// Median of |p| under |phi(p)|^2 of the n-th box eigenstate of width L.
double well_momentum_median(int n, double L) {
  const double k = n * pi / L;
  const int N = 600000;
  const double pmax = 40.0 * k, h = pmax / N;
  std::vector<double> c(N + 1, 0.0);
  double acc = 0.0, prev = 0.0;
  for (int i = 1; i <= N; ++i) {
    const double p = h * i;
    const double s = (n % 2 == 0) ? std::sin(0.5 * p * L) : std::cos(0.5 * p * L);
    const double den = p * p - k * k;
    const double f = std::abs(den) < 1e-12 ? L * L / 4.0 : 4.0 * s * s / (den * den);
    acc += 0.5 * h * (f + prev);
    prev = f;
    c[std::size_t(i)] = acc;
  }
  const auto it = std::lower_bound(c.begin(), c.end(), 0.5 * acc);
  return h * double(it - c.begin());
}

}  // namespace

TEST_CASE("free packet follows the spreading law") {
  FreePacketParams p;
  p.M = 200;
  p.steps = 1000;
  const auto r = run_free_packet(p);
  REQUIRE(r.t.size() == 11);
  for (std::size_t i = 0; i < r.t.size(); ++i) {
    const double s = p.sigma * std::sqrt(1.0 + std::pow(r.t[i] / (2.0 * p.sigma * p.sigma), 2));
    CHECK(r.width[i] == doctest::Approx(s).epsilon(1e-10));
  }
  CHECK(r.max_path_error < 1e-8);
  CHECK(r.max_norm_drift < 1e-12);
  CHECK(r.continuity_max < 1e-5);
  CHECK(free_gaussian_width(2.0, 8.0) == doctest::Approx(2.0 * std::sqrt(2.0)));
}

TEST_CASE("coherent state oscillates rigidly") {
  HarmonicParams p;
  p.periods = 1.0;
  p.M = 100;
  const auto r = run_harmonic_coherent(p);
  CHECK(r.max_centroid_error < 1e-4);
  CHECK(r.max_width_change < 1e-5);
  CHECK(r.max_rigid_error < 1e-4);
  CHECK(r.energy_drift < 1e-5);
  CHECK(r.mean_x.back() == doctest::Approx(p.displacement).epsilon(1e-5));
}

TEST_CASE("Eckart transmission against direct integration") {
  for (double k : {0.6, 1.0, 1.3, 1.8}) CHECK(eckart_transmission({1.0, 1.0, 0.0}, k) == doctest::Approx(shooting_transmission(1.0, 1.0, k)).epsilon(1e-6));
  // weak barrier: the cos branch
  CHECK(eckart_transmission({0.1, 1.0, 0.0}, 0.5) == doctest::Approx(shooting_transmission(0.1, 1.0, 0.5)).epsilon(1e-6));
  CHECK(eckart_transmission({0.0, 1.0, 0.0}, 0.7) == doctest::Approx(1.0));
  CHECK(eckart_transmission({1.0, 1.0, 0.0}, -1.0) == 0.0);
  CHECK(eckart_transmission({1.0, 1.0, 0.0}, 400.0) == doctest::Approx(1.0));
  // a narrow momentum spread barely changes the plane-wave value
  CHECK(eckart_packet_transmission({1.0, 1.0, 0.0}, 1.3, 200.0) ==
        doctest::Approx(eckart_transmission({1.0, 1.0, 0.0}, 1.3)).epsilon(1e-4));
}

TEST_CASE("barrier packet and trajectories") {
  BarrierParams p;
  p.M = 400;
  const auto r = run_barrier(p);
  CHECK(std::abs(r.transmission_grid - r.transmission_exact) < 2e-3);
  CHECK(std::abs(r.transmission_trajectories - r.transmission_grid) < 3.0 * r.trajectory_stderr + 1.0 / p.M);
  CHECK(r.residual_near_barrier < 1e-6);
  CHECK(r.ordering_preserved);
  // non-crossing: the transmitted members are exactly the leading ones
  const auto& e = r.ensemble;
  double lead_min = 1e300, trail_max = -1e300;
  for (std::size_t a = 0; a < e.size(); ++a) {
    const double x0 = e.coordinate(0, a, 0);
    if (e.position[a][0] > 0.0) lead_min = std::min(lead_min, x0);
    else trail_max = std::max(trail_max, x0);
  }
  CHECK(trail_max < lead_min);

  BarrierParams bad = p;
  bad.x0 = -10.0;
  CHECK_THROWS_AS(run_barrier(bad), InvalidArgument);
}

TEST_CASE("fringe visibility") {
  std::vector<double> cosine, gauss, offset;
  for (int i = 0; i < 400; ++i) {
    const double x = -20.0 + 0.1 * i;
    cosine.push_back(std::exp(-x * x / 200.0) * (1.0 + std::cos(x)));
    gauss.push_back(std::exp(-x * x / 8.0));
    offset.push_back(2.0 + std::cos(x));
  }
  CHECK(fringe_visibility(cosine) > 0.99);
  CHECK(fringe_visibility(gauss) == 0.0);
  CHECK(fringe_visibility(offset) == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(fringe_visibility({1.0, 2.0}) == 0.0);
}

TEST_CASE("spectral refinement reproduces a band-limited field") {
  const Grid g = make_grid_2d(-16.0, 16.0, 96);
  const auto wf = init_gaussian(g, {{0.5, -1.0}, {1.5, 1.2}, {0.8, -0.4}});
  const auto fine = spectral_refine(wf, 3);
  REQUIRE(fine.grid().points(0) == 288);
  CHECK(fine.grid().spacing(0) == doctest::Approx(g.spacing(0) / 3.0));
  const auto exact = init_gaussian(fine.grid(), {{0.5, -1.0}, {1.5, 1.2}, {0.8, -0.4}});
  double worst = 0.0;
  for (std::size_t i = 0; i < fine.size(); ++i) worst = std::max(worst, std::abs(fine[i] - exact[i]));
  CHECK(worst < 1e-8);
  CHECK(std::abs(fine[fine.grid().index(30, 90)] - wf[g.index(10, 30)]) < 1e-12);
  CHECK_THROWS_AS(spectral_refine(init_gaussian(make_grid_1d(-10, 10, 64, Boundary::box), {}), 2), InvalidArgument);
}

TEST_CASE("double slit keeps slits apart and reproduces the pattern") {
  DoubleSlitParams p;
  p.M = 2000;
  p.points_x = 128;
  const auto r = run_double_slit(p);
  CHECK(r.symmetric);
  CHECK(r.non_mixing_fraction == 0.0);
  CHECK(r.chi2_p_value > 0.01);
  CHECK(r.visibility > 0.5);
  const auto up = std::count(r.upper.begin(), r.upper.end(), std::uint8_t{1});
  CHECK(std::abs(double(up) / p.M - 0.5) < 3.0 * 0.5 / std::sqrt(double(p.M)));
  double mass = 0.0;
  for (std::size_t j = 0; j < r.y_marginal.size(); ++j) mass += r.y_marginal[j];
  CHECK(mass * (r.y_nodes[1] - r.y_nodes[0]) == doctest::Approx(1.0).epsilon(1e-9));

  p.single_slit = true;
  const auto s = run_double_slit(p);
  CHECK_FALSE(s.symmetric);
  CHECK(s.visibility < 0.05);
  CHECK(s.chi2_p_value > 0.01);
}

TEST_CASE("well momentum by time of flight") {
  WellMomentumParams p;
  p.M = 800;
  p.free_points = 16384;
  p.t_flight = 1500.0;
  const auto r = run_well_momentum(p);
  CHECK(r.p_exact == doctest::Approx(10.0 * pi / 100.0));
  CHECK(r.max_displacement_before < 1e-9);
  const double want = well_momentum_median(p.n, p.L);
  CHECK(want / r.p_exact == doctest::Approx(0.9915).epsilon(1e-3));
  CHECK(std::abs(r.median_abs_p - want) < 0.02 * want);
  CHECK(std::abs(r.median_abs_p / r.p_exact - 1.0) < 0.03);
  // the centre of the well separates the two momentum signs exactly
  const auto& e = r.ensemble;
  for (std::size_t a = 0; a < e.size(); ++a) CHECK((r.p_estimate[a] > 0.0) == (e.coordinate(0, a, 0) > 0.5 * p.L));
  CHECK(std::abs(r.positive_fraction - 0.5) < 3.0 / std::sqrt(double(p.M)));

  WellMomentumParams quick = p;
  quick.t_flight = 100.0;
  CHECK_THROWS_AS(run_well_momentum(quick), InvalidArgument);
}
