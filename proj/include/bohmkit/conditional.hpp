#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "bohmkit/propagators.hpp"
#include "bohmkit/stats.hpp"
#include "bohmkit/trajectories.hpp"

namespace bohmkit {

/// Initial Gaussian of one particle: kinetic energy e0 (internal units)
/// along `direction`, centre and position spread.
struct PacketSpec {
  double e0 = 0.0;
  double center = 0.0;
  double sigma = 1.0;
  int direction = 1;
};

/// Two 1D particles with U(x1, x2) = F (x1 - x2)^2, all in internal units.
/// Fields are evolved in a frame moving at `frame_velocity` (a Galilean
/// boost); positions and velocities reported by the runners are lab-frame.
struct TwoBodyConfig {
  double F = 0.0;
  std::array<PacketSpec, 2> packet{};
  Constants constants{};
  double frame_velocity = 0.0;
  double lo = -320.0, hi = 320.0;
  std::size_t points_1d = 2048;  // conditional runs (hard-wall box)
  std::size_t points_2d = 512;   // exact oracle (periodic, split operator)
  double dt = 0.0;
  double t_end = 0.0;
  double record_interval = 0.0;  // 0 = every step
  std::size_t M = 0;
  std::uint64_t seed = 0;

  double k0(int a) const;  // lab-frame wavevector of particle a
  void validate() const;
};

/// The two-electron benchmark: F in eV/m^2, energies in eV, lengths in nm,
/// times in fs. The comoving frame follows the centre of mass.
TwoBodyConfig two_electron_benchmark(double F_eV_per_m2 = 1e12, double t_end_fs = 5000.0, double dt_fs = 4.0,
                                     std::size_t M = 2000, std::uint64_t seed = 1);

/// Lab-frame initial packets (in the boosted frame when `boosted`).
WaveFunction initial_packet(const TwoBodyConfig& cfg, int a, bool boosted);

/// Start points (x1, x2) drawn from |psi1|^2 |psi2|^2; member alpha uses
/// substream alpha + 1, x1 before x2. Positions are lab-frame at t = 0.
std::vector<Point> sample_product_state(const TwoBodyConfig& cfg);

/// <K^a>(t) = (1/M) sum_alpha m_a v_a^2 / 2 over active members.
struct KineticSeries {
  std::vector<double> t;
  std::array<std::vector<double>, 2> K;
  std::array<std::vector<double>, 2> std_error;
  std::vector<std::size_t> active;
  std::size_t particles = 2;
};

/// From recorded (lab-frame) ensemble velocities. One entry per particle of
/// the ensemble.
KineticSeries ensemble_kinetic_energy(const TrajectoryEnsemble& ens, const Constants& c);

struct ExactTwoBodyResult {
  EvolutionRecord record;          // boosted-frame oracle fields
  TrajectoryEnsemble ensemble;     // lab-frame 2D trajectories (particles = 2)
  KineticSeries quadrature;        // integral of rho m v_a^2 / 2, i.e. M -> infinity
  KineticSeries trajectories;      // ensemble_kinetic_energy(ensemble)
};

/// Exact reference: 2D TDSE for Phi(x1, x2, t) from the product state, plus
/// 2D Bohmian trajectories started at `start` (lab frame; empty = sample).
ExactTwoBodyResult solve_exact_2d(const TwoBodyConfig& cfg, std::vector<Point> start = {},
                                  bool store_fields = false);

struct ConditionalSlice {
  WaveFunction field;  // unnormalized psi(x1) = Phi(x1, x2)
  bool zero_field = false;
};

/// Column of a 2D field at x2 (cubic interpolation across columns). The
/// x1-velocity of the slice equals the 2D velocity on that column.
ConditionalSlice conditional_slice(const WaveFunction& phi, double x2);

/// Extra position-dependent potential for particle a given the current
/// configuration. The zeroth-order scheme leaves it empty: its G and J
/// terms are purely time dependent and only change a dropped phase.
using CouplingHook = std::function<double(int a, double x, const Point& config, double t)>;

struct ConditionalResult {
  TrajectoryEnsemble ensemble;  // particles = 2, lab frame
  KineticSeries kinetic;
  std::vector<double> max_norm_drift;  // per step, max |1 - norm| before renormalization
  std::size_t excluded = 0;            // realizations that left the grid
};

/// Conditional-wave-function algorithm. Each realization carries two 1D
/// fields psi_a evolved by Crank-Nicolson under U_a, where U_1 = F (x1 -
/// x2(t))^2 and U_2 = F (x1(t) - x2)^2 use the positions at the start of the
/// step; both fields are renormalized, then both trajectories advance by RK4
/// with the velocity interpolated linearly in time across the step.
ConditionalResult run_conditional(const TwoBodyConfig& cfg, std::vector<Point> start = {},
                                  const CouplingHook& hook = {});

/// Relative L2 distance between two series sampled at the same times.
double relative_l2(const std::vector<double>& a, const std::vector<double>& ref);

/// CSV: t, K1, K2, stderr1, stderr2, M_active (times and energies in the
/// given units).
void write_kinetic_csv(const KineticSeries& s, const std::filesystem::path& path,
                       const PhysicalUnits& units = PhysicalUnits{});

}  // namespace bohmkit
