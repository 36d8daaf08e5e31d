#pragma once

#include <cstdint>
#include <vector>

#include "bohmkit/evolution.hpp"
#include "bohmkit/trajectories.hpp"

namespace bohmkit {

// Desk-scale experiments. Everything is in internal units (hbar, masses and
// lengths as given in the constants); the scenario layer converts.

// --- free packet -----------------------------------------------------------

struct FreePacketParams {
  double lo = -100.0, hi = 100.0;
  std::size_t points = 1024;
  double center = 0.0, sigma = 8.0, k0 = 0.5;
  double dt = 0.01;
  std::size_t steps = 2000;
  std::size_t M = 1000;
  std::uint64_t seed = 1;
  double record_interval = 1.0;
  Constants constants{};
};

struct FreePacketResult {
  std::vector<double> t, width, width_exact;
  double max_width_error = 0.0;       // relative, over recorded times
  double max_path_error = 0.0;        // |x_alpha - scaling law|, over members and times
  double max_norm_drift = 0.0;
  double continuity_max = 0.0;        // max |d rho/dt + d j/dx| at the final step
  TrajectoryEnsemble ensemble;
  WaveFunction final_state;
};

/// Periodic split-operator run of a Gaussian with an equilibrium ensemble.
FreePacketResult run_free_packet(const FreePacketParams& p);

/// sigma(t) = sigma0 sqrt(1 + (hbar t / (2 m sigma0^2))^2).
double free_gaussian_width(double sigma0, double t, double hbar = 1.0, double mass = 1.0);

// --- harmonic coherent state -----------------------------------------------

struct HarmonicParams {
  double lo = -20.0, hi = 20.0;
  std::size_t points = 512;
  double omega = 1.0;
  double displacement = 3.0;
  double dt = 0.005;
  double periods = 2.0;
  std::size_t M = 500;
  std::uint64_t seed = 1;
  double record_interval = 0.1;
  Constants constants{};
};

struct HarmonicResult {
  std::vector<double> t, mean_x, width;
  double max_centroid_error = 0.0;   // |<x> - x0 cos(omega t)|
  double max_width_change = 0.0;     // relative to the ground-state width
  double max_rigid_error = 0.0;      // members: |x - x(0) - (<x>(t) - x0)|
  double energy_drift = 0.0;         // relative change of <H>
  TrajectoryEnsemble ensemble;
};

/// Displaced ground state of V = m omega^2 x^2 / 2 (split-operator).
HarmonicResult run_harmonic_coherent(const HarmonicParams& p);

// --- Eckart barrier ---------------------------------------------------------

/// V(x) = V0 / cosh^2((x - x_b) / a).
struct EckartParams {
  double V0 = 1.0, a = 1.0, center = 0.0;
};

/// Exact transmission of a particle with wavevector k > 0.
double eckart_transmission(const EckartParams& b, double k, double hbar = 1.0, double mass = 1.0);

struct BarrierParams {
  EckartParams barrier{};
  double lo = -200.0, hi = 200.0;
  std::size_t points = 4096;
  Boundary boundary = Boundary::periodic;
  double x0 = -60.0, sigma = 10.0, k0 = 1.3;
  double dt = 0.02;
  double t_end = 100.0;
  double record_interval = 0.0;  // 0 = t_end / 100
  std::size_t M = 2000;
  std::uint64_t seed = 1;
  Constants constants{};
};

struct BarrierResult {
  double transmission_grid = 0.0;         // density beyond the barrier at t_end
  double transmission_exact = 0.0;        // Eckart T(k) averaged over |phi(k)|^2
  double transmission_trajectories = 0.0; // fraction of members beyond the barrier
  double trajectory_stderr = 0.0;         // binomial standard error of that fraction
  double residual_near_barrier = 0.0;     // density within 5a of the barrier at t_end
  bool ordering_preserved = true;         // 1D non-crossing over the run
  TrajectoryEnsemble ensemble;
};

/// Gaussian packet from the left hitting the Eckart barrier; split-operator
/// on periodic grids, Crank-Nicolson on box grids.
BarrierResult run_barrier(const BarrierParams& p);

/// <T> over a Gaussian of |psi|^2 width sigma: integral of |phi(k)|^2 T(k) dk
/// with |phi|^2 normal of mean k0 and standard deviation 1 / (2 sigma).
double eckart_packet_transmission(const EckartParams& b, double k0, double sigma, double hbar = 1.0,
                                  double mass = 1.0);

// --- double slit ------------------------------------------------------------

/// Two Gaussian apertures at y = +-separation/2 just behind the slits; the
/// beam moves along +x. A single slit drops the lower aperture.
struct DoubleSlitParams {
  double x_lo = -32.0, x_hi = 32.0;
  std::size_t points_x = 256;
  double y_half_width = 32.0;
  std::size_t points_y = 256;
  double x0 = -15.0, sigma_x = 2.0, kx = 2.0;
  double separation = 12.0, sigma_y = 0.8;
  bool single_slit = false;
  double lower_amplitude = 1.0;   // relative amplitude of the lower aperture; != 1 breaks the symmetry
  std::size_t sample_refine = 4;  // spectral refinement of the initial field for sampling only
  double dt = 0.05;
  double t_end = 10.0;
  double record_interval = 0.0;  // 0 = t_end / 20
  std::size_t M = 10000;
  std::uint64_t seed = 1;
  Constants constants{};
};

struct DoubleSlitResult {
  bool symmetric = true;            // symmetry-based assertions apply
  double non_mixing_fraction = 0.0; // upper-slit members ending below the axis (and vice versa)
  double chi2_p_value = 0.0;        // final y of members vs the |Psi|^2 marginal
  double chi2_statistic = 0.0;
  std::size_t chi2_bins = 0;
  double visibility = 0.0;          // fringe visibility of the final y marginal
  std::vector<double> y_nodes, y_marginal;  // final transverse marginal
  std::vector<std::uint8_t> upper;  // slit tag of each member
  TrajectoryEnsemble ensemble;
  WaveFunction final_state;
};

DoubleSlitResult run_double_slit(const DoubleSlitParams& p);

/// (I_max - I_min) / (I_max + I_min) over the deepest interior minimum of a
/// sampled profile and its neighbouring maxima; 0 without interior minima.
double fringe_visibility(const std::vector<double>& profile, double floor_fraction = 1e-3);

// --- infinite well: momentum by time of flight ------------------------------

struct WellMomentumParams {
  double L = 100.0;
  int n = 10;
  std::size_t box_points = 801;       // [0, L] including the walls
  double t_release = 100.0;           // walls removed here
  double t_flight = 3000.0;           // free flight after release
  double dt_box = 1.0, dt_free = 2.0;
  std::size_t free_points = 32768;    // periodic grid after release, same spacing
  std::size_t M = 2000;
  std::uint64_t seed = 1;
  double max_overlap = 0.05;          // allowed density still within L of the well centre
  Constants constants{};
};

struct WellMomentumResult {
  double p_exact = 0.0;                   // n pi hbar / L
  double median_abs_p = 0.0;
  double positive_fraction = 0.0;
  double max_displacement_before = 0.0;   // max |x(t) - x(0)| while the walls stand
  double overlap = 0.0;                   // final density within L of the centre
  std::vector<double> p_estimate;         // m dx / dt per member over the second half of the flight
  TrajectoryEnsemble ensemble;
};

/// Eigenstate n in the box, Crank-Nicolson until t_release, then free
/// split-operator flight on a large periodic grid with the same nodes.
WellMomentumResult run_well_momentum(const WellMomentumParams& p);

}  // namespace bohmkit
