#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "bohmkit/potential.hpp"
#include "bohmkit/trajectories.hpp"

namespace bohmkit {

/// Three negative Gaussian traps V = -sum_j V_j exp(-(x - x_j)^2 / (2 w_j^2)).
/// The middle trap sits at 0; the outer ones at x_L = -d_L(t), x_R = d_R(t)
/// with d(t) = d_max - (d_max - d_min) exp(-((t - t_c) / tau)^2). The right
/// pair approaches first (t_c = T/2 - delay), the counterintuitive order.
struct SapParams {
  std::array<double, 3> depth{2.0, 2.0, 2.0};
  std::array<double, 3> width{1.0, 1.0, 1.0};
  double d_min = 4.0;
  double d_max = 9.0;
  double T = 4000.0;
  double pulse_width = 0.25;  // tau / T
  double delay = 0.08;        // (t_c,L - T/2) / T; negative reverses the order

  void validate() const;
  double separation_left(double t) const;
  double separation_right(double t) const;
  std::array<double, 3> centers(double t) const;  // x_L, x_M, x_R
};

double triple_well_value(const SapParams& p, double x, double t);
Potential triple_well_potential(const SapParams& p);

/// Ground doublet of two traps a distance d apart on a box mesh of spacing
/// dx: J = half the splitting, shift = doublet centre minus the mean of the
/// isolated ground energies. Tabulated and interpolated (log J linear).
class TunnelTable {
 public:
  TunnelTable(double depth_a, double width_a, double depth_b, double width_b, double dx, double hbar,
              double mass, double d_lo, double d_hi, double step = 0.125);
  double coupling(double d) const;
  double shift(double d) const;
  double isolated_energy(int which) const { return eps_[std::size_t(which)]; }

 private:
  std::vector<double> d_, logj_, shift_;
  std::array<double, 2> eps_{};
};

/// Lowest eigenvalue(s) of the 3-point box Hamiltonian -hbar^2/2m d^2 + V on
/// a uniform mesh with zero edge nodes; `vectors` gets the ground state
/// (including the zero edges) when non-null.
std::vector<double> box_spectrum(const std::vector<double>& v, double dx, double hbar, double mass,
                                 std::size_t count, std::vector<double>* ground = nullptr);

/// cos(theta)|L> - sin(theta)|R>.
std::array<double, 3> dark_state(double theta);

struct ThreeModeResult {
  std::vector<double> t;
  std::array<std::vector<double>, 3> population;
  std::vector<double> theta;           // atan2(J_LM, J_MR)
  std::vector<double> dark_overlap;    // |<D(theta)|c>|^2
};

/// i dc/dt = H(t) c with H = [[e_L, -J_LM, 0], [-J_LM, e_M, -J_MR], [0, -J_MR, e_R]]
/// from c = |L>, stepped with the exact exponential of H at each midpoint.
/// `onsite` defaults to zero.
ThreeModeResult three_mode_sap_model(const std::function<double(double)>& J_LM,
                                     const std::function<double(double)>& J_MR, double T, double dt = 0.5,
                                     const std::function<std::array<double, 3>(double)>& onsite = {},
                                     double record_interval = 0.0);

struct SapRunOptions {
  double dx = 0.05;
  double margin = 11.0;   // grid half-width beyond d_max
  double dt = 0.2;
  double record_interval = 0.0;  // 0 = T / 400
  std::size_t M = 64;
  std::uint64_t seed = 1;
  double hbar = 1.0, mass = 1.0;
};

struct SapResult {
  std::vector<double> t;
  std::array<std::vector<double>, 3> population;  // basins between trap midpoints
  ThreeModeResult model;                          // at the same times
  TrajectoryEnsemble ensemble;                    // 1D, recorded at the same times
  double fidelity = 0.0;                          // final right-basin population
  double model_fidelity = 0.0;
  double max_middle_population = 0.0;             // over every step
  std::vector<double> member_middle_peak;         // per member: max |v| inside the middle basin
  double peak_middle_speed = 0.0;                 // median of member_middle_peak
  double max_middle_speed = 0.0;                  // largest of member_middle_peak
  double peak_in_middle_fraction = 0.0;           // members whose own speed maximum lies there
  double max_norm_drift = 0.0;
  bool adiabatic = false;                         // fidelity >= 0.5
};

/// Left-trap ground state evolved on a box mesh by Crank-Nicolson under the
/// moving triple well, with an equilibrium ensemble riding along and the
/// three-mode model from the calibrated couplings.
SapResult run_sap(const SapParams& p, const SapRunOptions& opt = {});

}  // namespace bohmkit
