#pragma once

#include <cstdint>
#include <vector>

#include "bohmkit/potential.hpp"
#include "bohmkit/velocity.hpp"

namespace bohmkit {

/// psi = R exp(i S / hbar) with S unwrapped, plus the quantum potential.
struct PolarFields {
  Grid grid;
  double time = 0.0;
  Constants constants{};
  std::vector<double> R;
  std::vector<double> S;  // action units
  std::vector<double> Q;  // empty until computed; 0 on masked nodes
  std::vector<std::uint8_t> mask;
  /// Connected unmasked region of every node (-1 on masked nodes). Each
  /// region carries its own branch constant, anchored at its density maximum.
  std::vector<int> region;
  int regions = 0;
  bool disconnected() const { return regions > 1; }
};

/// R = |psi| and S unwrapped by flood fill from the density maximum, where
/// S = hbar arg(psi). Every S value is congruent to hbar arg(psi) modulo
/// 2 pi hbar, so R exp(iS/hbar) reproduces psi up to round-off.
PolarFields polar_decompose(const WaveFunction& wf);

/// Q = -sum_k hbar^2 / (2 m_k) d_k^2 R / R with the 3-point stencil per
/// axis (one-sided second differences at non-periodic edges).
std::vector<double> quantum_potential(const PolarFields& f);
std::vector<double> quantum_potential(const WaveFunction& wf);

/// polar_decompose with Q filled in.
PolarFields polar_fields(const WaveFunction& wf);

/// Cell difference S_j - S_i reduced to the branch nearest zero; a sign flip
/// of a real profile (see phase_increment) counts as no phase change, and
/// so does a step onto an exact zero.
double action_difference(const PolarFields& f, std::size_t i, std::size_t j);

/// dS/dx_k at every node by centred differences of the unwrapped action.
std::vector<double> action_gradient(const PolarFields& f, int axis);

/// Velocity d_k S / m_k (the synthetic route to the guidance law).
std::vector<double> phase_gradient_velocity(const PolarFields& f, int axis);

/// dS/dt + sum_k |d_k S|^2 / (2 m_k) + V + Q at the middle snapshot, with
/// dS/dt = hbar arg(psi_next conj(psi_prev)) / (2 dt). Snapshots must be
/// equally spaced in time on one grid.
std::vector<double> qhj_residual(const WaveFunction& prev, const WaveFunction& mid, const WaveFunction& next,
                                 const Potential& pot);

/// d rho/dt + div j at the middle snapshot, j from current_density().
std::vector<double> continuity_residual(const WaveFunction& prev, const WaveFunction& mid, const WaveFunction& next);

/// Line integral of the interpolated velocity field around a circle.
double circulation(const VelocityField& v, const Point& center, double radius, std::size_t samples = 720);

/// Net number of 2 pi phase windings of psi around the same circle.
long winding_number(const WaveFunction& wf, const Point& center, double radius, std::size_t samples = 720);

/// Largest |x| over unmasked nodes (0 if none).
double max_unmasked(const std::vector<double>& x, const std::vector<std::uint8_t>& mask);

}  // namespace bohmkit
