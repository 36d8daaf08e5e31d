#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

#include "bohmkit/wavefunction.hpp"

namespace bohmkit {

/// Nodes with rho < kRhoFloorFraction * max(rho) are masked.
inline constexpr double kRhoFloorFraction = 1e-12;
/// Below rho = kPhaseFloorFraction * max(rho) (|psi| ~ 1e-12 of its peak) the
/// phase is rounding noise; phase increments touching such nodes count as 0.
inline constexpr double kPhaseFloorFraction = 1e-24;
/// Velocity clamp in units of hbar k_max / m, k_max = pi / spacing.
inline constexpr double kVelocityCapFactor = 10.0;

/// Phase advance from sample a to its neighbour b, arg(b conj(a)). When the
/// product is real and negative the field changes sign between the samples
/// without any phase gradient (a node of a real-valued profile); that step
/// contributes nothing.
inline double phase_increment(std::complex<double> a, std::complex<double> b) {
  const std::complex<double> z = b * std::conj(a);
  if (z.real() < 0.0 && std::abs(z.imag()) <= 1e-10 * -z.real()) return 0.0;
  return std::arg(z);
}

/// Bohmian velocity v_k = (hbar/m_k) Im(d_k psi / psi), evaluated at nodes
/// as the centred difference of the locally unwrapped phase.
struct VelocityField {
  Grid grid;
  double time = 0.0;
  std::array<std::vector<double>, 2> v;  // one array per axis (axis 1 empty in 1D)
  std::vector<std::uint8_t> mask;        // 1 where rho < rho_floor
  std::array<double, 2> cap{0.0, 0.0};   // clamp per axis
  double rho_floor = 0.0;

  /// Cubic/bicubic interpolation, clamped to +-cap per axis.
  Point at(const Point& r) const;
  /// Whether the nearest node is masked.
  bool masked_at(const Point& r) const;
  std::size_t masked_count() const;
};

VelocityField velocity_field(const WaveFunction& wf);

/// Velocity at an arbitrary point from the local stencil only (no full-grid
/// pass), clamped like VelocityField::at.
Point velocity_at(const WaveFunction& wf, const Point& r);

/// Velocity of a node along one axis, clamped to the cap.
double node_velocity(const WaveFunction& wf, std::size_t flat, int axis);

double velocity_cap(const WaveFunction& wf, int axis);

}  // namespace bohmkit
