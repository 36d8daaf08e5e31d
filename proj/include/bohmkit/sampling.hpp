#pragma once

#include <cstdint>
#include <vector>

#include "bohmkit/wavefunction.hpp"

namespace bohmkit {

/// CDF and inverse CDF of the piecewise-linear interpolant of nodal density
/// values on a uniform axis. The total is the trapezoid integral.
class LinearDensityCdf {
 public:
  LinearDensityCdf(double origin, double spacing, std::vector<double> density);

  double total() const { return cum_.back(); }
  /// Normalized CDF in [0, 1].
  double cdf(double x) const;
  /// Inverse of cdf() for u in [0, 1].
  double quantile(double u) const;
  /// Normalized density of the interpolant.
  double pdf(double x) const;

 private:
  double x0_, dx_;
  std::vector<double> rho_;
  std::vector<double> cum_;  // unnormalized cumulative integral at nodes
};

/// Transverse or longitudinal marginal of |psi|^2 along one axis (trapezoid
/// integration over the other axis), as a sampling distribution.
LinearDensityCdf marginal_cdf(const WaveFunction& wf, int axis);

/// M independent draws from |psi|^2 (the piecewise-linear, resp. bilinear,
/// interpolant of the nodal density). 2D draws take the axis-0 marginal
/// first, then the conditional along axis 1. Draw alpha uses substream
/// alpha + 1 of the seed, so members are reproducible individually.
std::vector<Point> sample_quantum_equilibrium(const WaveFunction& wf, std::size_t M,
                                              std::uint64_t seed);

/// Band-limited (zero-padded Fourier) interpolation of a periodic field onto
/// a mesh `factor` times finer along every axis, same period and origin.
/// Sampling from the refined field shrinks the O(dx^2) bias of the linear
/// density interpolant when a packet is only a few cells wide.
WaveFunction spectral_refine(const WaveFunction& wf, std::size_t factor);

}  // namespace bohmkit
