#pragma once

#include <array>
#include <complex>
#include <span>
#include <vector>

#include "bohmkit/grid.hpp"

namespace bohmkit {

using cplx = std::complex<double>;

/// Physical constants carried with a field, in internal units. On a 2D grid
/// each axis may belong to a different particle, hence one mass per axis.
struct Constants {
  double hbar = 1.0;
  std::array<double, 2> mass{1.0, 1.0};
};

/// Complex field sampled on a grid at a time stamp.
class WaveFunction {
 public:
  WaveFunction() = default;
  WaveFunction(Grid grid, std::vector<cplx> values, double time = 0.0, Constants c = {});

  const Grid& grid() const { return grid_; }
  std::span<const cplx> values() const { return values_; }
  const cplx& operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }
  double time() const { return time_; }
  const Constants& constants() const { return constants_; }
  double hbar() const { return constants_.hbar; }
  double mass(int axis) const { return constants_.mass[std::size_t(axis)]; }

  WaveFunction with_values(std::vector<cplx> values, double time) const;
  WaveFunction with_time(double time) const;
  WaveFunction scaled(cplx factor) const;
  /// Moves the sample buffer out of an expiring field.
  std::vector<cplx> release() && { return std::move(values_); }

  std::vector<double> density() const;
  double max_density() const;

 private:
  Grid grid_;
  std::vector<cplx> values_;
  double time_ = 0.0;
  Constants constants_{};
};

struct GaussianParams {
  Point center{0.0, 0.0};
  Point sigma{1.0, 1.0};  // position spread: |psi|^2 has standard deviation sigma
  Point k0{0.0, 0.0};
};

/// Normalized psi ~ exp(-(x - xc)^2 / (4 sigma^2) + i k0 x), a product over
/// axes on a 2D grid. Requires sigma >= 2 spacing and the +-3 sigma support
/// inside the grid.
WaveFunction init_gaussian(const Grid& grid, const GaussianParams& p, Constants c = {});

/// sqrt(2/L) sin(n pi (x - left) / L) inside [left, left + L], zero outside.
WaveFunction init_well_eigenstate(const Grid& grid, double width, int n, double left = 0.0,
                                  Constants c = {});

/// Trapezoid-rule L2 norm, sqrt(integral |psi|^2).
double norm(const WaveFunction& wf);
WaveFunction normalize(const WaveFunction& wf);

/// Trapezoid-rule <a|b>.
cplx inner_product(const WaveFunction& a, const WaveFunction& b);
/// |<a|b>| / (|a| |b|).
double fidelity(const WaveFunction& a, const WaveFunction& b);

/// N [Phi(x1, x2) + sign Phi(x2, x1)] on a square 2D grid.
WaveFunction symmetrize(const WaveFunction& wf2, int sign);

/// Phi(x1, x2) = a(x1) b(x2) on the grid spanned by both axes.
WaveFunction product_state(const WaveFunction& a, const WaveFunction& b);

/// ca * a + cb * b on a common grid.
WaveFunction superpose(const WaveFunction& a, cplx ca, const WaveFunction& b, cplx cb);

}  // namespace bohmkit
