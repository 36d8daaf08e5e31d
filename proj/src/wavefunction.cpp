#include "bohmkit/wavefunction.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "bohmkit/error.hpp"

namespace bohmkit {

using detail::require;

WaveFunction::WaveFunction(Grid grid, std::vector<cplx> values, double time, Constants c)
    : grid_(std::move(grid)), values_(std::move(values)), time_(time), constants_(c) {
  require(values_.size() == grid_.size(), "wavefunction needs one value per grid node (" +
                                              std::to_string(grid_.size()) + "), got " +
                                              std::to_string(values_.size()));
  require(constants_.hbar > 0.0, "hbar must be positive");
  require(constants_.mass[0] > 0.0 && constants_.mass[1] > 0.0, "masses must be positive");
}

WaveFunction WaveFunction::with_values(std::vector<cplx> values, double time) const {
  return WaveFunction(grid_, std::move(values), time, constants_);
}

WaveFunction WaveFunction::with_time(double time) const {
  WaveFunction out = *this;
  out.time_ = time;
  return out;
}

WaveFunction WaveFunction::scaled(cplx factor) const {
  std::vector<cplx> v(values_);
  for (auto& z : v) z *= factor;
  return with_values(std::move(v), time_);
}

std::vector<double> WaveFunction::density() const {
  std::vector<double> rho(values_.size());
  std::transform(values_.begin(), values_.end(), rho.begin(), [](cplx z) { return std::norm(z); });
  return rho;
}

double WaveFunction::max_density() const {
  double m = 0.0;
  for (auto z : values_) m = std::max(m, std::norm(z));
  return m;
}

WaveFunction init_gaussian(const Grid& grid, const GaussianParams& p, Constants c) {
  for (int a = 0; a < grid.dims(); ++a) {
    const auto k = std::size_t(a);
    require(p.sigma[k] >= 2.0 * grid.spacing(a),
            "gaussian sigma must be at least two grid spacings on axis " + std::to_string(a));
    require(p.center[k] - 3.0 * p.sigma[k] >= grid.origin(a) &&
                p.center[k] + 3.0 * p.sigma[k] <= grid.upper(a),
            "gaussian packet clipped by the grid boundary on axis " + std::to_string(a));
  }
  std::vector<cplx> v(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Point r = grid.node(i);
    double re = 0.0, im = 0.0;
    for (int a = 0; a < grid.dims(); ++a) {
      const auto k = std::size_t(a);
      const double d = r[k] - p.center[k];
      re -= d * d / (4.0 * p.sigma[k] * p.sigma[k]);
      im += p.k0[k] * r[k];
    }
    v[i] = std::exp(re) * cplx(std::cos(im), std::sin(im));
  }
  return normalize(WaveFunction(grid, std::move(v), 0.0, c));
}

WaveFunction init_well_eigenstate(const Grid& grid, double width, int n, double left, Constants c) {
  require(grid.dims() == 1, "well eigenstate is defined on a 1D grid");
  require(n >= 1, "quantum number must be >= 1");
  require(width > 0.0, "well width must be positive");
  const double tol = 1e-9 * grid.spacing(0);
  require(left >= grid.origin(0) - tol && left + width <= grid.upper(0) + tol,
          "well exceeds the grid");
  std::vector<cplx> v(grid.size());
  const double amp = std::sqrt(2.0 / width);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid.coord(0, i) - left;
    if (x > 0.0 && x < width) v[i] = amp * std::sin(double(n) * std::numbers::pi * x / width);
  }
  return normalize(WaveFunction(grid, std::move(v), 0.0, c));
}

double norm(const WaveFunction& wf) {
  const Grid& g = wf.grid();
  double s = 0.0;
  for (std::size_t i = 0; i < wf.size(); ++i) s += g.weight(i) * std::norm(wf[i]);
  return std::sqrt(s);
}

WaveFunction normalize(const WaveFunction& wf) {
  const double n = norm(wf);
  if (!(n >= 1e-300)) throw InvalidArgument("cannot normalize a zero field");
  return wf.scaled(1.0 / n);
}

cplx inner_product(const WaveFunction& a, const WaveFunction& b) {
  require(a.grid().same_layout(b.grid()), "inner product of fields on different grids");
  const Grid& g = a.grid();
  cplx s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += g.weight(i) * std::conj(a[i]) * b[i];
  return s;
}

double fidelity(const WaveFunction& a, const WaveFunction& b) {
  return std::abs(inner_product(a, b)) / (norm(a) * norm(b));
}

WaveFunction symmetrize(const WaveFunction& wf2, int sign) {
  const Grid& g = wf2.grid();
  require(g.dims() == 2, "symmetrize needs a two-particle (2D) field");
  require(sign == 1 || sign == -1, "symmetrization sign must be +1 or -1");
  require(g.points(0) == g.points(1) && std::abs(g.spacing(0) - g.spacing(1)) <= 1e-12 * g.spacing(0) &&
              std::abs(g.origin(0) - g.origin(1)) <= 1e-9 * g.spacing(0),
          "symmetrize needs a square grid with the same axis for both particles");
  const std::size_t n = g.points(0);
  std::vector<cplx> v(g.size());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      v[g.index(i, j)] = wf2[g.index(i, j)] + double(sign) * wf2[g.index(j, i)];
  WaveFunction out = wf2.with_values(std::move(v), wf2.time());
  const double in_norm = norm(wf2);
  const double out_norm = norm(out);
  if (!(out_norm > 1e-12 * in_norm) || !(out_norm >= 1e-300))
    throw InvalidArgument(sign < 0 ? "antisymmetrized field vanishes (exchange-symmetric input)"
                                   : "symmetrized field vanishes (exchange-antisymmetric input)");
  return out.scaled(1.0 / out_norm);
}

WaveFunction product_state(const WaveFunction& a, const WaveFunction& b) {
  require(a.grid().dims() == 1 && b.grid().dims() == 1, "product_state combines two 1D fields");
  const Grid& ga = a.grid();
  const Grid& gb = b.grid();
  Grid g = make_grid_2d(AxisSpec{ga.origin(0), ga.upper(0), ga.points(0)},
                        AxisSpec{gb.origin(0), gb.upper(0), gb.points(0)}, ga.boundary(), ga.cap());
  std::vector<cplx> v(g.size());
  for (std::size_t i = 0; i < ga.points(0); ++i)
    for (std::size_t j = 0; j < gb.points(0); ++j) v[g.index(i, j)] = a[i] * b[j];
  Constants c{a.hbar(), {a.mass(0), b.mass(0)}};
  return WaveFunction(g, std::move(v), a.time(), c);
}

WaveFunction superpose(const WaveFunction& a, cplx ca, const WaveFunction& b, cplx cb) {
  require(a.grid().same_layout(b.grid()), "superposition of fields on different grids");
  std::vector<cplx> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = ca * a[i] + cb * b[i];
  return a.with_values(std::move(v), a.time());
}

}  // namespace bohmkit
