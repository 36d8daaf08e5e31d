#include "bohmkit/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "bohmkit/error.hpp"
#include "bohmkit/fft.hpp"
#include "bohmkit/rng.hpp"

namespace bohmkit {

namespace {

// Fraction s in [0, 1] of a cell with end densities a, b and width h at which
// the integral from the cell start reaches m.
double cell_fraction(double a, double b, double h, double m) {
  const double q = m / h;
  const double disc = std::max(0.0, a * a + 2.0 * (b - a) * q);
  const double den = a + std::sqrt(disc);
  if (!(den > 0.0)) return 0.5;
  return std::clamp(2.0 * q / den, 0.0, 1.0);
}

}  // namespace

LinearDensityCdf::LinearDensityCdf(double origin, double spacing, std::vector<double> density)
    : x0_(origin), dx_(spacing), rho_(std::move(density)) {
  detail::require(rho_.size() >= 2, "density needs at least two nodes");
  cum_.assign(rho_.size(), 0.0);
  for (std::size_t i = 1; i < rho_.size(); ++i) {
    detail::require(rho_[i] >= 0.0 && rho_[i - 1] >= 0.0, "density must be non-negative");
    cum_[i] = cum_[i - 1] + 0.5 * dx_ * (rho_[i - 1] + rho_[i]);
  }
  detail::require(cum_.back() > 0.0, "density integrates to zero");
}

double LinearDensityCdf::cdf(double x) const {
  const double s = (x - x0_) / dx_;
  if (s <= 0.0) return 0.0;
  if (s >= double(rho_.size() - 1)) return 1.0;
  const auto i = std::size_t(s);
  const double t = s - double(i);
  const double a = rho_[i], b = rho_[i + 1];
  return (cum_[i] + dx_ * (a * t + 0.5 * (b - a) * t * t)) / total();
}

double LinearDensityCdf::pdf(double x) const {
  const double s = (x - x0_) / dx_;
  if (s < 0.0 || s > double(rho_.size() - 1)) return 0.0;
  const auto i = std::min(std::size_t(s), rho_.size() - 2);
  const double t = s - double(i);
  return ((1.0 - t) * rho_[i] + t * rho_[i + 1]) / total();
}

double LinearDensityCdf::quantile(double u) const {
  const double target = std::clamp(u, 0.0, 1.0) * total();
  auto it = std::upper_bound(cum_.begin(), cum_.end(), target);
  std::size_t i = it == cum_.begin() ? 0 : std::size_t(it - cum_.begin()) - 1;
  i = std::min(i, rho_.size() - 2);
  const double t = cell_fraction(rho_[i], rho_[i + 1], dx_, target - cum_[i]);
  return x0_ + dx_ * (double(i) + t);
}

LinearDensityCdf marginal_cdf(const WaveFunction& wf, int axis) {
  const Grid& g = wf.grid();
  if (g.dims() == 1) return LinearDensityCdf(g.origin(0), g.spacing(0), wf.density());
  const int other = 1 - axis;
  std::vector<double> m(g.points(axis), 0.0);
  for (std::size_t i = 0; i < g.points(0); ++i)
    for (std::size_t j = 0; j < g.points(1); ++j) {
      const std::size_t along = axis == 0 ? i : j, across = axis == 0 ? j : i;
      m[along] += g.trapezoid_weight(other, across) * g.spacing(other) * std::norm(wf[g.index(i, j)]);
    }
  return LinearDensityCdf(g.origin(axis), g.spacing(axis), std::move(m));
}

std::vector<Point> sample_quantum_equilibrium(const WaveFunction& wf, std::size_t M, std::uint64_t seed) {
  detail::require(M >= 1, "need at least one sample");
  const Grid& g = wf.grid();
  std::vector<Point> out(M, Point{0.0, 0.0});
  const LinearDensityCdf first = marginal_cdf(wf, 0);
  if (g.dims() == 1) {
    for (std::size_t a = 0; a < M; ++a) {
      auto rng = make_stream(seed, a + 1);
      out[a][0] = first.quantile(uniform01(rng));
    }
    return out;
  }
  const std::size_t n1 = g.points(1);
  std::vector<double> row(n1);
  for (std::size_t a = 0; a < M; ++a) {
    auto rng = make_stream(seed, a + 1);
    const double x0 = first.quantile(uniform01(rng));
    const double s = std::clamp((x0 - g.origin(0)) / g.spacing(0), 0.0, double(g.points(0) - 1));
    const std::size_t i = std::min(std::size_t(s), g.points(0) - 2);
    const double t = s - double(i);
    for (std::size_t j = 0; j < n1; ++j)
      row[j] = (1.0 - t) * std::norm(wf[g.index(i, j)]) + t * std::norm(wf[g.index(i + 1, j)]);
    const LinearDensityCdf cond(g.origin(1), g.spacing(1), row);
    out[a] = {x0, cond.quantile(uniform01(rng))};
  }
  return out;
}

namespace {

// target bins (and weights) of source bin j when n grows to n * f; the
// Nyquist bin of an even n is split between +n/2 and -n/2
std::vector<std::pair<std::size_t, double>> padded_bins(std::size_t j, std::size_t n, std::size_t f) {
  const std::size_t big = n * f;
  if (f == 1) return {{j, 1.0}};
  if (n % 2 == 0 && j == n / 2) return {{n / 2, 0.5}, {big - n / 2, 0.5}};
  if (j < (n + 1) / 2) return {{j, 1.0}};
  return {{big - (n - j), 1.0}};
}

}  // namespace

WaveFunction spectral_refine(const WaveFunction& wf, std::size_t factor) {
  const Grid& g = wf.grid();
  detail::require(g.boundary() == Boundary::periodic, "spectral refinement needs a periodic grid");
  detail::require(factor >= 1, "refinement factor must be at least 1");
  if (factor == 1) return wf;
  const bool two = g.dims() == 2;
  const std::size_t n0 = g.points(0), n1 = two ? g.points(1) : 1;
  const std::size_t m0 = n0 * factor, m1 = two ? n1 * factor : 1;
  std::vector<cplx> src(wf.values().begin(), wf.values().end());
  Fft(n0, n1).forward(src);
  std::vector<cplx> dst(m0 * m1, cplx(0.0));
  for (std::size_t i = 0; i < n0; ++i)
    for (const auto& [ti, wi] : padded_bins(i, n0, factor))
      for (std::size_t j = 0; j < n1; ++j)
        for (const auto& [tj, wj] : padded_bins(j, n1, two ? factor : 1))
          dst[ti * m1 + tj] += wi * wj * src[i * n1 + j];
  Fft(m0, m1).backward(dst);
  const double scale = 1.0 / double(n0 * n1);
  for (auto& v : dst) v *= scale;
  auto axis = [&](int a, std::size_t m) {
    const double dx = g.spacing(a) / double(factor);
    return AxisSpec{g.origin(a), g.origin(a) + dx * double(m - 1), m};
  };
  GridSpec spec;
  spec.axes.push_back(axis(0, m0));
  if (two) spec.axes.push_back(axis(1, m1));
  spec.boundary = Boundary::periodic;
  return WaveFunction(make_grid(spec), std::move(dst), wf.time(), wf.constants());
}

}  // namespace bohmkit
