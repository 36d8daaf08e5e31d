#include "bohmkit/potential.hpp"

#include <algorithm>
#include <cmath>

#include "bohmkit/error.hpp"

namespace bohmkit {

Potential Potential::analytic(Fn real, bool time_dependent) {
  Potential p;
  p.terms_.push_back(Term{std::move(real), nullptr, time_dependent, nullptr, nullptr, nullptr});
  return p;
}

Potential Potential::absorbing(Fn imag, bool time_dependent) {
  Potential p;
  p.terms_.push_back(Term{nullptr, std::move(imag), time_dependent, nullptr, nullptr, nullptr});
  return p;
}

Potential Potential::tabulated(const Grid& grid, std::vector<double> real, std::vector<double> imag) {
  detail::require(real.size() == grid.size(), "tabulated potential needs one value per node");
  detail::require(imag.empty() || imag.size() == grid.size(),
                  "tabulated absorbing part needs one value per node");
  for (double w : imag) detail::require(w <= 0.0, "absorbing part must satisfy W <= 0");
  Potential p;
  Term t;
  t.table_grid = std::make_shared<const Grid>(grid);
  t.table_re = std::make_shared<const std::vector<double>>(std::move(real));
  if (!imag.empty()) t.table_im = std::make_shared<const std::vector<double>>(std::move(imag));
  p.terms_.push_back(std::move(t));
  return p;
}

Potential Potential::operator+(const Potential& other) const {
  Potential p = *this;
  p.terms_.insert(p.terms_.end(), other.terms_.begin(), other.terms_.end());
  return p;
}

Potential::Kind Potential::kind() const {
  if (terms_.size() > 1) return Kind::composite;
  if (terms_.size() == 1 && terms_.front().table_grid) return Kind::tabulated;
  return Kind::analytic;
}

bool Potential::time_dependent() const {
  return std::any_of(terms_.begin(), terms_.end(), [](const Term& t) { return t.time_dependent; });
}

bool Potential::has_imaginary() const {
  return std::any_of(terms_.begin(), terms_.end(),
                     [](const Term& t) { return bool(t.im) || bool(t.table_im); });
}

double Potential::table_value(const Term& t, const std::vector<double>& table, const Point& r) {
  const Grid& g = *t.table_grid;
  // Multilinear interpolation, clamped to the table's extent.
  std::size_t i[2] = {0, 0};
  double f[2] = {0.0, 0.0};
  for (int a = 0; a < g.dims(); ++a) {
    const double s = (r[std::size_t(a)] - g.origin(a)) / g.spacing(a);
    const double maxs = double(g.points(a) - 1);
    const double c = std::clamp(s, 0.0, maxs);
    auto k = std::size_t(std::floor(c));
    if (k >= g.points(a) - 1) k = g.points(a) - 2;
    i[a] = k;
    f[a] = c - double(k);
  }
  if (g.dims() == 1) return (1 - f[0]) * table[i[0]] + f[0] * table[i[0] + 1];
  auto at = [&](std::size_t a, std::size_t b) { return table[g.index(a, b)]; };
  return (1 - f[0]) * ((1 - f[1]) * at(i[0], i[1]) + f[1] * at(i[0], i[1] + 1)) +
         f[0] * ((1 - f[1]) * at(i[0] + 1, i[1]) + f[1] * at(i[0] + 1, i[1] + 1));
}

double Potential::real_at(const Point& r, double t) const {
  double v = 0.0;
  for (const auto& term : terms_) {
    if (term.re) v += term.re(r, t);
    if (term.table_re) v += table_value(term, *term.table_re, r);
  }
  return v;
}

double Potential::imag_at(const Point& r, double t) const {
  double w = 0.0;
  for (const auto& term : terms_) {
    if (term.im) w += term.im(r, t);
    if (term.table_im) w += table_value(term, *term.table_im, r);
  }
  return w;
}

void Potential::sample(const Grid& grid, double t, std::vector<double>& v,
                       std::vector<double>& w) const {
  v.assign(grid.size(), 0.0);
  w.assign(grid.size(), 0.0);
  for (const auto& term : terms_) {
    const bool same_grid = term.table_grid && term.table_grid->same_layout(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const Point r = grid.node(i);
      if (term.re) v[i] += term.re(r, t);
      if (term.im) w[i] += term.im(r, t);
      if (term.table_re) v[i] += same_grid ? (*term.table_re)[i] : table_value(term, *term.table_re, r);
      if (term.table_im) w[i] += same_grid ? (*term.table_im)[i] : table_value(term, *term.table_im, r);
    }
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(v[i])) throw InvalidArgument("potential is not finite on the grid");
    if (w[i] > 0.0) throw InvalidArgument("absorbing potential must satisfy W <= 0");
  }
}

}  // namespace bohmkit
