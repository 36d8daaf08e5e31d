#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "bohmkit/grid.hpp"

namespace bohmkit {

/// Scalar potential V(r, t) with an optional absorbing part W(r, t) <= 0,
/// entering the Hamiltonian as V + iW. Built from analytic or tabulated
/// terms; adding potentials gives a composite.
class Potential {
 public:
  using Fn = std::function<double(const Point& r, double t)>;
  enum class Kind { analytic, tabulated, composite };

  Potential() = default;  // identically zero

  static Potential zero() { return {}; }
  static Potential analytic(Fn real, bool time_dependent = false);
  /// Absorbing term; the function must return values <= 0.
  static Potential absorbing(Fn imag, bool time_dependent = false);
  static Potential tabulated(const Grid& grid, std::vector<double> real,
                             std::vector<double> imag = {});

  Potential operator+(const Potential& other) const;

  Kind kind() const;
  bool is_zero() const { return terms_.empty(); }
  bool time_dependent() const;
  bool has_imaginary() const;

  double real_at(const Point& r, double t) const;
  double imag_at(const Point& r, double t) const;

  /// Samples V and W on every node. Throws if W > 0 or V is not finite.
  void sample(const Grid& grid, double t, std::vector<double>& v, std::vector<double>& w) const;

 private:
  struct Term {
    Fn re;
    Fn im;
    bool time_dependent = false;
    std::shared_ptr<const Grid> table_grid;
    std::shared_ptr<const std::vector<double>> table_re;
    std::shared_ptr<const std::vector<double>> table_im;
  };
  static double table_value(const Term& t, const std::vector<double>& table, const Point& r);
  std::vector<Term> terms_;
};

}  // namespace bohmkit
