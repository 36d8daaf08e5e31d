#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "bohmkit/potential.hpp"
#include "bohmkit/stats.hpp"
#include "bohmkit/trajectories.hpp"

namespace bohmkit {

enum class OperatorKind { position, momentum, kinetic, potential, hamiltonian, current, custom };

/// A Hermitian operator of degree <= 2 in p = -i hbar grad:
///   A = a(r) + sum_k [ (b_k(r) p_k + p_k b_k(r)) / 2 + p_k c_k(r) p_k ].
/// The named kinds are special cases; `current` is the current operator
/// (delta(r - r0) p_k + p_k delta(r - r0)) / (2 m_k) at a point r0.
struct OperatorSpec {
  using Coef = std::function<double(const Point&)>;

  OperatorKind kind = OperatorKind::position;
  int axis = 0;
  Potential potential{};
  Point at{0.0, 0.0};
  Coef a;
  std::array<Coef, 2> b;
  std::array<Coef, 2> c;

  static OperatorSpec position(int axis = 0);
  static OperatorSpec momentum(int axis = 0);
  static OperatorSpec kinetic();
  static OperatorSpec potential_energy(Potential v);
  static OperatorSpec hamiltonian(Potential v = {});
  static OperatorSpec current(const Point& r0, int axis = 0);
  static OperatorSpec custom(Coef a, std::array<Coef, 2> b = {}, std::array<Coef, 2> c = {});

  std::string name() const;
};

/// -i hbar d_k psi: spectral on periodic grids, centred differences otherwise.
std::vector<cplx> apply_momentum(const WaveFunction& wf, int axis);

/// A psi on the grid (not defined for the point-current kind).
std::vector<cplx> apply_operator(const WaveFunction& wf, const OperatorSpec& op);

struct Expectation {
  double value = 0.0;
  double imag_residue = 0.0;
};

/// <psi|A psi> by trapezoid quadrature. Throws if the imaginary residue
/// exceeds 1e-10 (relative to max(1, |value|)) or if a custom operator fails
/// the Hermiticity check.
Expectation expectation_operator_detail(const WaveFunction& wf, const OperatorSpec& op);
double expectation_operator(const WaveFunction& wf, const OperatorSpec& op);

/// Largest |<phi|A psi> - <A phi|psi>| over fixed smooth test pairs on the
/// grid of wf.
double hermiticity_defect(const Grid& grid, const Constants& c, const OperatorSpec& op);

/// A_B = Re[psi* A psi / psi* psi], zero on masked nodes.
std::vector<double> local_mean_value(const WaveFunction& wf, const OperatorSpec& op);

/// (1/M) sum_alpha A_B(r_alpha) over active members, with standard error.
MeanStderr expectation_trajectories(const TrajectoryEnsemble& ens, const std::function<double(const Point&)>& a_b);
/// Same with a nodal A_B field interpolated (cubic / bicubic) at the members.
MeanStderr expectation_trajectories(const TrajectoryEnsemble& ens, const Grid& grid, const std::vector<double>& a_b);

/// Probability current j_k = (hbar / m_k) Im(psi* d_k psi), evaluated as rho v_k.
std::array<std::vector<double>, 2> current_density(const WaveFunction& wf);

struct ObservableRow {
  double t = 0.0;
  double value = 0.0;
  double std_error = 0.0;
  std::string route;
};
void write_observables_csv(const std::vector<ObservableRow>& rows, const std::filesystem::path& path,
                           const PhysicalUnits& units = PhysicalUnits{});

}  // namespace bohmkit
