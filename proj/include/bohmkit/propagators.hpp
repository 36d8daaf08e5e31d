#pragma once

#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "bohmkit/fft.hpp"
#include "bohmkit/potential.hpp"
#include "bohmkit/wavefunction.hpp"

namespace bohmkit {

enum class Method { split_operator, crank_nicolson };

Method parse_method(std::string_view name);
std::string_view to_string(Method m);
/// Split-operator for periodic grids, Crank-Nicolson for box grids; absorbing
/// grids default to split-operator.
Method default_method(Boundary b);

/// One-step integrator of i hbar dpsi/dt = [-sum hbar^2/(2 m_k) d_k^2 + V + iW] psi.
/// dt = 0 is the identity; dt < 0 runs backwards and is rejected when the
/// Hamiltonian is absorbing.
class Propagator {
 public:
  Propagator(Grid grid, Constants constants, Potential potential);
  virtual ~Propagator() = default;

  virtual WaveFunction step(WaveFunction wf, double dt) = 0;
  virtual Method method() const = 0;

  const Grid& grid() const { return grid_; }
  const Constants& constants() const { return constants_; }
  const Potential& potential() const { return potential_; }

 protected:
  void check_compatible(const WaveFunction& wf) const;
  /// V and W (potential plus grid CAP) at time t; cached when static.
  void sample_potential(double t);

  Grid grid_;
  Constants constants_;
  Potential potential_;
  std::vector<double> v_, w_;
  bool absorbing_ = false;

 private:
  bool sampled_ = false;
};

/// Strang splitting exp(-i V dt/2) exp(-i T dt) exp(-i V dt/2) with the
/// potential sampled at the half step and the kinetic factor applied in
/// Fourier space.
class SplitOperator final : public Propagator {
 public:
  SplitOperator(Grid grid, Constants constants, Potential potential = {});
  WaveFunction step(WaveFunction wf, double dt) override;
  Method method() const override { return Method::split_operator; }

 private:
  Fft fft_;
  std::vector<double> kinetic_;  // hbar^2 k^2 / 2m per Fourier node
  std::vector<cplx> kin_phase_;
  double kin_dt_ = 0.0;
  std::vector<cplx> pot_phase_;  // exp(-i (V + iW) dt / 2 hbar), cached for static potentials
  double pot_dt_ = 0.0;
};

/// Crank-Nicolson with the 3-point Laplacian and hard walls at the edge
/// nodes. On 2D grids the step is the symmetric product of 1D Cayley sweeps
/// C_x(dt/2) C_y(dt) C_x(dt/2), each carrying half the potential.
class CrankNicolson final : public Propagator {
 public:
  CrankNicolson(Grid grid, Constants constants, Potential potential = {});
  WaveFunction step(WaveFunction wf, double dt) override;
  Method method() const override { return Method::crank_nicolson; }

 private:
  void sweep(std::vector<cplx>& psi, int axis, double dt, double pot_scale);
  std::vector<cplx> line_, rhs_, scratch_;
  std::vector<double> line_v_, line_w_;
};

/// Advances one hard-wall line psi in place by a Crank-Nicolson step with
/// potential v (+ i w, may be empty). Edge nodes are held at zero.
void crank_nicolson_line(std::span<cplx> psi, std::span<const double> v, std::span<const double> w,
                         double dx, double mass, double hbar, double dt,
                         std::vector<cplx>& scratch);

std::unique_ptr<Propagator> make_propagator(Method m, const Grid& grid, const Constants& c,
                                            const Potential& pot);
std::unique_ptr<Propagator> make_propagator(const WaveFunction& like, const Potential& pot);

WaveFunction step_split_operator(const WaveFunction& wf, const Potential& pot, double dt);
WaveFunction step_crank_nicolson(const WaveFunction& wf, const Potential& pot, double dt);

/// dt <= 0.05 hbar / max(max|V|, kinetic scale of the state).
double default_time_step(const WaveFunction& wf, const Potential& pot);

}  // namespace bohmkit
