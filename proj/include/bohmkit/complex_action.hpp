#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "bohmkit/polar.hpp"

namespace bohmkit {

/// S_bar = (hbar / i) ln psi on the real grid: Re S_bar is the unwrapped
/// action S, Im S_bar = -hbar ln R.
struct ComplexActionField {
  Grid grid;
  double time = 0.0;
  Constants constants{};
  std::vector<cplx> S_bar;  // also filled on masked nodes unless psi = 0 there
  std::vector<double> R;
  std::array<std::vector<cplx>, 2> v_bar;  // filled by complex_velocity
  std::vector<cplx> Q_bar;                 // filled by complex_quantum_potential
  std::vector<std::uint8_t> mask;
  std::vector<int> region;  // branch bookkeeping shared with the polar route
  int regions = 0;
};

ComplexActionField complex_action(const WaveFunction& wf);

/// Cell difference S_bar_j - S_bar_i with the real part on the branch
/// nearest zero (node rule as in action_difference); zero next to psi = 0.
cplx complex_action_difference(const ComplexActionField& f, std::size_t i, std::size_t j);

/// v_bar_k = d_k S_bar / m_k by centred differences; Re v_bar is the
/// Bohmian velocity. Also stores the result in f.v_bar.
std::array<std::vector<cplx>, 2> complex_velocity(ComplexActionField& f);

/// Q_bar = -(i hbar / 2) div v_bar with the divergence taken over
/// half-node velocities, so it coincides with the compact Laplacian form.
/// Also stores the result in f.Q_bar.
std::vector<cplx> complex_quantum_potential(ComplexActionField& f);

/// -(i hbar / 2) sum_k (1 / m_k) d_k^2 S_bar with the 3-point Laplacian.
std::vector<cplx> complex_laplacian_potential(const ComplexActionField& f);

/// dS_bar/dt + sum_k (d_k S_bar)^2 / (2 m_k) + V + Q_bar at the middle
/// snapshot; dS_bar/dt = (hbar / i) ln(psi_next / psi_prev) / (2 dt).
/// The real part tracks the quantum Hamilton-Jacobi residual, the imaginary
/// part the continuity defect divided by -2 rho / hbar.
std::vector<cplx> cqhj_residual(const WaveFunction& prev, const WaveFunction& mid, const WaveFunction& next,
                                const Potential& pot);

}  // namespace bohmkit
