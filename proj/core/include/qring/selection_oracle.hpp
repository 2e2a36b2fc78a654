#pragma once

// First-order (one-photon) transition analysis for the velocity-gauge
// coupling: angular selection rules, sin^2-envelope Fourier coefficients
// and ranked line predictions.

#include <complex>
#include <vector>

#include "qring/ring_model.hpp"
#include "qring/vortex_field.hpp"

namespace qring {

/// int_0^{2pi} e^{-i m0' phi} cos(phi) e^{i m_oam phi} e^{i m0 phi} dphi,
/// which is pi when m0' = m0 + m_oam +- 1 and 0 otherwise.
[[nodiscard]] std::complex<double> angular_integral(int m0, int m0_prime, int m_oam);

struct FourierCoefficients {
  std::complex<double> minus;  // absorption, int Omega e^{i(dE/hbar - omega_x) t} dt
  std::complex<double> plus;   // emission,   int Omega e^{i(dE/hbar + omega_x) t} dt
};

/// Closed form for the sin^2 envelope on [0, T_dur]; time in ps.
[[nodiscard]] FourierCoefficients pulse_fourier_coefficients(const PulseSpec& pulse, double delta_e);

/// int_0^T sin^2(pi t / T) e^{i nu t} dt.
[[nodiscard]] std::complex<double> envelope_transform(double duration, double nu);

struct TransitionLine {
  int n_from = 0, m_from = 0;
  int n_to = 0, m_to = 0;
  double delta_e = 0.0;  // meV, E_to - E_from
  double thz = 0.0;
  std::complex<double> angular;    // angular_integral for the absorption branch
  std::complex<double> amplitude;  // first-order c_{fi}
  double probability = 0.0;        // |c_fi|^2
  double weight = 0.0;             // |c_fi|^2 f_i (1 - f_f)
};

struct OracleOptions {
  double occupation_cutoff = 1e-4;
  double min_weight = 0.0;
  std::size_t max_lines = 0;  // 0: all
};

/// Radial part of the first-order matrix element for the branch s = +-1,
/// int f(rho) [R_f R_i' - R_i R_f' - s (m_i + m_f) R_f R_i / rho] rho drho.
[[nodiscard]] double radial_matrix_element(const Orbital& from, const Orbital& to, const PulseSpec& pulse, int s);

/// First-order amplitude c_{fi} for the velocity-gauge coupling (A^2 dropped).
[[nodiscard]] std::complex<double> transition_amplitude(const Orbital& from, const Orbital& to, const PulseSpec& pulse,
                                                        const Material& material);

/// All lines from occupied to available states, sorted by weight (desc).
[[nodiscard]] std::vector<TransitionLine> predict_lines(const std::vector<Orbital>& orbitals, const PulseSpec& pulse,
                                                        const Material& material, const OracleOptions& options = {});

}  // namespace qring
