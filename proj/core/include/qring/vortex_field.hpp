#pragma once

// Vector potential of Laguerre-Gauss, perfect-vortex and Gaussian pulses.

#include <complex>
#include <string_view>

#include "qring/grid.hpp"

namespace qring {

enum class BeamKind { LaguerreGauss, PerfectVortex, Gaussian };
enum class Polarization { LinearX, LinearY, CircularPlus, CircularMinus };

struct PulseSpec {
  BeamKind kind = BeamKind::LaguerreGauss;
  int m_oam = 2;
  int p = 0;
  double photon_energy = 2.5;     // meV
  double waist = 150.0;           // nm; annular width for the perfect vortex
  double spot_radius = 150.0;     // nm, perfect vortex only
  double peak_intensity = 1e10;   // W/cm^2
  double n_cycles = 2.0;
  Polarization polarization = Polarization::LinearX;
  double carrier_envelope_phase = 0.0;  // rad
  /// Multiplies e*A/hbar where the field enters the Hamiltonian.
  double coupling_scale = 1.0;

  /// Validates and applies kind-specific constraints (Gaussian forces m_oam = 0).
  void normalize();
  void validate() const;
  [[nodiscard]] double angular_frequency() const;  // rad/ps
  /// T_dur = n_cycles * 2 pi / omega_x, in ps.
  [[nodiscard]] double duration() const;
};

struct FieldSample {
  double ax = 0.0;  // V s / m
  double ay = 0.0;
};

[[nodiscard]] BeamKind parse_beam_kind(std::string_view name);
[[nodiscard]] std::string_view to_string(BeamKind kind);
[[nodiscard]] Polarization parse_polarization(std::string_view name);
[[nodiscard]] std::string_view to_string(Polarization pol);

/// sin^2(pi t / T_dur) on [0, T_dur], zero elsewhere.
[[nodiscard]] double envelope(const PulseSpec& pulse, double t);

/// A0 = E0 / omega_x with E0 = sqrt(2 I / (c eps0)); SI result (V s / m).
[[nodiscard]] double amplitude_from_intensity(double peak_intensity_w_cm2, double photon_energy_mev);

/// Peak wavevector shift coupling_scale * e A0 / hbar in 1/nm.
[[nodiscard]] double peak_wavevector_shift(const PulseSpec& pulse);

/// Radial profile f(rho), normalized so that max f = 1.
[[nodiscard]] double radial_profile(const PulseSpec& pulse, double rho);

/// f(rho) e^{i m phi}: the complex spatial part of the field at (x, y).
[[nodiscard]] std::complex<double> spatial_mode(const PulseSpec& pulse, double x, double y);

/// Polarization vector (eps_x, eps_y), unit norm.
[[nodiscard]] std::pair<std::complex<double>, std::complex<double>> polarization_vector(Polarization pol);

/// Omega(t) e^{i(cep - omega t)}.
[[nodiscard]] std::complex<double> temporal_factor(const PulseSpec& pulse, double t);

[[nodiscard]] FieldSample vector_potential(const PulseSpec& pulse, double x, double y, double t);

/// Space-time integral of |E|^2 / (hbar omega_x) over the grid and pulse
/// window, in arbitrary but kind-independent units.
[[nodiscard]] double photon_number(const PulseSpec& pulse, const GridSpec& grid);

/// Pulse of `target` kind carrying the same photon number as `reference`.
/// The target keeps the reference's temporal parameters; its waist is the
/// reference's characteristic radius (spot radius, or the LG intensity
/// maximum radius) and its peak intensity is rescaled.
[[nodiscard]] PulseSpec photon_number_match(const PulseSpec& reference, BeamKind target,
                                            const GridSpec& grid);

}  // namespace qring
