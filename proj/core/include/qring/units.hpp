#pragma once

// Internal unit system: lengths in nm, times in ps, energies in meV,
// charge in units of the elementary charge. Vector potentials enter the
// Hamiltonian as the wavevector shift k_A = e A / hbar in 1/nm.

#include <numbers>

namespace qring::units {

inline constexpr double pi = std::numbers::pi;

/// hbar in meV * ps.
inline constexpr double hbar = 0.6582119569;
/// hbar^2 / (2 m_e) in meV * nm^2.
inline constexpr double hbar2_over_2me = 38.09982116;
/// Boltzmann constant in meV / K.
inline constexpr double k_boltzmann = 0.08617333262;

namespace si {
inline constexpr double hbar = 1.054571817e-34;          // J s
inline constexpr double elementary_charge = 1.602176634e-19;  // C
inline constexpr double speed_of_light = 299792458.0;   // m / s
inline constexpr double epsilon0 = 8.8541878128e-12;     // F / m
inline constexpr double mev = 1.602176634e-22;           // J
}  // namespace si

inline constexpr double nm_to_m = 1e-9;
inline constexpr double ps_to_s = 1e-12;
inline constexpr double fs_to_ps = 1e-3;

/// Angular frequency (rad/ps) of an energy quantum given in meV.
constexpr double energy_to_angular(double mev) { return mev / hbar; }

/// Ordinary frequency in THz of an energy quantum given in meV.
constexpr double energy_to_thz(double mev) { return mev / (2.0 * pi * hbar); }

constexpr double thz_to_energy(double thz) { return thz * 2.0 * pi * hbar; }

/// hbar^2 / (2 m*) in meV nm^2 for an effective mass given in units of m_e.
constexpr double kinetic_prefactor(double effective_mass) {
  return hbar2_over_2me / effective_mass;
}

}  // namespace qring::units
