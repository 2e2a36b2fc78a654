#pragma once

// Confinement landscape of single and intercalated quantum rings, the
// stationary radial eigenproblem and equilibrium occupations.

#include <cstddef>
#include <limits>
#include <memory>
#include <span>
#include <vector>

namespace qring {

struct Material {
  double effective_mass = 0.067;   // in units of the free-electron mass
  double fermi_energy = 3.3;       // meV
  double temperature = 4.2;        // K
  double relaxation_time = 25.0;   // ps

  void validate() const;
  /// hbar^2 / (2 m*) in meV nm^2.
  [[nodiscard]] double kinetic_prefactor() const;
};

/// Tan-Inkson ring V(rho) = a1/rho^2 + a2 rho^2 - V0 with V0 = 2 sqrt(a1 a2).
/// `width` is the effective ring width used for stack assembly and the
/// dipole integration annulus.
class RingSpec {
 public:
  RingSpec() = default;
  RingSpec(double a1, double a2, double width);

  /// a2 from the width relation drho = sqrt(8 E_F / (m* omega0^2)),
  /// a1 = a2 rho0^4.
  static RingSpec from_width_relation(double radius, double width, const Material& material);
  static RingSpec from_oscillator_energy(double radius, double hbar_omega0, double width,
                                         const Material& material);
  /// Picks hbar*omega0 so that E(n+1, m_to) - E(n, m_from) equals
  /// `transition_energy` (the spacing is independent of n).
  static RingSpec from_transition(double radius, double transition_energy, int m_from, int m_to,
                                  double width, const Material& material);

  [[nodiscard]] double a1() const { return a1_; }
  [[nodiscard]] double a2() const { return a2_; }
  [[nodiscard]] double width() const { return width_; }
  [[nodiscard]] double v0() const;
  /// rho0 = (a1/a2)^(1/4); zero for a quantum dot.
  [[nodiscard]] double mean_radius() const;
  /// hbar*omega0 with omega0 = sqrt(8 a2 / m*).
  [[nodiscard]] double oscillator_energy(const Material& material) const;
  /// Fermi-level width sqrt(8 E_F / (m* omega0^2)) implied by a2.
  [[nodiscard]] double width_relation(const Material& material) const;

  [[nodiscard]] double potential(double rho) const;

  void validate() const;

 private:
  double a1_ = 0.0;   // meV nm^2
  double a2_ = 1.0;   // meV / nm^2
  double width_ = 0.0;
};

/// Rings ordered outermost first. Neighbouring wells are separated by a
/// flat plateau of `barrier_width` at `barrier_height`, centred in the gap
/// between the well edges; outside the plateaus the landscape is the
/// pointwise minimum of the individual ring potentials. Plateau edges are
/// blended with a C1 cubic over `edge_smoothing`.
struct RingStack {
  std::vector<RingSpec> rings;
  double barrier_width = 10.0;    // nm
  double barrier_height = 20.0;   // meV
  double edge_smoothing = 0.0;    // nm

  void validate() const;
  [[nodiscard]] std::size_t size() const { return rings.size(); }
  /// Outer edge of the outermost well, rho_1 + drho_1/2.
  [[nodiscard]] double outer_edge() const;
  /// Inner edge of the innermost well (clamped at 0).
  [[nodiscard]] double inner_edge() const;
};

/// Confinement potential in meV at radius rho (nm). Throws DomainError for
/// rho <= 0.
[[nodiscard]] double potential(const RingStack& stack, double rho);

/// Closed-form Tan-Inkson level.
[[nodiscard]] double analytic_energy(const RingSpec& ring, int n0, int m0, const Material& material);

/// Cell-centred uniform radial grid rho_j = (j + 1/2) h, j = 0..size-1.
class RadialGrid {
 public:
  RadialGrid(double spacing, double rho_max);
  [[nodiscard]] double spacing() const { return h_; }
  [[nodiscard]] std::size_t size() const { return n_; }
  [[nodiscard]] double rho(std::size_t j) const { return (static_cast<double>(j) + 0.5) * h_; }
  [[nodiscard]] double rho_max() const { return h_ * static_cast<double>(n_); }

 private:
  double h_;
  std::size_t n_;
};

/// Radial function R(rho) sampled on a RadialGrid and normalized so that
/// sum_j R_j^2 rho_j h = 1. Interpolation is 4-point Lagrange with the
/// parity R(-rho) = (-1)^m R(rho) used near the origin.
class RadialProfile {
 public:
  RadialProfile() = default;
  RadialProfile(std::shared_ptr<const RadialGrid> grid, std::vector<double> values, int m0);

  [[nodiscard]] double operator()(double rho) const;
  /// dR/drho by differentiating the same interpolant.
  [[nodiscard]] double derivative(double rho) const;
  [[nodiscard]] const RadialGrid& grid() const { return *grid_; }
  [[nodiscard]] std::span<const double> values() const { return values_; }
  [[nodiscard]] double norm_squared() const;
  [[nodiscard]] bool empty() const { return values_.empty(); }

 private:
  [[nodiscard]] double sample(long j) const;

  std::shared_ptr<const RadialGrid> grid_;
  std::vector<double> values_;
  int parity_ = 1;
};

struct Orbital {
  int n0 = 0;
  int m0 = 0;
  double energy = 0.0;       // meV
  double occupation = 0.0;   // [0, 1]
  RadialProfile radial;
};

struct RadialGridSpec {
  double spacing = 0.1;  // nm
  double rho_max = 250.0;  // nm
};

struct EigenSolveOptions {
  /// Relative eigenvalue drift allowed between spacing h and 2h before an
  /// AccuracyError is raised. The drift estimates ~3x the error at h.
  double drift_tolerance = 3e-4;
  bool check_drift = true;
  /// Levels above this energy (meV) are listed but not drift-checked.
  double check_below = std::numeric_limits<double>::infinity();
};

/// Lowest `n_per_m` radial eigenpairs for each m0 in [m_min, m_max], sorted
/// by energy (ties by |m0|, then m0, then n0). n0 counts states within an m0
/// block from zero.
[[nodiscard]] std::vector<Orbital> solve_stationary(const RingStack& stack, const Material& material,
                                                    int m_min, int m_max, int n_per_m,
                                                    const RadialGridSpec& grid,
                                                    const EigenSolveOptions& options = {});

/// Fermi-Dirac occupation; T = 0 is a step with 1/2 at E = E_F.
[[nodiscard]] double fermi_dirac(double energy, const Material& material);

[[nodiscard]] std::vector<Orbital> occupy(std::vector<Orbital> orbitals, const Material& material);

/// Fraction of an orbital's norm inside each well [rho_i - drho_i/2, rho_i + drho_i/2].
[[nodiscard]] std::vector<double> well_weights(const Orbital& orbital, const RingStack& stack);

/// Energy above which Fermi-Dirac occupations drop below `cutoff`.
[[nodiscard]] double occupation_cutoff_energy(const Material& material, double cutoff);

/// Dense tridiagonal eigen-solve backing solve_stationary; exposed for tests.
struct RadialEigenpairs {
  std::vector<double> energies;
  std::vector<std::vector<double>> radial;  // R_j, normalized on rho drho
};
[[nodiscard]] RadialEigenpairs solve_radial(const RingStack& stack, const Material& material, int m0,
                                            int count, const RadialGrid& grid);

}  // namespace qring
