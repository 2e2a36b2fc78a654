#pragma once

// Time evolution of the occupied orbitals under
//   H = c (-i grad - k_A)^2 + V,   c = hbar^2 / 2m*,  k_A = e A / hbar,
// plus relaxation-time kinetics of the occupations.
//
// One step is the symmetric composition
//   [D/4 W/2 D/4] K [D/4 W/2 D/4]
// with D = V + c k_A^2 (position-diagonal), W = i c (k_A.grad + grad.k_A)
// (Hermitian 4th-order stencil, Lanczos exponential) and K = -c lap
// (exact phase in Fourier space). All field terms use the mid-step time.

#include <cstddef>
#include <string>
#include <vector>

#include "qring/fft.hpp"
#include "qring/grid.hpp"
#include "qring/ring_model.hpp"
#include "qring/vortex_field.hpp"

namespace qring {

enum class RelaxationModel {
  /// Coherent part of the ensemble decays toward the equilibrium density.
  Coherence,
  /// f of each propagated orbital relaxes toward its own Fermi-Dirac value.
  Literal,
};
enum class RelaxationSchedule { Continuous, AfterPulse, Off };

[[nodiscard]] RelaxationModel parse_relaxation_model(const std::string& name);
[[nodiscard]] std::string to_string(RelaxationModel model);
[[nodiscard]] RelaxationSchedule parse_relaxation_schedule(const std::string& name);
[[nodiscard]] std::string to_string(RelaxationSchedule schedule);

struct PropagatorOptions {
  int threads = 0;  // 0: hardware concurrency
  int lanczos_max_dim = 20;
  double lanczos_tolerance = 1e-13;
  double step_norm_tolerance = 1e-8;
  double norm_tolerance = 1e-6;
  /// Orbitals whose overlap sqrt(int |psi|^2 f^2) with the beam profile is
  /// below this are advanced by their stationary phase only. 0 disables.
  double freeze_threshold = 0.0;
  double occupation_cutoff = 1e-4;
  RelaxationModel relaxation = RelaxationModel::Coherence;
  RelaxationSchedule schedule = RelaxationSchedule::Continuous;
  /// Largest k_A * dx accepted before the field counts as unresolved.
  double max_phase_per_cell = 0.39269908169872414;  // pi / 8
};

struct OrbitalState {
  int n0 = 0;
  int m0 = 0;
  double energy = 0.0;
  double equilibrium = 0.0;   // f0
  double occupation = 0.0;    // f(t)
  bool frozen = false;
  double embed_norm = 1.0;    // grid norm before renormalization
  double max_norm_drift = 0.0;
  ComplexField psi;
};

struct EvolvingState {
  std::vector<OrbitalState> orbitals;
  std::vector<double> equilibrium_density;  // sum_i f0_i |phi_i|^2
  /// Coherence model: weight carried by the equilibrium density.
  double background = 0.0;
  double time = 0.0;  // ps
  long step_index = 0;
  double absorbed = 0.0;
};

/// f <- target + (f - target) exp(-dt / tau).
[[nodiscard]] double relax_occupation(double f, double target, double dt, double tau);
void relax_occupations(EvolvingState& state, const Material& material, double dt, RelaxationModel model);

/// Pointwise sum_i f_i |psi_i|^2 (+ background * equilibrium density).
[[nodiscard]] std::vector<double> ensemble_density(const EvolvingState& state);
void ensemble_density(const EvolvingState& state, std::vector<double>& out);

class Propagator {
 public:
  Propagator(const GridSpec& grid, RingStack stack, Material material, PulseSpec pulse,
             PropagatorOptions options = {});
  ~Propagator();
  Propagator(const Propagator&) = delete;
  Propagator& operator=(const Propagator&) = delete;

  /// Embeds orbitals with occupation above the cutoff.
  [[nodiscard]] EvolvingState initialize(const std::vector<Orbital>& orbitals) const;

  /// Advances every orbital by dt and relaxes occupations.
  void step(EvolvingState& state);
  void run_until(EvolvingState& state, double t_end);

  [[nodiscard]] const Grid2D& grid() const { return grid_; }
  [[nodiscard]] const std::vector<double>& potential_field() const { return potential_; }
  [[nodiscard]] const PulseSpec& pulse() const { return pulse_; }
  [[nodiscard]] const PropagatorOptions& options() const { return options_; }
  [[nodiscard]] double dt() const { return dt_; }

  /// k_A components (1/nm) on the grid at time t. Returns false if zero.
  bool wavevector_field(double t, std::vector<double>& kx, std::vector<double>& ky) const;

  /// <L_z>/hbar of one orbital field, by spectral differentiation.
  [[nodiscard]] double angular_momentum(const ComplexField& psi) const;
  /// <psi|H0|psi> with H0 = -c lap + V (field free).
  [[nodiscard]] double field_free_energy(const ComplexField& psi) const;
  [[nodiscard]] double norm_squared(const ComplexField& psi) const;
  [[nodiscard]] cplx overlap(const ComplexField& a, const ComplexField& b) const;

 private:
  struct Workspace;
  void advance_orbital(OrbitalState& orb, Workspace& ws) const;
  void apply_w(const cplx* in, cplx* out, Workspace& ws) const;
  void expm_w(cplx* psi, double tau, Workspace& ws) const;
  [[nodiscard]] int thread_count(std::size_t work) const;

  Grid2D grid_;
  RingStack stack_;
  Material material_;
  PulseSpec pulse_;
  PropagatorOptions options_;
  double dt_;
  double c_;
  double k_peak_;
  Fft2D fft_;
  std::vector<double> potential_;
  std::vector<double> kinetic_energy_;  // c |k|^2 in FFT order
  ComplexField kinetic_phase_;          // exp(-i c k^2 dt / hbar) / N
  std::vector<double> absorber_;
  std::vector<double> beam_profile_;    // f(rho) on the grid
  ComplexField mode_;                   // f(rho) e^{i m phi}

  // Per-step shared fields.
  ComplexField quarter_phase_;  // exp(-i D dt / (4 hbar))
  std::vector<double> kx_, ky_;
  bool field_on_ = false;
  bool has_x_ = false, has_y_ = false;

  std::vector<Workspace*> workspaces_;
};

/// Stores orbital fields, occupations and the clock as raw arrays + sidecars.
void save_checkpoint(const EvolvingState& state, const GridSpec& grid, const std::string& dir,
                     const std::string& scenario_hash);
[[nodiscard]] EvolvingState load_checkpoint(const std::string& dir);

}  // namespace qring
