#pragma once

// Ring-resolved dipoles, the time-dependent physical spectrum and Stokes
// parameters of the emitted field toward the z observer.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "qring/fft.hpp"
#include "qring/grid.hpp"
#include "qring/ring_model.hpp"

namespace qring {

/// Uniformly sampled dipole components per channel (rings 1..N, then the
/// whole stack). Units e*nm, or e*nm/ps^2 after second_derivative.
struct DipoleTrace {
  double t0 = 0.0;  // ps
  double dt = 0.0;  // ps
  std::vector<std::string> labels;
  std::vector<int> ring_index;  // 1-based; 0 for the whole stack
  std::vector<std::vector<double>> mx, my;

  [[nodiscard]] std::size_t channels() const { return labels.size(); }
  [[nodiscard]] std::size_t samples() const { return mx.empty() ? 0 : mx.front().size(); }
  [[nodiscard]] double time(std::size_t i) const { return t0 + dt * static_cast<double>(i); }
  void push(const std::vector<double>& x, const std::vector<double>& y);
};

/// Precomputed annulus weights: channel i integrates rho in
/// [rho_i - drho_i/2, rho_i + drho_i/2]; the last channel spans the inner
/// edge of the innermost ring to the outer edge of the outermost ring.
class DipoleIntegrator {
 public:
  DipoleIntegrator(const Grid2D& grid, const RingStack& stack, int oversample = 8);

  [[nodiscard]] DipoleTrace empty_trace(double t0, double dt) const;
  /// Dipole (mx, my) of a density in every channel.
  void measure(std::span<const double> density, std::vector<double>& mx, std::vector<double>& my) const;
  [[nodiscard]] std::size_t channels() const { return wx_.size(); }
  [[nodiscard]] const std::vector<double>& weights(std::size_t channel) const { return w_[channel]; }

 private:
  std::vector<std::string> labels_;
  std::vector<int> ring_index_;
  std::vector<std::vector<double>> w_, wx_, wy_;
};

[[nodiscard]] DipoleTrace ring_dipoles(const std::vector<std::vector<double>>& density_frames, const Grid2D& grid,
                                       const RingStack& stack, double t0, double dt);

/// Centred 5-point second derivative; one-sided 5-point stencils at the
/// two samples nearest each end. Throws ValidationError for < 5 samples.
[[nodiscard]] std::vector<double> second_derivative(std::span<const double> x, double dt);
[[nodiscard]] DipoleTrace second_derivative(const DipoleTrace& trace);

/// G(t) = (2/pi)^{1/4} dT^{-1/2} exp(-t^2/dT^2); int G^2 dt = 1.
struct DetectionWindow {
  double width = 1.5;  // ps
  [[nodiscard]] double operator()(double t) const;
  /// Half-width of the support used in sums.
  [[nodiscard]] double support() const { return 4.0 * width; }
  /// Rows whose +-2 dT neighbourhood leaves the trace are flagged as edge
  /// (the window energy beyond 2 dT is below 1e-4).
  [[nodiscard]] double edge_reach() const { return 2.0 * width; }
};

/// Positive-frequency part (time dependence e^{-i omega t}, omega > 0) of
/// a real uniformly sampled signal, from a zero-padded global DFT; the zero
/// frequency and Nyquist bins carry weight 1/2.
[[nodiscard]] std::vector<cplx> analytic_signal(std::span<const double> a);

struct FilteredValue {
  cplx value;
  bool edge = false;  // window support reached past the trace
};

/// int dt' a+(t') G(t - t') e^{+i omega t'} by direct summation; omega in rad/ps.
[[nodiscard]] FilteredValue filtered_field(std::span<const cplx> a_plus, double t0, double dt,
                                           const DetectionWindow& window, double omega, double t);

struct SpectrogramSpec {
  double f_min = 0.0;     // THz
  double f_max = 5.0;     // THz
  int n_freq = 512;
  double t_min = 0.0;     // ps
  double t_max = 15.0;    // ps
  double t_step = 0.1;    // ps
  double window = 1.5;    // ps
  void validate() const;
  [[nodiscard]] std::vector<double> frequencies() const;  // THz
  [[nodiscard]] std::vector<double> times() const;        // ps
};

/// Arrays indexed [time][frequency], row-major, time-major.
struct Spectrogram {
  std::vector<double> times;        // ps
  std::vector<double> frequencies;  // THz
  std::vector<double> s0, s1, s2, s3;
  std::vector<unsigned char> edge;  // per time row
  double window = 0.0;
  int ring_index = 0;
  std::string label;

  [[nodiscard]] std::size_t nt() const { return times.size(); }
  [[nodiscard]] std::size_t nf() const { return frequencies.size(); }
  [[nodiscard]] std::size_t index(std::size_t it, std::size_t jf) const { return it * nf() + jf; }
};

/// K = 1 / (6 pi^2 eps0 c^3) in SI.
[[nodiscard]] double stokes_prefactor();

/// Stokes spectrogram of one channel from mu'' components (e*nm/ps^2).
[[nodiscard]] Spectrogram stokes(std::span<const double> ax, std::span<const double> ay, double t0, double dt,
                                 const SpectrogramSpec& spec);
[[nodiscard]] std::vector<Spectrogram> stokes(const DipoleTrace& accel, const SpectrogramSpec& spec);

/// Constant-Q Morlet analog of S0 (same unit-energy Gaussian kernels with a
/// frequency-dependent width sqrt(2) pi cycles / (3 omega)); row-major
/// [time][frequency]; the zero-frequency column is left at 0.
[[nodiscard]] std::vector<double> wavelet_check(std::span<const double> ax, std::span<const double> ay, double t0,
                                                double dt, const SpectrogramSpec& spec, double cycles = 6.0);

/// Pearson correlation of two arrays after each is normalized to its
/// maximum, restricted to entries where mask is nonzero.
[[nodiscard]] double normalized_correlation(std::span<const double> a, std::span<const double> b,
                                            std::span<const unsigned char> mask);

struct SpectrogramPeak {
  double time = 0.0;
  double frequency = 0.0;  // THz
  double value = 0.0;
};
[[nodiscard]] SpectrogramPeak peak(const Spectrogram& s, bool skip_edges = true, double f_min = 0.0);

/// S0 integrated over [f_lo, f_hi] for every time row.
[[nodiscard]] std::vector<double> band_power(const Spectrogram& s, double f_lo, double f_hi);

/// D_zz = -int rho~ rho^2 dA for a planar density.
[[nodiscard]] double quadrupole_moment(std::span<const double> density, const Grid2D& grid);

struct QuadrupoleDiagnostic {
  std::vector<double> dzz;  // e nm^2
  double mean = 0.0;
  double amplitude = 0.0;   // (max - min) / 2
};
[[nodiscard]] QuadrupoleDiagnostic quadrupole_diagnostic(const std::vector<double>& dzz_samples);

}  // namespace qring
