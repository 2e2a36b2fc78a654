#pragma once

// End-to-end runs: eigensolve -> simulate -> spectrum -> stokes, plus the
// first-order line oracle and intensity/charge scans. The compute functions
// are usable on their own; run_stage() also writes the artifact tree.

#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "qring/emission.hpp"
#include "qring/scenario.hpp"
#include "qring/selection_oracle.hpp"

namespace qring {

enum class Stage { Eigensolve, Simulate, Spectrum, Stokes, Oracle, Scan };
[[nodiscard]] Stage parse_stage(const std::string& name);
[[nodiscard]] std::string to_string(Stage stage);

using LogFn = std::function<void(const std::string&)>;

/// Occupied levels of the scenario's stack. The m range and the number of
/// radial states per m grow until the first unlisted level lies above the
/// occupation cutoff energy, unless fixed in the scenario.
[[nodiscard]] std::vector<Orbital> eigensolve(const Scenario& sc);

struct DensitySnapshot {
  double time = 0.0;               // ps
  std::vector<double> density;     // [ny][nx], electrons / nm^2
  std::vector<double> harmonics;   // |c_k| of the angular profile on ring 1, k = 0..
  int minima = 0;                  // local minima of the smoothed angular profile
};

struct SimulationResult {
  DipoleTrace dipoles;             // e nm
  std::vector<DensitySnapshot> snapshots;
  std::vector<double> frame_times;
  std::vector<std::vector<double>> frames;
  std::vector<double> dzz_times, dzz;  // e nm^2
  EvolvingState final_state;
  double max_norm_drift = 0.0;
  long steps = 0;
};

struct SimulateOptions {
  /// Stop early (ps); negative means the scenario duration.
  double t_end = -1.0;
  bool keep_final_state = false;
  LogFn log;
};

[[nodiscard]] SimulationResult simulate(const Scenario& sc, const PulseSpec& pulse,
                                        const std::vector<Orbital>& orbitals, const SimulateOptions& options = {});

/// Angular structure of a density on the annulus [lo, hi]: magnitudes |c_k|
/// (k = 0..kmax) of the radially integrated profile and the number of local
/// minima of the profile rebuilt from k = 1..kmax.
struct AngularAnalysis {
  std::vector<double> magnitude;
  int minima = 0;
};
[[nodiscard]] AngularAnalysis angular_analysis(std::span<const double> density, const Grid2D& grid, double lo,
                                               double hi, int kmax = 12, int bins = 360);

struct SpectralResult {
  std::vector<Spectrogram> stokes;       // one per channel
  std::vector<double> wavelet;           // total channel, same layout as S0
};
[[nodiscard]] SpectralResult analyze(const Scenario& sc, const DipoleTrace& dipoles, bool with_wavelet);

/// Dominant line of a spectrogram and its polarization, away from edges.
struct LineReport {
  std::string channel;
  int ring_index = 0;
  double time = 0.0, frequency = 0.0, energy = 0.0;  // ps, THz, meV
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  double degree = 0.0;                                // sqrt(S1^2+S2^2+S3^2)/S0
};
[[nodiscard]] LineReport dominant_line(const Spectrogram& s, double f_min = 0.05);

struct ScanPoint {
  int m_oam = 0;
  double intensity = 0.0;
  double signal = 0.0;  // band-integrated S0 at scan.time
};

struct RunOptions {
  LogFn log;
  bool force = false;  // ignore reusable dipoles
};

/// Runs `stage` (and any prerequisite) writing artifacts under `out`.
/// Returns the path of the run manifest.
std::filesystem::path run_stage(Stage stage, const Scenario& sc, const std::filesystem::path& out,
                                const RunOptions& options = {});

/// Intensity x charge scan of the band signal; also written by run_stage.
[[nodiscard]] std::vector<ScanPoint> scan(const Scenario& sc, const std::vector<Orbital>& orbitals,
                                          const LogFn& log = {});

/// Coefficient of determination of a least-squares line through (x, y).
[[nodiscard]] double linear_r2(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace qring
