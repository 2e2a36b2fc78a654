#pragma once

// Scenario documents: parsing with defaults and unknown-key rejection,
// canonical echo, provenance hash, CI scaling and dotted-key overrides.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qring/emission.hpp"
#include "qring/grid.hpp"
#include "qring/propagator.hpp"
#include "qring/ring_model.hpp"
#include "qring/vortex_field.hpp"

namespace qring {

enum class RingCalibration { Coefficients, WidthRelation, Oscillator, Transition, Scaled };

struct RingConfig {
  RingCalibration calibration = RingCalibration::Transition;
  double radius = 150.0;             // nm
  double width = 40.0;               // nm
  double a1 = 0.0, a2 = 0.0;         // coefficients mode
  double hbar_omega0 = 0.0;          // oscillator mode, meV
  double transition_energy = 2.5;    // transition mode, meV
  int m_from = 0, m_to = 3;
};

struct StackConfig {
  std::vector<RingConfig> rings;
  double barrier_width = 10.0;
  double barrier_height = 20.0;
  /// Blend width in nm; unset means one Cartesian grid cell.
  std::optional<double> edge_smoothing;
};

struct EigenConfig {
  std::optional<int> m_max;     // unset: sized from the occupied levels
  std::optional<int> n_per_m;   // unset: grown until above the cutoff
  double radial_spacing = 0.1;  // nm
  std::optional<double> rho_max;  // unset: grid extent
  double drift_tolerance = 3e-4;
};

struct PropagationConfig {
  double occupation_cutoff = 1e-4;
  RelaxationModel relaxation = RelaxationModel::Coherence;
  RelaxationSchedule schedule = RelaxationSchedule::Continuous;
  int threads = 0;
  double freeze_threshold = 0.0;
  double norm_tolerance = 1e-6;
  double lanczos_tolerance = 1e-13;
};

struct AnalysisConfig {
  double window = 1.5;           // ps
  double f_min = 0.0, f_max = 5.0;  // THz
  int n_freq = 512;
  double t_step = 0.1;           // ps
  double sample_interval = 0.01;  // ps
  double wavelet_cycles = 6.0;
  std::vector<double> snapshot_times;  // ps
  double frame_interval = 0.0;   // ps, 0 disables density movies
};

struct ComparisonConfig {
  bool enabled = false;
  BeamKind kind = BeamKind::Gaussian;
  Polarization polarization = Polarization::LinearX;
};

struct ScanConfig {
  std::vector<int> m_oam;
  std::vector<double> intensities;  // W/cm^2
  std::string channel = "total";
  double f_lo = 0.5, f_hi = 0.7;    // THz band of the scanned signal
  double time = 8.0;                // ps
};

struct OutputConfig {
  bool checkpoint = false;
  bool radial_profiles = true;
  bool wavelet = true;
};

struct Scenario {
  std::string name = "unnamed";
  std::string description;
  std::string resolution = "paper";  // "paper" or "ci"
  Material material;
  StackConfig stack;
  PulseSpec pulse;
  GridSpec grid;
  EigenConfig eigen;
  PropagationConfig propagation;
  AnalysisConfig analysis;
  ComparisonConfig comparison;
  ScanConfig scan;
  OutputConfig outputs;
  nlohmann::json ci = nlohmann::json::object();  // dotted-key overrides

  [[nodiscard]] RingStack build_stack() const;
  [[nodiscard]] PropagatorOptions propagator_options() const;
  [[nodiscard]] SpectrogramSpec spectrogram_spec() const;
};

/// Parses and validates a document; unknown keys and missing required
/// fields raise ValidationError naming the offending paths.
[[nodiscard]] Scenario parse_scenario(const nlohmann::json& doc);
[[nodiscard]] Scenario parse_scenario_text(const std::string& text);

/// Canonical document with every default made explicit.
[[nodiscard]] nlohmann::json to_json(const Scenario& s);

/// SHA-256 (hex) of the canonical compact dump.
[[nodiscard]] std::string scenario_hash(const Scenario& s);
[[nodiscard]] std::string sha256_hex(const std::string& bytes);

/// Sets a dotted key (e.g. "pulse.m_oam") in a document. The value text
/// is parsed as JSON when possible, otherwise taken as a string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Applies the document's "ci" block and marks it as CI resolution.
[[nodiscard]] nlohmann::json apply_ci_scale(nlohmann::json doc);

/// Directories searched for bundled scenarios: $QRING_SCENARIO_PATH, the
/// source tree and the install prefix.
[[nodiscard]] std::vector<std::filesystem::path> scenario_search_path();
[[nodiscard]] std::vector<std::string> list_bundled_scenarios();

/// Resolves a file path or bundled name, applies CI scaling and overrides.
[[nodiscard]] Scenario load_scenario(const std::string& name_or_path, bool ci_scale = false,
                                     const std::vector<std::string>& overrides = {});

[[nodiscard]] std::string to_string(RingCalibration c);

}  // namespace qring
