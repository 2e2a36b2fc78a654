#include "qring/scenario.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "qring/error.hpp"

namespace qring {

using nlohmann::json;

namespace {

std::string join_path(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

// Collects problems across the whole document so one run reports them all.
struct Problems {
  std::vector<std::string> missing;
  std::vector<std::string> unknown;
  std::vector<std::string> invalid;

  void raise_if_any() const {
    if (missing.empty() && unknown.empty() && invalid.empty()) return;
    std::ostringstream os;
    os << "invalid scenario";
    auto list = [&os](const char* what, const std::vector<std::string>& items) {
      if (items.empty()) return;
      os << "; " << what << ":";
      for (const auto& i : items) os << " " << i;
    };
    list("missing required fields", missing);
    list("unknown keys", unknown);
    list("bad values", invalid);
    throw ValidationError(os.str());
  }
};

class Section {
 public:
  Section(const json& node, std::string path, Problems& problems)
      : node_(node), path_(std::move(path)), problems_(problems) {
    if (!node_.is_object()) {
      problems_.invalid.push_back(path_.empty() ? "<root> (expected object)" : path_ + " (expected object)");
      valid_ = false;
    }
  }

  ~Section() {
    if (!valid_) return;
    for (const auto& [key, value] : node_.items()) {
      if (!used_.count(key)) problems_.unknown.push_back(join_path(path_, key));
    }
  }
  Section(const Section&) = delete;
  Section& operator=(const Section&) = delete;

  bool has(const std::string& key) {
    used_.insert(key);
    return valid_ && node_.contains(key) && !node_.at(key).is_null();
  }

  template <class T>
  void get(const std::string& key, T& out) {
    if (!has(key)) return;
    convert(key, out);
  }

  template <class T>
  void require(const std::string& key, T& out) {
    if (!has(key)) {
      problems_.missing.push_back(join_path(path_, key));
      return;
    }
    convert(key, out);
  }

  template <class T>
  void get_optional(const std::string& key, std::optional<T>& out) {
    if (!has(key)) return;
    T v{};
    if (convert(key, v)) out = v;
  }

  const json& child(const std::string& key) {
    used_.insert(key);
    return node_.at(key);
  }
  [[nodiscard]] std::string path(const std::string& key) const { return join_path(path_, key); }
  Problems& problems() { return problems_; }

 private:
  template <class T>
  bool convert(const std::string& key, T& out) {
    const json& v = node_.at(key);
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw std::invalid_argument("expected boolean");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw std::invalid_argument("expected integer");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw std::invalid_argument("expected number");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw std::invalid_argument("expected string");
      }
      out = v.get<T>();
      return true;
    } catch (const std::exception& e) {
      problems_.invalid.push_back(join_path(path_, key) + " (" + e.what() + ")");
      return false;
    }
  }

  const json& node_;
  std::string path_;
  Problems& problems_;
  std::set<std::string> used_;
  bool valid_ = true;
};

template <class Enum, class Parser>
void get_enum(Section& s, const std::string& key, Enum& out, Parser parse) {
  std::string name;
  if (!s.has(key)) return;
  s.get(key, name);
  try {
    out = parse(name);
  } catch (const Error& e) {
    s.problems().invalid.push_back(s.path(key) + " (" + e.what() + ")");
  }
}

RingCalibration parse_calibration(const std::string& name) {
  if (name == "coefficients") return RingCalibration::Coefficients;
  if (name == "width_relation") return RingCalibration::WidthRelation;
  if (name == "oscillator") return RingCalibration::Oscillator;
  if (name == "transition") return RingCalibration::Transition;
  if (name == "scaled") return RingCalibration::Scaled;
  throw ValidationError("unknown ring calibration '" + name + "'");
}

void parse_ring(const json& node, const std::string& path, RingConfig& r, Problems& p) {
  Section s(node, path, p);
  get_enum(s, "calibration", r.calibration, parse_calibration);
  s.require("radius", r.radius);
  s.require("width", r.width);
  switch (r.calibration) {
    case RingCalibration::Coefficients:
      s.require("a1", r.a1);
      s.require("a2", r.a2);
      break;
    case RingCalibration::Oscillator:
      s.require("hbar_omega0", r.hbar_omega0);
      break;
    case RingCalibration::Transition:
      s.get("transition_energy", r.transition_energy);
      s.get("m_from", r.m_from);
      s.get("m_to", r.m_to);
      break;
    case RingCalibration::WidthRelation:
    case RingCalibration::Scaled:
      break;
  }
}

void parse_document(const json& doc, Scenario& sc, Problems& p) {
  Section root(doc, "", p);
  root.get("name", sc.name);
  root.get("description", sc.description);
  root.get("resolution", sc.resolution);
  if (sc.resolution != "paper" && sc.resolution != "ci") p.invalid.push_back("resolution (paper or ci)");

  if (root.has("material")) {
    Section s(root.child("material"), "material", p);
    s.get("effective_mass", sc.material.effective_mass);
    s.get("fermi_energy", sc.material.fermi_energy);
    s.get("temperature", sc.material.temperature);
    s.get("relaxation_time", sc.material.relaxation_time);
  }

  if (!root.has("stack")) {
    p.missing.push_back("stack");
  } else {
    Section s(root.child("stack"), "stack", p);
    if (!s.has("rings")) {
      p.missing.push_back("stack.rings");
    } else {
      const json& rings = s.child("rings");
      if (!rings.is_array() || rings.empty()) {
        p.invalid.push_back("stack.rings (expected non-empty array)");
      } else {
        for (std::size_t i = 0; i < rings.size(); ++i) {
          RingConfig r;
          parse_ring(rings[i], "stack.rings[" + std::to_string(i) + "]", r, p);
          sc.stack.rings.push_back(r);
        }
      }
    }
    s.get("barrier_width", sc.stack.barrier_width);
    s.get("barrier_height", sc.stack.barrier_height);
    if (s.has("edge_smoothing")) {
      const json& v = s.child("edge_smoothing");
      if (v.is_string() && v.get<std::string>() == "cell") {
        sc.stack.edge_smoothing.reset();
      } else if (v.is_number()) {
        sc.stack.edge_smoothing = v.get<double>();
      } else {
        p.invalid.push_back("stack.edge_smoothing (number or \"cell\")");
      }
    }
  }

  if (!root.has("pulse")) {
    p.missing.push_back("pulse");
  } else {
    Section s(root.child("pulse"), "pulse", p);
    auto& pu = sc.pulse;
    if (!s.has("kind")) p.missing.push_back("pulse.kind");
    get_enum(s, "kind", pu.kind, [](const std::string& n) { return parse_beam_kind(n); });
    if (pu.kind != BeamKind::Gaussian) {
      s.require("m_oam", pu.m_oam);
    } else {
      s.get("m_oam", pu.m_oam);
    }
    s.get("p", pu.p);
    s.require("photon_energy", pu.photon_energy);
    s.require("peak_intensity", pu.peak_intensity);
    s.get("waist", pu.waist);
    s.get("spot_radius", pu.spot_radius);
    s.get("n_cycles", pu.n_cycles);
    get_enum(s, "polarization", pu.polarization, [](const std::string& n) { return parse_polarization(n); });
    s.get("carrier_envelope_phase", pu.carrier_envelope_phase);
    s.get("coupling_scale", pu.coupling_scale);
  }

  if (root.has("grid")) {
    Section s(root.child("grid"), "grid", p);
    s.get("nx", sc.grid.nx);
    s.get("ny", sc.grid.ny);
    s.get("extent", sc.grid.extent);
    s.get("dt_fs", sc.grid.dt);
    s.get("duration", sc.grid.duration);
    s.get("absorber_width", sc.grid.absorber_width);
  }

  if (root.has("eigensolver")) {
    Section s(root.child("eigensolver"), "eigensolver", p);
    s.get_optional("m_max", sc.eigen.m_max);
    s.get_optional("n_per_m", sc.eigen.n_per_m);
    s.get("radial_spacing", sc.eigen.radial_spacing);
    s.get_optional("rho_max", sc.eigen.rho_max);
    s.get("drift_tolerance", sc.eigen.drift_tolerance);
  }

  if (root.has("propagation")) {
    Section s(root.child("propagation"), "propagation", p);
    auto& pr = sc.propagation;
    s.get("occupation_cutoff", pr.occupation_cutoff);
    get_enum(s, "relaxation", pr.relaxation, parse_relaxation_model);
    get_enum(s, "schedule", pr.schedule, parse_relaxation_schedule);
    s.get("threads", pr.threads);
    s.get("freeze_threshold", pr.freeze_threshold);
    s.get("norm_tolerance", pr.norm_tolerance);
    s.get("lanczos_tolerance", pr.lanczos_tolerance);
  }

  if (root.has("analysis")) {
    Section s(root.child("analysis"), "analysis", p);
    auto& a = sc.analysis;
    s.get("window", a.window);
    s.get("f_min", a.f_min);
    s.get("f_max", a.f_max);
    s.get("n_freq", a.n_freq);
    s.get("t_step", a.t_step);
    s.get("sample_interval", a.sample_interval);
    s.get("wavelet_cycles", a.wavelet_cycles);
    s.get("snapshot_times", a.snapshot_times);
    s.get("frame_interval", a.frame_interval);
  }

  if (root.has("comparison")) {
    Section s(root.child("comparison"), "comparison", p);
    s.get("enabled", sc.comparison.enabled);
    get_enum(s, "kind", sc.comparison.kind, [](const std::string& n) { return parse_beam_kind(n); });
    get_enum(s, "polarization", sc.comparison.polarization,
             [](const std::string& n) { return parse_polarization(n); });
  }

  if (root.has("scan")) {
    Section s(root.child("scan"), "scan", p);
    s.get("m_oam", sc.scan.m_oam);
    s.get("intensities", sc.scan.intensities);
    s.get("channel", sc.scan.channel);
    s.get("f_lo", sc.scan.f_lo);
    s.get("f_hi", sc.scan.f_hi);
    s.get("time", sc.scan.time);
  }

  if (root.has("outputs")) {
    Section s(root.child("outputs"), "outputs", p);
    s.get("checkpoint", sc.outputs.checkpoint);
    s.get("radial_profiles", sc.outputs.radial_profiles);
    s.get("wavelet", sc.outputs.wavelet);
  }

  if (root.has("ci")) {
    const json& ci = root.child("ci");
    if (!ci.is_object()) {
      p.invalid.push_back("ci (expected object of dotted keys)");
    } else {
      sc.ci = ci;
    }
  }
}

void check_values(const Scenario& sc, Problems& p) {
  auto guard = [&p](const char* what, auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      p.invalid.push_back(std::string(what) + " (" + e.what() + ")");
    }
  };
  guard("material", [&] { sc.material.validate(); });
  guard("pulse", [&] {
    PulseSpec pu = sc.pulse;
    pu.normalize();
  });
  guard("grid", [&] { sc.grid.validate(); });
  guard("stack", [&] { sc.build_stack().validate(); });
  guard("analysis", [&] { sc.spectrogram_spec().validate(); });
  if (sc.analysis.sample_interval <= 0.0) p.invalid.push_back("analysis.sample_interval (must be > 0)");
  if (sc.eigen.radial_spacing <= 0.0) p.invalid.push_back("eigensolver.radial_spacing (must be > 0)");
  if (sc.propagation.occupation_cutoff <= 0.0 || sc.propagation.occupation_cutoff >= 1.0)
    p.invalid.push_back("propagation.occupation_cutoff (in (0, 1))");
  for (double I : sc.scan.intensities)
    if (!(I > 0.0)) p.invalid.push_back("scan.intensities (must be > 0)");
}

json parse_value_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
    return json(text);
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read scenario file " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

std::string to_string(RingCalibration c) {
  switch (c) {
    case RingCalibration::Coefficients: return "coefficients";
    case RingCalibration::WidthRelation: return "width_relation";
    case RingCalibration::Oscillator: return "oscillator";
    case RingCalibration::Transition: return "transition";
    case RingCalibration::Scaled: return "scaled";
  }
  return "transition";
}

RingStack Scenario::build_stack() const {
  RingStack st;
  st.barrier_width = stack.barrier_width;
  st.barrier_height = stack.barrier_height;
  st.edge_smoothing = stack.edge_smoothing.value_or(grid.dx());
  double ref_radius = 0.0, ref_omega = 0.0;
  for (std::size_t i = 0; i < stack.rings.size(); ++i) {
    const auto& r = stack.rings[i];
    RingSpec spec;
    switch (r.calibration) {
      case RingCalibration::Coefficients: spec = RingSpec(r.a1, r.a2, r.width); break;
      case RingCalibration::WidthRelation:
        spec = RingSpec::from_width_relation(r.radius, r.width, material);
        break;
      case RingCalibration::Oscillator:
        spec = RingSpec::from_oscillator_energy(r.radius, r.hbar_omega0, r.width, material);
        break;
      case RingCalibration::Transition:
        spec = RingSpec::from_transition(r.radius, r.transition_energy, r.m_from, r.m_to, r.width, material);
        break;
      case RingCalibration::Scaled:
        if (i == 0) throw ValidationError("the outermost ring cannot use the scaled calibration");
        spec = RingSpec::from_oscillator_energy(r.radius, ref_omega * ref_radius / r.radius, r.width, material);
        break;
    }
    if (i == 0) {
      ref_radius = spec.mean_radius() > 0.0 ? spec.mean_radius() : r.radius;
      ref_omega = spec.oscillator_energy(material);
    }
    st.rings.push_back(spec);
  }
  return st;
}

PropagatorOptions Scenario::propagator_options() const {
  PropagatorOptions o;
  o.threads = propagation.threads;
  o.occupation_cutoff = propagation.occupation_cutoff;
  o.relaxation = propagation.relaxation;
  o.schedule = propagation.schedule;
  o.freeze_threshold = propagation.freeze_threshold;
  o.norm_tolerance = propagation.norm_tolerance;
  o.lanczos_tolerance = propagation.lanczos_tolerance;
  return o;
}

SpectrogramSpec Scenario::spectrogram_spec() const {
  SpectrogramSpec s;
  s.f_min = analysis.f_min;
  s.f_max = analysis.f_max;
  s.n_freq = analysis.n_freq;
  s.t_min = 0.0;
  s.t_max = grid.duration;
  s.t_step = analysis.t_step;
  s.window = analysis.window;
  return s;
}

Scenario parse_scenario(const json& doc) {
  Scenario sc;
  Problems p;
  parse_document(doc, sc, p);
  p.raise_if_any();
  sc.pulse.normalize();
  check_values(sc, p);
  p.raise_if_any();
  return sc;
}

Scenario parse_scenario_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("scenario is not valid JSON: ") + e.what());
  }
  return parse_scenario(doc);
}

json to_json(const Scenario& s) {
  json rings = json::array();
  for (const auto& r : s.stack.rings) {
    json j{{"calibration", to_string(r.calibration)}, {"radius", r.radius}, {"width", r.width}};
    switch (r.calibration) {
      case RingCalibration::Coefficients: j["a1"] = r.a1; j["a2"] = r.a2; break;
      case RingCalibration::Oscillator: j["hbar_omega0"] = r.hbar_omega0; break;
      case RingCalibration::Transition:
        j["transition_energy"] = r.transition_energy;
        j["m_from"] = r.m_from;
        j["m_to"] = r.m_to;
        break;
      default: break;
    }
    rings.push_back(j);
  }
  auto opt = [](const auto& o) { return o ? json(*o) : json(nullptr); };
  json stack{{"rings", rings},
             {"barrier_width", s.stack.barrier_width},
             {"barrier_height", s.stack.barrier_height},
             {"edge_smoothing", s.stack.edge_smoothing ? json(*s.stack.edge_smoothing) : json("cell")}};
  const auto& pu = s.pulse;
  json pulse{{"kind", std::string(to_string(pu.kind))},
             {"m_oam", pu.m_oam},
             {"p", pu.p},
             {"photon_energy", pu.photon_energy},
             {"waist", pu.waist},
             {"spot_radius", pu.spot_radius},
             {"peak_intensity", pu.peak_intensity},
             {"n_cycles", pu.n_cycles},
             {"polarization", std::string(to_string(pu.polarization))},
             {"carrier_envelope_phase", pu.carrier_envelope_phase},
             {"coupling_scale", pu.coupling_scale}};
  json out{
      {"name", s.name},
      {"description", s.description},
      {"resolution", s.resolution},
      {"material",
       {{"effective_mass", s.material.effective_mass},
        {"fermi_energy", s.material.fermi_energy},
        {"temperature", s.material.temperature},
        {"relaxation_time", s.material.relaxation_time}}},
      {"stack", stack},
      {"pulse", pulse},
      {"grid",
       {{"nx", s.grid.nx},
        {"ny", s.grid.ny},
        {"extent", s.grid.extent},
        {"dt_fs", s.grid.dt},
        {"duration", s.grid.duration},
        {"absorber_width", s.grid.absorber_width}}},
      {"eigensolver",
       {{"m_max", opt(s.eigen.m_max)},
        {"n_per_m", opt(s.eigen.n_per_m)},
        {"radial_spacing", s.eigen.radial_spacing},
        {"rho_max", opt(s.eigen.rho_max)},
        {"drift_tolerance", s.eigen.drift_tolerance}}},
      {"propagation",
       {{"occupation_cutoff", s.propagation.occupation_cutoff},
        {"relaxation", to_string(s.propagation.relaxation)},
        {"schedule", to_string(s.propagation.schedule)},
        {"threads", s.propagation.threads},
        {"freeze_threshold", s.propagation.freeze_threshold},
        {"norm_tolerance", s.propagation.norm_tolerance},
        {"lanczos_tolerance", s.propagation.lanczos_tolerance}}},
      {"analysis",
       {{"window", s.analysis.window},
        {"f_min", s.analysis.f_min},
        {"f_max", s.analysis.f_max},
        {"n_freq", s.analysis.n_freq},
        {"t_step", s.analysis.t_step},
        {"sample_interval", s.analysis.sample_interval},
        {"wavelet_cycles", s.analysis.wavelet_cycles},
        {"snapshot_times", s.analysis.snapshot_times},
        {"frame_interval", s.analysis.frame_interval}}},
      {"comparison",
       {{"enabled", s.comparison.enabled},
        {"kind", std::string(to_string(s.comparison.kind))},
        {"polarization", std::string(to_string(s.comparison.polarization))}}},
      {"scan",
       {{"m_oam", s.scan.m_oam},
        {"intensities", s.scan.intensities},
        {"channel", s.scan.channel},
        {"f_lo", s.scan.f_lo},
        {"f_hi", s.scan.f_hi},
        {"time", s.scan.time}}},
      {"outputs",
       {{"checkpoint", s.outputs.checkpoint},
        {"radial_profiles", s.outputs.radial_profiles},
        {"wavelet", s.outputs.wavelet}}},
      {"ci", s.ci},
  };
  return out;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

std::string scenario_hash(const Scenario& s) {
  json j = to_json(s);
  // Labels do not change the physics.
  j.erase("name");
  j.erase("description");
  j.erase("ci");
  return sha256_hex(j.dump());
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ValidationError("override '" + assignment + "' is not of the form key=value");
  const std::string key = assignment.substr(0, eq);
  const json value = parse_value_text(assignment.substr(eq + 1));

  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ValidationError("override key '" + key + "' has an empty component");
    // "rings[1]" style index into an array.
    std::optional<std::size_t> index;
    if (const auto lb = part.find('['); lb != std::string::npos) {
      const auto rb = part.find(']', lb);
      if (rb == std::string::npos) throw ValidationError("override key '" + key + "' has an unclosed index");
      index = std::stoul(part.substr(lb + 1, rb - lb - 1));
      part = part.substr(0, lb);
    }
    if (!node->is_object()) throw ValidationError("override key '" + key + "' walks into a non-object");
    json& next = (*node)[part];
    json* target = &next;
    if (index) {
      if (!next.is_array() || *index >= next.size())
        throw ValidationError("override key '" + key + "' indexes past the array");
      target = &next[*index];
    }
    if (dot == std::string::npos) {
      *target = value;
      return;
    }
    if (target->is_null()) *target = json::object();
    node = target;
    start = dot + 1;
  }
}

json apply_ci_scale(json doc) {
  if (doc.contains("ci") && doc["ci"].is_object()) {
    for (const auto& [key, value] : doc["ci"].items()) apply_override(doc, key + "=" + value.dump());
  }
  doc["resolution"] = "ci";
  return doc;
}

std::vector<std::filesystem::path> scenario_search_path() {
  std::vector<std::filesystem::path> dirs;
  if (const char* env = std::getenv("QRING_SCENARIO_PATH"); env && *env) {
    std::string s(env);
    std::size_t start = 0;
    while (start <= s.size()) {
      const auto colon = s.find(':', start);
      const auto part = s.substr(start, colon == std::string::npos ? std::string::npos : colon - start);
      if (!part.empty()) dirs.emplace_back(part);
      if (colon == std::string::npos) break;
      start = colon + 1;
    }
  }
  dirs.emplace_back(QRING_BUNDLED_SCENARIO_DIR);
  dirs.emplace_back(QRING_INSTALLED_SCENARIO_DIR);
  return dirs;
}

std::vector<std::string> list_bundled_scenarios() {
  std::set<std::string> names;
  for (const auto& dir : scenario_search_path()) {
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) continue;
    for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
      if (entry.path().extension() == ".json") names.insert(entry.path().stem().string());
    }
  }
  return {names.begin(), names.end()};
}

Scenario load_scenario(const std::string& name_or_path, bool ci_scale, const std::vector<std::string>& overrides) {
  std::filesystem::path path(name_or_path);
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    path.clear();
    for (const auto& dir : scenario_search_path()) {
      const auto candidate = dir / (name_or_path + ".json");
      if (std::filesystem::is_regular_file(candidate, ec)) {
        path = candidate;
        break;
      }
    }
    if (path.empty()) throw ValidationError("no scenario file or bundled scenario named '" + name_or_path + "'");
  }
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + " is not valid JSON: " + e.what());
  }
  if (ci_scale) doc = apply_ci_scale(std::move(doc));
  for (const auto& o : overrides) apply_override(doc, o);
  return parse_scenario(doc);
}

}  // namespace qring
