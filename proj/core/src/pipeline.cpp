#include "qring/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "qring/array_io.hpp"
#include "qring/error.hpp"
#include "qring/propagator.hpp"
#include "qring/units.hpp"

namespace qring {

using nlohmann::json;
namespace fs = std::filesystem;

Stage parse_stage(const std::string& name) {
  static const std::map<std::string, Stage> table{{"eigensolve", Stage::Eigensolve}, {"simulate", Stage::Simulate},
                                                  {"spectrum", Stage::Spectrum},     {"stokes", Stage::Stokes},
                                                  {"oracle", Stage::Oracle},         {"scan", Stage::Scan}};
  const auto it = table.find(name);
  if (it == table.end()) throw ValidationError("unknown stage '" + name + "'");
  return it->second;
}

std::string to_string(Stage stage) {
  switch (stage) {
    case Stage::Eigensolve: return "eigensolve";
    case Stage::Simulate: return "simulate";
    case Stage::Spectrum: return "spectrum";
    case Stage::Stokes: return "stokes";
    case Stage::Oracle: return "oracle";
    case Stage::Scan: return "scan";
  }
  return "eigensolve";
}

namespace {

void say(const LogFn& log, const std::string& msg) {
  if (log) log(msg);
}

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

RadialGridSpec radial_grid(const Scenario& sc) {
  RadialGridSpec g;
  g.spacing = sc.eigen.radial_spacing;
  g.rho_max = sc.eigen.rho_max.value_or(sc.grid.extent);
  return g;
}

// Highest level needed: every state that can be occupied plus room for
// two photons above the occupation cutoff.
double level_ceiling(const Scenario& sc) {
  return occupation_cutoff_energy(sc.material, sc.propagation.occupation_cutoff) + 2.0 * sc.pulse.photon_energy;
}

}  // namespace

std::vector<Orbital> eigensolve(const Scenario& sc) {
  const RingStack stack = sc.build_stack();
  const RadialGridSpec rg = radial_grid(sc);
  EigenSolveOptions opts;
  opts.drift_tolerance = sc.eigen.drift_tolerance;
  const double ceiling = level_ceiling(sc);
  opts.check_below = ceiling;

  int m_max = 0;
  if (sc.eigen.m_max) {
    m_max = *sc.eigen.m_max;
  } else {
    // Lowest level grows with |m|; stop at the first m entirely above the ceiling.
    while (true) {
      const auto probe = solve_stationary(stack, sc.material, m_max, m_max, 1, rg, opts);
      if (probe.front().energy > ceiling) break;
      if (++m_max > 400) throw SolverError("angular momentum range did not close below m0 = 400");
    }
  }
  if (m_max < 0) throw ValidationError("eigensolver.m_max must be >= 0");

  int n_per_m = sc.eigen.n_per_m.value_or(2);
  std::vector<Orbital> levels;
  while (true) {
    levels = solve_stationary(stack, sc.material, -m_max, m_max, n_per_m, rg, opts);
    if (sc.eigen.n_per_m) break;
    // Every m block must reach above the ceiling.
    std::map<int, double> top;
    for (const auto& o : levels) top[o.m0] = std::max(top.count(o.m0) ? top[o.m0] : -1e300, o.energy);
    bool closed = true;
    for (const auto& [m, e] : top) closed = closed && e > ceiling;
    if (closed) break;
    if (++n_per_m > 200) throw SolverError("radial level count did not close below 200 per m0");
  }
  std::vector<Orbital> kept;
  for (auto& o : levels)
    if (o.energy <= ceiling) kept.push_back(std::move(o));
  return occupy(std::move(kept), sc.material);
}

AngularAnalysis angular_analysis(std::span<const double> density, const Grid2D& grid, double lo, double hi, int kmax,
                                 int bins) {
  if (density.size() != grid.size()) throw ValidationError("density does not match the grid");
  if (kmax < 1 || bins < 4 * kmax) throw ValidationError("angular analysis needs kmax >= 1 and bins >= 4 kmax");
  const auto& spec = grid.spec();
  auto sample = [&](double x, double y) {
    const double fx = (x + spec.extent) / spec.dx() - 0.5;
    const double fy = (y + spec.extent) / spec.dy() - 0.5;
    const int i = std::clamp(static_cast<int>(std::floor(fx)), 0, spec.nx - 2);
    const int j = std::clamp(static_cast<int>(std::floor(fy)), 0, spec.ny - 2);
    const double tx = fx - i, ty = fy - j;
    const auto at = [&](int a, int b) { return density[static_cast<std::size_t>(b) * spec.nx + a]; };
    return (1 - tx) * (1 - ty) * at(i, j) + tx * (1 - ty) * at(i + 1, j) + (1 - tx) * ty * at(i, j + 1) +
           tx * ty * at(i + 1, j + 1);
  };
  const int nr = std::max(8, static_cast<int>(std::ceil((hi - lo) / (0.25 * spec.dx()))));
  const double dr = (hi - lo) / nr;
  std::vector<double> profile(bins, 0.0);
  for (int b = 0; b < bins; ++b) {
    const double phi = 2.0 * units::pi * (b + 0.5) / bins;
    for (int r = 0; r < nr; ++r) {
      const double rho = lo + (r + 0.5) * dr;
      profile[b] += sample(rho * std::cos(phi), rho * std::sin(phi)) * rho * dr;
    }
  }
  std::vector<std::complex<double>> c(kmax + 1);
  AngularAnalysis a;
  a.magnitude.resize(kmax + 1);
  for (int k = 0; k <= kmax; ++k) {
    for (int b = 0; b < bins; ++b) c[k] += profile[b] * std::polar(1.0, -2.0 * units::pi * k * (b + 0.5) / bins);
    c[k] /= bins;
    a.magnitude[k] = std::abs(c[k]);
  }
  // Minima of the band-limited profile (k >= 1 only), ignoring ripples
  // below 1% of the modulation depth.
  std::vector<double> smooth(bins, 0.0);
  for (int b = 0; b < bins; ++b) {
    const double phi = 2.0 * units::pi * (b + 0.5) / bins;
    for (int k = 1; k <= kmax; ++k) smooth[b] += 2.0 * std::real(c[k] * std::polar(1.0, k * phi));
  }
  const auto [mn, mx] = std::minmax_element(smooth.begin(), smooth.end());
  const double depth = *mx - *mn;
  // A profile modulated by less than 1e-3 of its mean counts as isotropic.
  if (depth <= 1e-3 * std::abs(c[0].real())) return a;
  // Count sign changes of the slope, with hysteresis.
  const double h = 0.01 * depth;
  int start = static_cast<int>(mx - smooth.begin());
  double ref = smooth[start];
  bool falling = true;
  for (int s = 1; s <= bins; ++s) {
    const double v = smooth[(start + s) % bins];
    if (falling) {
      if (v < ref) ref = v;
      else if (v > ref + h) { ++a.minima; falling = false; ref = v; }
    } else {
      if (v > ref) ref = v;
      else if (v < ref - h) { falling = true; ref = v; }
    }
  }
  return a;
}

SimulationResult simulate(const Scenario& sc, const PulseSpec& pulse, const std::vector<Orbital>& orbitals,
                          const SimulateOptions& options) {
  const RingStack stack = sc.build_stack();
  Propagator prop(sc.grid, stack, sc.material, pulse, sc.propagator_options());
  EvolvingState state = prop.initialize(orbitals);
  const Grid2D& grid = prop.grid();
  DipoleIntegrator integ(grid, stack);

  const double dt = prop.dt();
  const long stride = std::lround(sc.analysis.sample_interval / dt);
  if (stride < 1 || std::abs(stride * dt - sc.analysis.sample_interval) > 1e-9)
    throw ValidationError("analysis.sample_interval must be a multiple of grid.dt_fs");
  const double t_end = options.t_end > 0.0 ? std::min(options.t_end, sc.grid.duration) : sc.grid.duration;
  const long n_steps = std::lround(t_end / dt);

  SimulationResult res;
  res.dipoles = integ.empty_trace(0.0, stride * dt);
  const double ring_lo = stack.rings.front().mean_radius() - 0.5 * stack.rings.front().width();
  const double ring_hi = stack.rings.front().mean_radius() + 0.5 * stack.rings.front().width();

  std::vector<long> snapshot_steps;
  for (double t : sc.analysis.snapshot_times) snapshot_steps.push_back(std::lround(t / dt));
  const long frame_stride =
      sc.analysis.frame_interval > 0.0 ? std::max(1L, std::lround(sc.analysis.frame_interval / dt)) : 0;

  std::vector<double> rho, mx, my;
  auto observe = [&] {
    const long s = state.step_index;
    const bool sample = s % stride == 0;
    const bool snap = std::find(snapshot_steps.begin(), snapshot_steps.end(), s) != snapshot_steps.end();
    const bool frame = frame_stride > 0 && s % frame_stride == 0;
    if (!sample && !snap && !frame) return;
    ensemble_density(state, rho);
    if (sample) {
      integ.measure(rho, mx, my);
      res.dipoles.push(mx, my);
      res.dzz_times.push_back(state.time);
      res.dzz.push_back(quadrupole_moment(rho, grid));
    }
    if (snap) {
      DensitySnapshot d;
      d.time = state.time;
      d.density = rho;
      const auto a = angular_analysis(rho, grid, std::max(0.0, ring_lo), ring_hi);
      d.harmonics = a.magnitude;
      d.minima = a.minima;
      res.snapshots.push_back(std::move(d));
    }
    if (frame) {
      res.frame_times.push_back(state.time);
      res.frames.push_back(rho);
    }
  };

  say(options.log, "propagating " + std::to_string(state.orbitals.size()) + " orbitals on " +
                       std::to_string(sc.grid.nx) + "x" + std::to_string(sc.grid.ny) + ", " +
                       std::to_string(n_steps) + " steps of " + fixed(sc.grid.dt, 2) + " fs");
  const auto started = std::chrono::steady_clock::now();
  observe();
  long next_report = n_steps / 10;
  while (state.step_index < n_steps) {
    prop.step(state);
    observe();
    if (options.log && n_steps >= 10 && state.step_index >= next_report) {
      const double el = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
      say(options.log, "  t = " + fixed(state.time, 2) + " ps (" +
                           std::to_string(100 * state.step_index / n_steps) + "%, " + fixed(el, 0) + " s)");
      next_report += n_steps / 10;
    }
  }
  res.steps = state.step_index;
  for (const auto& o : state.orbitals) res.max_norm_drift = std::max(res.max_norm_drift, o.max_norm_drift);
  if (options.keep_final_state) res.final_state = std::move(state);
  return res;
}

SpectralResult analyze(const Scenario& sc, const DipoleTrace& dipoles, bool with_wavelet) {
  SpectrogramSpec spec = sc.spectrogram_spec();
  spec.t_max = std::min(spec.t_max, dipoles.time(dipoles.samples() - 1));
  const DipoleTrace accel = second_derivative(dipoles);
  SpectralResult r;
  r.stokes = stokes(accel, spec);
  if (with_wavelet) {
    const std::size_t c = accel.channels() - 1;
    r.wavelet = wavelet_check(accel.mx[c], accel.my[c], accel.t0, accel.dt, spec, sc.analysis.wavelet_cycles);
  }
  return r;
}

LineReport dominant_line(const Spectrogram& s, double f_min) {
  const auto p = peak(s, true, f_min);
  LineReport r;
  r.channel = s.label;
  r.ring_index = s.ring_index;
  r.time = p.time;
  r.frequency = p.frequency;
  r.energy = units::thz_to_energy(p.frequency);
  for (std::size_t it = 0; it < s.nt(); ++it) {
    if (s.times[it] != p.time) continue;
    for (std::size_t jf = 0; jf < s.nf(); ++jf) {
      if (s.frequencies[jf] != p.frequency) continue;
      const auto k = s.index(it, jf);
      r.s0 = s.s0[k];
      r.s1 = s.s1[k];
      r.s2 = s.s2[k];
      r.s3 = s.s3[k];
    }
  }
  r.degree = r.s0 > 0.0 ? std::sqrt(r.s1 * r.s1 + r.s2 * r.s2 + r.s3 * r.s3) / r.s0 : 0.0;
  return r;
}

double linear_r2(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ValidationError("linear fit needs two or more points");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw ValidationError("linear fit needs distinct abscissae");
  if (syy == 0.0) return 1.0;
  return sxy * sxy / (sxx * syy);
}

std::vector<ScanPoint> scan(const Scenario& sc, const std::vector<Orbital>& orbitals, const LogFn& log) {
  std::vector<int> charges = sc.scan.m_oam;
  if (charges.empty()) charges.push_back(sc.pulse.m_oam);
  std::vector<double> intensities = sc.scan.intensities;
  if (intensities.empty()) intensities.push_back(sc.pulse.peak_intensity);
  const double t_end = std::min(sc.grid.duration, sc.scan.time + 3.0 * sc.analysis.window);

  std::vector<ScanPoint> out;
  for (int m : charges) {
    for (double I : intensities) {
      PulseSpec p = sc.pulse;
      p.m_oam = m;
      p.peak_intensity = I;
      p.normalize();
      say(log, "scan point m_oam = " + std::to_string(m) + ", I = " + format_double(I) + " W/cm^2");
      SimulateOptions so;
      so.t_end = t_end;
      so.log = log;
      const auto sim = simulate(sc, p, orbitals, so);
      std::size_t channel = sim.dipoles.channels();
      for (std::size_t c = 0; c < sim.dipoles.channels(); ++c)
        if (sim.dipoles.labels[c] == sc.scan.channel) channel = c;
      if (channel == sim.dipoles.channels()) throw ValidationError("scan.channel '" + sc.scan.channel + "' not found");
      SpectrogramSpec spec = sc.spectrogram_spec();
      spec.t_min = spec.t_max = sc.scan.time;
      const auto ax = second_derivative(sim.dipoles.mx[channel], sim.dipoles.dt);
      const auto ay = second_derivative(sim.dipoles.my[channel], sim.dipoles.dt);
      const auto s = stokes(ax, ay, sim.dipoles.t0, sim.dipoles.dt, spec);
      const double df = (spec.f_max - spec.f_min) / (spec.n_freq - 1);
      out.push_back({m, I, band_power(s, sc.scan.f_lo, sc.scan.f_hi).front() * df});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Artifact writing.

namespace {

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Manifest {
 public:
  Manifest(fs::path dir, const Scenario& sc, Stage stage) : path_(dir / "manifest.json") {
    doc_ = {{"tool", "qring"},
            {"version", QRING_VERSION},
            {"scenario", sc.name},
            {"resolution", sc.resolution},
            {"scenario_hash", scenario_hash(sc)},
            {"stage", to_string(stage)},
            {"status", "running"},
            {"started", utc_now()},
            {"artifacts", json::array()}};
    flush();
  }
  void add(const fs::path& rel) { doc_["artifacts"].push_back(rel.generic_string()); }
  void set(const std::string& key, json value) { doc_[key] = std::move(value); }
  void finish(const std::string& status, const std::string& error = {}) {
    doc_["status"] = status;
    doc_["finished"] = utc_now();
    if (!error.empty()) doc_["error"] = error;
    flush();
  }
  void flush() { write_text_atomic(path_, doc_.dump(2) + "\n"); }

 private:
  fs::path path_;
  json doc_;
};

struct Writer {
  fs::path root;
  Manifest& manifest;
  std::string hash;

  void array(const fs::path& rel, std::span<const double> data, ArrayMeta meta) {
    meta.scenario_hash = hash;
    fs::create_directories((root / rel).parent_path());
    write_array(root / rel, data, meta);
    manifest.add(rel.generic_string() + ".f64");
  }
  void csv(const fs::path& rel, const CsvWriter& w) {
    fs::create_directories((root / rel).parent_path());
    w.save(root / rel);
    manifest.add(rel);
  }
};

std::string f2s(double v) { return format_double(v); }

void write_eigen(Writer& w, const Scenario& sc, const std::vector<Orbital>& orbitals) {
  const RingStack stack = sc.build_stack();
  std::vector<std::string> header{"index", "n0", "m0", "energy_mev", "occupation"};
  for (std::size_t i = 0; i < stack.size(); ++i) header.push_back("weight_ring" + std::to_string(i + 1));
  if (stack.size() == 1) header.push_back("closed_form_mev");
  CsvWriter csv(header);
  for (std::size_t k = 0; k < orbitals.size(); ++k) {
    const auto& o = orbitals[k];
    std::vector<std::string> row{std::to_string(k), std::to_string(o.n0), std::to_string(o.m0), f2s(o.energy),
                                 f2s(o.occupation)};
    for (double x : well_weights(o, stack)) row.push_back(f2s(x));
    if (stack.size() == 1) row.push_back(f2s(analytic_energy(stack.rings.front(), o.n0, o.m0, sc.material)));
    csv.row(row);
  }
  w.csv("eigen/orbitals.csv", csv);

  const RadialGridSpec rg = radial_grid(sc);
  const RadialGrid grid(rg.spacing, rg.rho_max);
  CsvWriter pot({"rho_nm", "potential_mev"});
  for (std::size_t j = 0; j < grid.size(); j += 5) pot.row({f2s(grid.rho(j)), f2s(potential(stack, grid.rho(j)))});
  w.csv("eigen/potential.csv", pot);

  if (sc.outputs.radial_profiles && !orbitals.empty()) {
    const std::size_t nr = orbitals.front().radial.grid().size();
    std::vector<double> data;
    data.reserve(orbitals.size() * nr);
    for (const auto& o : orbitals) data.insert(data.end(), o.radial.values().begin(), o.radial.values().end());
    ArrayMeta m;
    m.dims = {orbitals.size(), nr};
    const auto& g = orbitals.front().radial.grid();
    m.axes = {{"orbital", "index", 0.0, static_cast<double>(orbitals.size() - 1), orbitals.size()},
              {"rho", "nm", g.rho(0), g.rho(nr - 1), nr}};
    m.quantity = "radial_wavefunction";
    m.units = "nm^-1";
    m.extra = {{"order", "rows follow eigen/orbitals.csv"}};
    w.array("eigen/radial_profiles", data, m);
  }
}

ArrayMeta dipole_meta(const DipoleTrace& d) {
  ArrayMeta m;
  m.dims = {d.channels(), d.samples(), 2};
  m.axes = {{"channel", "index", 0.0, static_cast<double>(d.channels() - 1), d.channels()},
            {"time", "ps", d.t0, d.time(d.samples() - 1), d.samples()},
            {"component", "xy", 0.0, 1.0, 2}};
  m.quantity = "dipole_moment";
  m.units = "e nm";
  m.extra = {{"labels", d.labels}, {"ring_index", d.ring_index}};
  return m;
}

void write_simulation(Writer& w, const Scenario& sc, const SimulationResult& r, const std::string& prefix) {
  const auto& d = r.dipoles;
  std::vector<double> flat;
  flat.reserve(d.channels() * d.samples() * 2);
  for (std::size_t c = 0; c < d.channels(); ++c)
    for (std::size_t i = 0; i < d.samples(); ++i) {
      flat.push_back(d.mx[c][i]);
      flat.push_back(d.my[c][i]);
    }
  w.array(prefix + "simulate/dipoles", flat, dipole_meta(d));

  std::vector<std::string> header{"time_ps"};
  for (const auto& l : d.labels) header.push_back(l + "_x"), header.push_back(l + "_y");
  CsvWriter csv(header);
  for (std::size_t i = 0; i < d.samples(); ++i) {
    std::vector<std::string> row{f2s(d.time(i))};
    for (std::size_t c = 0; c < d.channels(); ++c) row.push_back(f2s(d.mx[c][i])), row.push_back(f2s(d.my[c][i]));
    csv.row(row);
  }
  w.csv(prefix + "simulate/dipoles.csv", csv);

  const auto q = quadrupole_diagnostic(r.dzz);
  CsvWriter qc({"time_ps", "dzz_e_nm2"});
  for (std::size_t i = 0; i < r.dzz.size(); ++i) qc.row({f2s(r.dzz_times[i]), f2s(r.dzz[i])});
  w.csv(prefix + "simulate/quadrupole.csv", qc);
  w.manifest.set("quadrupole", {{"mean_e_nm2", q.mean}, {"oscillation_amplitude_e_nm2", q.amplitude}});

  const auto& spec = sc.grid;
  CsvWriter ang({"time_ps", "minima", "k", "amplitude"});
  for (std::size_t s = 0; s < r.snapshots.size(); ++s) {
    const auto& snap = r.snapshots[s];
    ArrayMeta m;
    m.dims = {static_cast<std::size_t>(spec.ny), static_cast<std::size_t>(spec.nx)};
    m.axes = {{"y", "nm", spec.y(0), spec.y(spec.ny - 1), m.dims[0]}, {"x", "nm", spec.x(0), spec.x(spec.nx - 1), m.dims[1]}};
    m.quantity = "electron_density";
    m.units = "nm^-2";
    m.extra = {{"time_ps", snap.time}};
    w.array(prefix + "simulate/snapshot_" + std::to_string(s), snap.density, m);
    for (std::size_t k = 0; k < snap.harmonics.size(); ++k)
      ang.row({f2s(snap.time), std::to_string(snap.minima), std::to_string(k), f2s(snap.harmonics[k])});
  }
  if (!r.snapshots.empty()) w.csv(prefix + "simulate/angular_harmonics.csv", ang);

  if (!r.frames.empty()) {
    std::vector<double> all;
    for (const auto& f : r.frames) all.insert(all.end(), f.begin(), f.end());
    ArrayMeta m;
    m.dims = {r.frames.size(), static_cast<std::size_t>(spec.ny), static_cast<std::size_t>(spec.nx)};
    m.axes = {{"time", "ps", r.frame_times.front(), r.frame_times.back(), r.frames.size()},
              {"y", "nm", spec.y(0), spec.y(spec.ny - 1), m.dims[1]},
              {"x", "nm", spec.x(0), spec.x(spec.nx - 1), m.dims[2]}};
    m.quantity = "electron_density";
    m.units = "nm^-2";
    w.array(prefix + "simulate/density_frames", all, m);
  }
}

DipoleTrace trace_from_array(const LoadedArray& a) {
  DipoleTrace d;
  const auto& m = a.meta;
  if (m.dims.size() != 3 || m.dims[2] != 2 || m.axes.size() != 3) throw ValidationError("malformed dipole array");
  const std::size_t nc = m.dims[0], ns = m.dims[1];
  d.t0 = m.axes[1].start;
  d.dt = ns > 1 ? (m.axes[1].stop - m.axes[1].start) / static_cast<double>(ns - 1) : 0.0;
  d.labels = m.extra.at("labels").get<std::vector<std::string>>();
  d.ring_index = m.extra.at("ring_index").get<std::vector<int>>();
  d.mx.assign(nc, std::vector<double>(ns));
  d.my.assign(nc, std::vector<double>(ns));
  for (std::size_t c = 0; c < nc; ++c)
    for (std::size_t i = 0; i < ns; ++i) {
      d.mx[c][i] = a.data[(c * ns + i) * 2];
      d.my[c][i] = a.data[(c * ns + i) * 2 + 1];
    }
  return d;
}

ArrayMeta spectrogram_meta(const Spectrogram& s, const std::string& quantity) {
  ArrayMeta m;
  m.dims = {s.nt(), s.nf()};
  m.axes = {{"time", "ps", s.times.front(), s.times.back(), s.nt()},
            {"frequency", "THz", s.frequencies.front(), s.frequencies.back(), s.nf()}};
  m.quantity = quantity;
  m.units = "W s / sr (per unit angular frequency)";
  m.ring_index = s.ring_index;
  m.window_dt = s.window;
  std::vector<int> edge(s.edge.begin(), s.edge.end());
  m.extra = {{"channel", s.label}, {"edge_rows", edge}};
  return m;
}

void write_spectrum(Writer& w, const SpectralResult& r, const std::string& prefix, bool all_stokes) {
  for (const auto& s : r.stokes) {
    w.array(prefix + "spectrum/s0_" + s.label, s.s0, spectrogram_meta(s, "S0"));
    CsvWriter cut({"frequency_thz", "time_integrated_s0"});
    for (std::size_t jf = 0; jf < s.nf(); ++jf) {
      double acc = 0.0;
      for (std::size_t it = 0; it < s.nt(); ++it)
        if (!s.edge[it]) acc += s.s0[s.index(it, jf)];
      cut.row({f2s(s.frequencies[jf]), f2s(acc * (s.nt() > 1 ? s.times[1] - s.times[0] : 1.0))});
    }
    w.csv(prefix + "spectrum/spectrum_" + s.label + ".csv", cut);
    if (all_stokes) {
      w.array(prefix + "stokes/s1_" + s.label, s.s1, spectrogram_meta(s, "S1"));
      w.array(prefix + "stokes/s2_" + s.label, s.s2, spectrogram_meta(s, "S2"));
      w.array(prefix + "stokes/s3_" + s.label, s.s3, spectrogram_meta(s, "S3"));
    }
  }
  if (!r.wavelet.empty()) {
    const auto& total = r.stokes.back();
    auto m = spectrogram_meta(total, "S0_wavelet");
    m.extra["method"] = "constant-Q Gaussian kernels";
    w.array(prefix + "spectrum/wavelet_total", r.wavelet, m);
  }
  if (all_stokes) {
    CsvWriter lines({"channel", "ring_index", "time_ps", "frequency_thz", "energy_mev", "s0", "s1_over_s0",
                     "s2_over_s0", "s3_over_s0", "degree"});
    for (const auto& s : r.stokes) {
      const auto l = dominant_line(s);
      const double inv = l.s0 > 0.0 ? 1.0 / l.s0 : 0.0;
      lines.row({l.channel, std::to_string(l.ring_index), f2s(l.time), f2s(l.frequency), f2s(l.energy), f2s(l.s0),
                 f2s(l.s1 * inv), f2s(l.s2 * inv), f2s(l.s3 * inv), f2s(l.degree)});
    }
    w.csv(prefix + "stokes/line_report.csv", lines);
  }
}

void write_oracle(Writer& w, const Scenario& sc, const std::vector<Orbital>& orbitals) {
  OracleOptions opts;
  opts.occupation_cutoff = sc.propagation.occupation_cutoff;
  const auto lines = predict_lines(orbitals, sc.pulse, sc.material, opts);
  CsvWriter csv({"n_from", "m_from", "n_to", "m_to", "delta_e_mev", "frequency_thz", "probability", "weight"});
  for (const auto& l : lines)
    csv.row({std::to_string(l.n_from), std::to_string(l.m_from), std::to_string(l.n_to), std::to_string(l.m_to),
             f2s(l.delta_e), f2s(l.thz), f2s(l.probability), f2s(l.weight)});
  w.csv("oracle/lines.csv", csv);
}

}  // namespace

fs::path run_stage(Stage stage, const Scenario& sc, const fs::path& out, const RunOptions& options) {
  fs::create_directories(out);
  write_text_atomic(out / "scenario.json", to_json(sc).dump(2) + "\n");
  Manifest manifest(out, sc, stage);
  Writer w{out, manifest, scenario_hash(sc)};
  const auto started = std::chrono::steady_clock::now();
  try {
    say(options.log, "eigensolve: " + sc.name);
    const auto orbitals = eigensolve(sc);
    write_eigen(w, sc, orbitals);
    std::size_t occupied = 0;
    for (const auto& o : orbitals) occupied += o.occupation >= sc.propagation.occupation_cutoff;
    manifest.set("orbitals", {{"listed", orbitals.size()}, {"propagated", occupied}});

    if (stage == Stage::Oracle) write_oracle(w, sc, orbitals);

    if (stage == Stage::Scan) {
      const auto points = scan(sc, orbitals, options.log);
      CsvWriter csv({"m_oam", "intensity_w_cm2", "signal"});
      for (const auto& p : points) csv.row({std::to_string(p.m_oam), f2s(p.intensity), f2s(p.signal)});
      w.csv("scan/scan.csv", csv);
      json fits = json::array();
      std::map<int, std::pair<std::vector<double>, std::vector<double>>> by_m;
      for (const auto& p : points) by_m[p.m_oam].first.push_back(p.intensity), by_m[p.m_oam].second.push_back(p.signal);
      for (const auto& [m, xy] : by_m) {
        if (xy.first.size() < 2) continue;
        bool mono = true;
        for (std::size_t i = 1; i < xy.second.size(); ++i) mono = mono && xy.second[i] > xy.second[i - 1];
        fits.push_back({{"m_oam", m}, {"r2", linear_r2(xy.first, xy.second)}, {"monotonic", mono}});
      }
      manifest.set("scan_fits", fits);
    }

    const bool needs_dynamics = stage == Stage::Simulate || stage == Stage::Spectrum || stage == Stage::Stokes;
    if (needs_dynamics) {
      struct Run {
        std::string prefix;
        PulseSpec pulse;
      };
      std::vector<Run> runs{{"", sc.pulse}};
      if (sc.comparison.enabled) {
        PulseSpec cmp = photon_number_match(sc.pulse, sc.comparison.kind, sc.grid);
        cmp.polarization = sc.comparison.polarization;
        cmp.normalize();
        manifest.set("comparison_pulse", {{"kind", std::string(to_string(cmp.kind))},
                                          {"waist", cmp.waist},
                                          {"peak_intensity", cmp.peak_intensity}});
        runs.push_back({"comparison/", cmp});
      }
      for (const auto& run : runs) {
        DipoleTrace dipoles;
        bool reused = false;
        const fs::path cached = out / (run.prefix + "simulate/dipoles");
        if (!options.force && stage != Stage::Simulate && fs::exists(cached.string() + ".json")) {
          try {
            const auto a = read_array(cached);
            if (a.meta.scenario_hash == w.hash) {
              dipoles = trace_from_array(a);
              reused = true;
              manifest.add(run.prefix + "simulate/dipoles.f64");
              say(options.log, "reusing " + cached.string() + ".f64");
            }
          } catch (const Error&) {
            reused = false;
          }
        }
        if (!reused) {
          SimulateOptions so;
          so.log = options.log;
          const auto sim = simulate(sc, run.pulse, orbitals, so);
          write_simulation(w, sc, sim, run.prefix);
          manifest.set(run.prefix.empty() ? "max_norm_drift" : "comparison_max_norm_drift", sim.max_norm_drift);
          dipoles = sim.dipoles;
        }
        if (stage == Stage::Spectrum || stage == Stage::Stokes) {
          say(options.log, "spectral analysis" + (run.prefix.empty() ? std::string() : " (" + run.prefix + ")"));
          const auto spectral = analyze(sc, dipoles, sc.outputs.wavelet && run.prefix.empty());
          write_spectrum(w, spectral, run.prefix, stage == Stage::Stokes);
        }
      }
    }
    manifest.set("wall_seconds",
                 std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count());
    manifest.finish("complete");
  } catch (const std::exception& e) {
    manifest.finish("failed", e.what());
    throw;
  }
  return out / "manifest.json";
}

}  // namespace qring
