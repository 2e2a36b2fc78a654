#include "qring/vortex_field.hpp"

#include <cmath>
#include <map>
#include <string>
#include <utility>

#include "qring/error.hpp"
#include "qring/units.hpp"

namespace qring {

namespace {

using cplx = std::complex<double>;

// Unnormalized LG profile in u = rho / w0.
double lg_raw(int am, int p, double u) {
  const double x = 2.0 * u * u;
  return std::pow(std::sqrt(2.0) * u, am) * std::assoc_laguerre(static_cast<unsigned>(p), static_cast<unsigned>(am), x) *
         std::exp(-u * u);
}

// max_u |lg_raw(am, p, u)|
double lg_peak(int am, int p) {
  thread_local std::map<std::pair<int, int>, double> cache;
  const auto key = std::make_pair(am, p);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  double peak;
  if (p == 0) {
    peak = am == 0 ? 1.0 : std::pow(static_cast<double>(am), 0.5 * am) * std::exp(-0.5 * am);
  } else {
    const double u_max = 3.0 + std::sqrt(static_cast<double>(am + 2 * p + 1));
    const int samples = 20000;
    double best_u = 0.0;
    peak = 0.0;
    for (int s = 0; s <= samples; ++s) {
      const double u = u_max * s / samples;
      const double v = std::abs(lg_raw(am, p, u));
      if (v > peak) peak = v, best_u = u;
    }
    double a = std::max(0.0, best_u - u_max / samples), b = best_u + u_max / samples;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 100; ++it) {
      const double c = b - g * (b - a), d = a + g * (b - a);
      if (std::abs(lg_raw(am, p, c)) > std::abs(lg_raw(am, p, d))) b = d; else a = c;
    }
    peak = std::max(peak, std::abs(lg_raw(am, p, 0.5 * (a + b))));
  }
  cache.emplace(key, peak);
  return peak;
}

}  // namespace

void PulseSpec::normalize() {
  if (kind == BeamKind::Gaussian) m_oam = 0;
  validate();
}

void PulseSpec::validate() const {
  if (!(peak_intensity > 0.0) || !std::isfinite(peak_intensity))
    throw ValidationError("pulse.peak_intensity must be > 0");
  if (!(n_cycles > 0.0)) throw ValidationError("pulse.n_cycles must be > 0");
  if (p < 0) throw ValidationError("pulse.p must be >= 0");
  if (!(photon_energy > 0.0)) throw ValidationError("pulse.photon_energy must be > 0");
  if (!(waist > 0.0)) throw ValidationError("pulse.waist must be > 0");
  if (kind == BeamKind::PerfectVortex && !(spot_radius >= 0.0))
    throw ValidationError("pulse.spot_radius must be >= 0");
  if (kind == BeamKind::Gaussian && m_oam != 0)
    throw ValidationError("pulse.m_oam must be 0 for a Gaussian beam");
  if (!(coupling_scale > 0.0) || !std::isfinite(coupling_scale))
    throw ValidationError("pulse.coupling_scale must be > 0");
  if (!std::isfinite(carrier_envelope_phase))
    throw ValidationError("pulse.carrier_envelope_phase must be finite");
}

double PulseSpec::angular_frequency() const { return units::energy_to_angular(photon_energy); }

double PulseSpec::duration() const { return n_cycles * 2.0 * units::pi / angular_frequency(); }

BeamKind parse_beam_kind(std::string_view name) {
  if (name == "laguerre_gauss") return BeamKind::LaguerreGauss;
  if (name == "perfect_vortex") return BeamKind::PerfectVortex;
  if (name == "gaussian") return BeamKind::Gaussian;
  throw ValidationError("unknown pulse.kind '" + std::string(name) +
                        "' (expected laguerre_gauss, perfect_vortex or gaussian)");
}

std::string_view to_string(BeamKind kind) {
  switch (kind) {
    case BeamKind::LaguerreGauss: return "laguerre_gauss";
    case BeamKind::PerfectVortex: return "perfect_vortex";
    case BeamKind::Gaussian: return "gaussian";
  }
  return "?";
}

Polarization parse_polarization(std::string_view name) {
  if (name == "linear_x") return Polarization::LinearX;
  if (name == "linear_y") return Polarization::LinearY;
  if (name == "circular_plus") return Polarization::CircularPlus;
  if (name == "circular_minus") return Polarization::CircularMinus;
  throw ValidationError("unknown pulse.polarization '" + std::string(name) +
                        "' (expected linear_x, linear_y, circular_plus or circular_minus)");
}

std::string_view to_string(Polarization pol) {
  switch (pol) {
    case Polarization::LinearX: return "linear_x";
    case Polarization::LinearY: return "linear_y";
    case Polarization::CircularPlus: return "circular_plus";
    case Polarization::CircularMinus: return "circular_minus";
  }
  return "?";
}

double envelope(const PulseSpec& pulse, double t) {
  const double T = pulse.duration();
  if (t <= 0.0 || t >= T) return 0.0;
  const double s = std::sin(units::pi * t / T);
  return s * s;
}

double amplitude_from_intensity(double peak_intensity_w_cm2, double photon_energy_mev) {
  if (!(peak_intensity_w_cm2 > 0.0) || !(photon_energy_mev > 0.0))
    throw DomainError("amplitude_from_intensity requires positive inputs");
  const double intensity = peak_intensity_w_cm2 * 1e4;  // W/m^2
  const double e0 = std::sqrt(2.0 * intensity / (units::si::speed_of_light * units::si::epsilon0));
  const double omega = photon_energy_mev * units::si::mev / units::si::hbar;
  return e0 / omega;
}

double peak_wavevector_shift(const PulseSpec& pulse) {
  const double a0 = amplitude_from_intensity(pulse.peak_intensity, pulse.photon_energy);
  return pulse.coupling_scale * units::si::elementary_charge * a0 / units::si::hbar * units::nm_to_m;
}

double radial_profile(const PulseSpec& pulse, double rho) {
  switch (pulse.kind) {
    case BeamKind::LaguerreGauss: {
      const int am = std::abs(pulse.m_oam);
      return lg_raw(am, pulse.p, rho / pulse.waist) / lg_peak(am, pulse.p);
    }
    case BeamKind::PerfectVortex: {
      const double d = (rho - pulse.spot_radius) / pulse.waist;
      return std::exp(-d * d);
    }
    case BeamKind::Gaussian: {
      const double d = rho / pulse.waist;
      return std::exp(-d * d);
    }
  }
  return 0.0;
}

cplx spatial_mode(const PulseSpec& pulse, double x, double y) {
  const double f = radial_profile(pulse, std::hypot(x, y));
  if (pulse.m_oam == 0 || f == 0.0) return {f, 0.0};
  return std::polar(f, pulse.m_oam * std::atan2(y, x));
}

std::pair<cplx, cplx> polarization_vector(Polarization pol) {
  const double r = 1.0 / std::sqrt(2.0);
  switch (pol) {
    case Polarization::LinearX: return {{1.0, 0.0}, {0.0, 0.0}};
    case Polarization::LinearY: return {{0.0, 0.0}, {1.0, 0.0}};
    case Polarization::CircularPlus: return {{r, 0.0}, {0.0, r}};
    case Polarization::CircularMinus: return {{r, 0.0}, {0.0, -r}};
  }
  return {{1.0, 0.0}, {0.0, 0.0}};
}

cplx temporal_factor(const PulseSpec& pulse, double t) {
  const double env = envelope(pulse, t);
  if (env == 0.0) return {0.0, 0.0};
  return std::polar(env, pulse.carrier_envelope_phase - pulse.angular_frequency() * t);
}

FieldSample vector_potential(const PulseSpec& pulse, double x, double y, double t) {
  const cplx z = temporal_factor(pulse, t);
  if (z == cplx{}) return {};
  const double a0 = amplitude_from_intensity(pulse.peak_intensity, pulse.photon_energy);
  const cplx u = a0 * spatial_mode(pulse, x, y) * z;
  const auto [ex, ey] = polarization_vector(pulse.polarization);
  return {std::real(ex * u), std::real(ey * u)};
}

namespace {

double photon_integral(const PulseSpec& pulse, const GridSpec& grid, int samples_per_cycle) {
  Grid2D g(grid);
  const double a0 = amplitude_from_intensity(pulse.peak_intensity, pulse.photon_energy);
  const double w = pulse.angular_frequency();
  const double T = pulse.duration();
  const auto [ex, ey] = polarization_vector(pulse.polarization);
  std::vector<cplx> mode(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) mode[k] = spatial_mode(pulse, g.x()[k], g.y()[k]);

  const long nt = std::max<long>(16, std::lround(samples_per_cycle * pulse.n_cycles));
  const double dt = T / static_cast<double>(nt);
  double total = 0.0;
  for (long s = 0; s < nt; ++s) {
    const double t = (s + 0.5) * dt;
    const double phase_arg = units::pi * t / T;
    const double env = std::sin(phase_arg) * std::sin(phase_arg);
    const double denv = units::pi / T * std::sin(2.0 * phase_arg);
    // E = -dA/dt; temporal part derivative of Omega e^{i(cep - w t)}.
    const cplx dz = cplx(denv, -w * env) * std::polar(1.0, pulse.carrier_envelope_phase - w * t);
    double acc = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
      const cplx u = mode[k] * dz;
      const double exr = std::real(ex * u), eyr = std::real(ey * u);
      acc += exr * exr + eyr * eyr;
    }
    total += acc;
  }
  // Units: (A0)^2 cancels in ratios, kept for a meaningful magnitude.
  return total * a0 * a0 * g.cell_area() * dt / pulse.photon_energy;
}

}  // namespace

double photon_number(const PulseSpec& pulse, const GridSpec& grid) {
  pulse.validate();
  return photon_integral(pulse, grid, 256);
}

PulseSpec photon_number_match(const PulseSpec& reference, BeamKind target, const GridSpec& grid) {
  reference.validate();
  if (target == reference.kind) return reference;

  PulseSpec out = reference;
  out.kind = target;
  double radius = reference.waist;
  if (reference.kind == BeamKind::PerfectVortex) {
    radius = reference.spot_radius;
  } else if (reference.kind == BeamKind::LaguerreGauss && reference.p == 0 && reference.m_oam != 0) {
    radius = reference.waist * std::sqrt(std::abs(reference.m_oam) / 2.0);
  }
  if (target == BeamKind::Gaussian) {
    out.m_oam = 0;
    out.p = 0;
    out.waist = radius;
  } else if (target == BeamKind::PerfectVortex) {
    out.spot_radius = radius;
  } else {
    out.p = 0;
    if (out.m_oam == 0) out.waist = radius;
    else out.waist = radius / std::sqrt(std::abs(out.m_oam) / 2.0);
  }
  out.peak_intensity = 1.0;
  out.normalize();

  const double n_ref = photon_integral(reference, grid, 256);
  const double n_unit = photon_integral(out, grid, 256);
  const double n_ref_coarse = photon_integral(reference, grid, 128);
  const double n_unit_coarse = photon_integral(out, grid, 128);
  if (!(n_ref > 0.0) || !(n_unit > 0.0))
    throw AccuracyError("photon-number integral vanishes on the grid");
  const double ratio = n_ref / n_unit;
  const double ratio_coarse = n_ref_coarse / n_unit_coarse;
  if (std::abs(ratio - ratio_coarse) > 1e-6 * ratio)
    throw AccuracyError("photon-number integral not converged in time sampling");
  out.peak_intensity = ratio;
  return out;
}

}  // namespace qring
