#include "qring/selection_oracle.hpp"

#include <algorithm>
#include <cmath>

#include "qring/error.hpp"
#include "qring/units.hpp"

namespace qring {

namespace {
using cplx = std::complex<double>;
constexpr cplx I{0.0, 1.0};

// int_0^T e^{i nu t} dt, series near nu = 0.
cplx segment_integral(double T, double nu) {
  const double x = nu * T;
  if (std::abs(x) < 1e-4) {
    const cplx ix = I * x;
    return T * (1.0 + ix / 2.0 + ix * ix / 6.0 + ix * ix * ix / 24.0);
  }
  return (std::exp(I * x) - 1.0) / (I * nu);
}
}  // namespace

cplx angular_integral(int m0, int m0_prime, int m_oam) {
  const long d = static_cast<long>(m0_prime) - m0 - m_oam;
  return (d == 1 || d == -1) ? cplx(units::pi, 0.0) : cplx(0.0, 0.0);
}

cplx envelope_transform(double duration, double nu) {
  const double omega = 2.0 * units::pi / duration;
  return 0.5 * segment_integral(duration, nu) - 0.25 * segment_integral(duration, nu + omega) -
         0.25 * segment_integral(duration, nu - omega);
}

FourierCoefficients pulse_fourier_coefficients(const PulseSpec& pulse, double delta_e) {
  const double T = pulse.duration();
  const double nu = delta_e / units::hbar;
  const double w = pulse.angular_frequency();
  return {envelope_transform(T, nu - w), envelope_transform(T, nu + w)};
}

double radial_matrix_element(const Orbital& from, const Orbital& to, const PulseSpec& pulse, int s) {
  if (s != 1 && s != -1) throw DomainError("branch must be +1 or -1");
  const auto& grid = from.radial.grid();
  if (to.radial.grid().size() != grid.size() || to.radial.grid().spacing() != grid.spacing())
    throw ValidationError("matrix element needs orbitals on a common radial grid");
  const auto ri = from.radial.values();
  const auto rf = to.radial.values();
  const double h = grid.spacing();
  const double msum = static_cast<double>(from.m0 + to.m0);
  double acc = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double r = grid.rho(j);
    const double f = radial_profile(pulse, r);
    if (f == 0.0) continue;
    const double dri = from.radial.derivative(r);
    const double drf = to.radial.derivative(r);
    acc += f * (rf[j] * dri - ri[j] * drf - s * msum * rf[j] * ri[j] / r) * r;
  }
  return acc * h;
}

cplx transition_amplitude(const Orbital& from, const Orbital& to, const PulseSpec& pulse, const Material& material) {
  const double c = material.kinetic_prefactor();
  const double k0 = peak_wavevector_shift(pulse);
  const auto [ex, ey] = polarization_vector(pulse.polarization);
  const auto coeff = pulse_fourier_coefficients(pulse, to.energy - from.energy);
  const cplx cep = std::polar(1.0, pulse.carrier_envelope_phase);

  // Branch s picks up (eps_x - i s eps_y) / 2 from eps.rho_hat and eps.phi_hat.
  auto element = [&](cplx px, cplx py, int m_beam) {
    cplx m{0.0, 0.0};
    for (int s : {1, -1}) {
      if (to.m0 != from.m0 + m_beam + s) continue;
      const cplx a = 0.5 * (px - I * static_cast<double>(s) * py);
      m += I * c * a * radial_matrix_element(from, to, pulse, s);
    }
    return m;
  };
  const cplx m_abs = k0 * cep * element(ex, ey, pulse.m_oam);
  const cplx m_emi = k0 * std::conj(cep) * element(std::conj(ex), std::conj(ey), -pulse.m_oam);
  return (m_abs * coeff.minus + m_emi * coeff.plus) / (2.0 * I * units::hbar);
}

std::vector<TransitionLine> predict_lines(const std::vector<Orbital>& orbitals, const PulseSpec& pulse,
                                          const Material& material, const OracleOptions& options) {
  std::vector<TransitionLine> lines;
  for (const auto& from : orbitals) {
    if (from.occupation < options.occupation_cutoff) continue;
    for (const auto& to : orbitals) {
      const int dm = to.m0 - from.m0;
      const bool allowed = std::abs(dm - pulse.m_oam) == 1 || std::abs(dm + pulse.m_oam) == 1;
      if (!allowed) continue;
      TransitionLine line;
      line.n_from = from.n0;
      line.m_from = from.m0;
      line.n_to = to.n0;
      line.m_to = to.m0;
      line.delta_e = to.energy - from.energy;
      line.thz = units::energy_to_thz(std::abs(line.delta_e));
      line.angular = angular_integral(from.m0, to.m0, pulse.m_oam);
      line.amplitude = transition_amplitude(from, to, pulse, material);
      line.probability = std::norm(line.amplitude);
      line.weight = line.probability * from.occupation * (1.0 - to.occupation);
      if (line.weight < options.min_weight || line.weight == 0.0) continue;
      lines.push_back(line);
    }
  }
  std::stable_sort(lines.begin(), lines.end(),
                   [](const TransitionLine& a, const TransitionLine& b) { return a.weight > b.weight; });
  if (options.max_lines > 0 && lines.size() > options.max_lines) lines.resize(options.max_lines);
  return lines;
}

}  // namespace qring
