#include "qring/ring_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "qring/error.hpp"
#include "qring/units.hpp"

namespace qring {

namespace {

double smoothstep(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return x * x * (3.0 - 2.0 * x);
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

}  // namespace

void Material::validate() const {
  require(std::isfinite(effective_mass) && effective_mass > 0.0,
          "material.effective_mass must be > 0");
  require(std::isfinite(relaxation_time) && relaxation_time > 0.0,
          "material.relaxation_time must be > 0");
  require(std::isfinite(temperature) && temperature >= 0.0, "material.temperature must be >= 0");
  require(std::isfinite(fermi_energy), "material.fermi_energy must be finite");
}

double Material::kinetic_prefactor() const { return units::kinetic_prefactor(effective_mass); }

RingSpec::RingSpec(double a1, double a2, double width) : a1_(a1), a2_(a2), width_(width) {
  validate();
}

void RingSpec::validate() const {
  require(std::isfinite(a1_) && a1_ >= 0.0, "ring.a1 must be >= 0");
  require(std::isfinite(a2_) && a2_ > 0.0, "ring.a2 must be > 0");
  require(std::isfinite(width_) && width_ >= 0.0, "ring.width must be >= 0");
}

RingSpec RingSpec::from_width_relation(double radius, double width, const Material& material) {
  require(radius >= 0.0 && width > 0.0, "ring radius must be >= 0 and width > 0");
  require(material.fermi_energy > 0.0, "width relation needs fermi_energy > 0");
  // drho^2 = 8 E_F / (m* omega0^2) and m* omega0^2 = 8 a2.
  const double a2 = material.fermi_energy / (width * width);
  return RingSpec(a2 * std::pow(radius, 4), a2, width);
}

RingSpec RingSpec::from_oscillator_energy(double radius, double hbar_omega0, double width,
                                          const Material& material) {
  require(radius >= 0.0 && width >= 0.0, "ring radius and width must be >= 0");
  require(hbar_omega0 > 0.0, "oscillator energy must be > 0");
  const double c = material.kinetic_prefactor();
  const double a2 = hbar_omega0 * hbar_omega0 / (16.0 * c);
  return RingSpec(a2 * std::pow(radius, 4), a2, width);
}

RingSpec RingSpec::from_transition(double radius, double transition_energy, int m_from, int m_to,
                                   double width, const Material& material) {
  require(radius > 0.0, "transition calibration needs radius > 0");
  require(transition_energy > 0.0, "transition energy must be > 0");
  const double c = material.kinetic_prefactor();
  const double r4 = std::pow(radius, 4);
  const double mf2 = static_cast<double>(m_from) * m_from;
  const double mt2 = static_cast<double>(m_to) * m_to;
  auto spacing = [&](double hw) {
    const double beta = hw * hw * r4 / (16.0 * c * c);
    return hw * (1.0 + 0.5 * (std::sqrt(mt2 + beta) - std::sqrt(mf2 + beta)));
  };
  double lo = transition_energy * 1e-9;
  double hi = transition_energy;
  int guard = 0;
  while (spacing(hi) < transition_energy) {
    hi *= 2.0;
    if (++guard > 200) throw ValidationError("transition calibration has no solution");
  }
  if (spacing(lo) > transition_energy)
    throw ValidationError("transition calibration has no solution for these quantum numbers");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (spacing(mid) < transition_energy ? lo : hi) = mid;
  }
  return from_oscillator_energy(radius, 0.5 * (lo + hi), width, material);
}

double RingSpec::v0() const { return 2.0 * std::sqrt(a1_ * a2_); }

double RingSpec::mean_radius() const { return std::pow(a1_ / a2_, 0.25); }

double RingSpec::oscillator_energy(const Material& material) const {
  return 4.0 * std::sqrt(a2_ * material.kinetic_prefactor());
}

double RingSpec::width_relation(const Material& material) const {
  return std::sqrt(material.fermi_energy / a2_);
}

double RingSpec::potential(double rho) const {
  if (a1_ == 0.0) return a2_ * rho * rho;
  return a1_ / (rho * rho) + a2_ * rho * rho - v0();
}

void RingStack::validate() const {
  if (rings.empty()) throw ValidationError("stack.rings must not be empty");
  for (const auto& r : rings) r.validate();
  require(std::isfinite(barrier_width) && barrier_width >= 0.0, "stack.barrier_width must be >= 0");
  require(std::isfinite(barrier_height), "stack.barrier_height must be finite");
  require(std::isfinite(edge_smoothing) && edge_smoothing >= 0.0,
          "stack.edge_smoothing must be >= 0");
  for (std::size_t i = 0; i + 1 < rings.size(); ++i) {
    const double outer = rings[i].mean_radius();
    const double inner = rings[i + 1].mean_radius();
    if (!(inner < outer))
      throw GeometryError("ring radii must be strictly decreasing (ring " + std::to_string(i + 2) +
                          " radius " + std::to_string(inner) + " >= ring " + std::to_string(i + 1) +
                          " radius " + std::to_string(outer) + ")");
    const double gap_lo = inner + 0.5 * rings[i + 1].width();
    const double gap_hi = outer - 0.5 * rings[i].width();
    if (gap_lo + barrier_width > gap_hi + 1e-12)
      throw GeometryError("wells of rings " + std::to_string(i + 1) + " and " +
                          std::to_string(i + 2) + " overlap once the barrier is included");
  }
}

double RingStack::outer_edge() const {
  return rings.front().mean_radius() + 0.5 * rings.front().width();
}

double RingStack::inner_edge() const {
  return std::max(0.0, rings.back().mean_radius() - 0.5 * rings.back().width());
}

double potential(const RingStack& stack, double rho) {
  if (!(rho > 0.0)) throw DomainError("potential requires rho > 0");
  if (stack.rings.size() == 1) return stack.rings.front().potential(rho);

  double well = std::numeric_limits<double>::infinity();
  for (const auto& r : stack.rings) well = std::min(well, r.potential(rho));

  const double s = stack.edge_smoothing;
  double weight = 0.0;
  for (std::size_t i = 0; i + 1 < stack.rings.size(); ++i) {
    const double gap_lo = stack.rings[i + 1].mean_radius() + 0.5 * stack.rings[i + 1].width();
    const double gap_hi = stack.rings[i].mean_radius() - 0.5 * stack.rings[i].width();
    const double centre = 0.5 * (gap_lo + gap_hi);
    const double p_lo = centre - 0.5 * stack.barrier_width;
    const double p_hi = centre + 0.5 * stack.barrier_width;
    double w;
    if (s > 0.0) {
      w = std::min(smoothstep((rho - (p_lo - 0.5 * s)) / s), smoothstep(((p_hi + 0.5 * s) - rho) / s));
    } else {
      w = (rho >= p_lo && rho <= p_hi) ? 1.0 : 0.0;
    }
    weight = std::max(weight, w);
  }
  if (weight == 0.0) return well;
  if (weight == 1.0) return stack.barrier_height;
  return (1.0 - weight) * well + weight * stack.barrier_height;
}

double analytic_energy(const RingSpec& ring, int n0, int m0, const Material& material) {
  if (n0 < 0) throw DomainError("analytic_energy requires n0 >= 0");
  const double hw = ring.oscillator_energy(material);
  const double c = material.kinetic_prefactor();
  const double m2 = static_cast<double>(m0) * m0;
  // 2 m* a1 / hbar^2 = a1 / c; (m*/4) omega0^2 rho0^2 = 2 a2 rho0^2 = V0.
  return (n0 + 0.5 + 0.5 * std::sqrt(m2 + ring.a1() / c)) * hw - ring.v0();
}

double fermi_dirac(double energy, const Material& material) {
  const double de = energy - material.fermi_energy;
  if (material.temperature == 0.0) {
    if (de < 0.0) return 1.0;
    if (de > 0.0) return 0.0;
    return 0.5;
  }
  const double x = de / (units::k_boltzmann * material.temperature);
  if (x > 700.0) return 0.0;
  return 1.0 / (1.0 + std::exp(x));
}

std::vector<Orbital> occupy(std::vector<Orbital> orbitals, const Material& material) {
  for (auto& o : orbitals) {
    if (!std::isfinite(o.energy)) throw DomainError("occupy: non-finite orbital energy");
    o.occupation = fermi_dirac(o.energy, material);
  }
  return orbitals;
}

double occupation_cutoff_energy(const Material& material, double cutoff) {
  if (!(cutoff > 0.0 && cutoff < 1.0)) throw DomainError("occupation cutoff must lie in (0, 1)");
  if (material.temperature == 0.0) return material.fermi_energy;
  return material.fermi_energy +
         units::k_boltzmann * material.temperature * std::log(1.0 / cutoff - 1.0);
}

std::vector<double> well_weights(const Orbital& orbital, const RingStack& stack) {
  std::vector<double> out(stack.size(), 0.0);
  const auto& grid = orbital.radial.grid();
  const auto vals = orbital.radial.values();
  const double h = grid.spacing();
  for (std::size_t i = 0; i < stack.size(); ++i) {
    const double lo = stack.rings[i].mean_radius() - 0.5 * stack.rings[i].width();
    const double hi = stack.rings[i].mean_radius() + 0.5 * stack.rings[i].width();
    double acc = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const double r = grid.rho(j);
      const double overlap = std::clamp(std::min(hi, r + 0.5 * h) - std::max(lo, r - 0.5 * h), 0.0, h);
      acc += vals[j] * vals[j] * r * overlap;
    }
    out[i] = acc;
  }
  return out;
}

std::vector<Orbital> solve_stationary(const RingStack& stack, const Material& material, int m_min,
                                      int m_max, int n_per_m, const RadialGridSpec& spec,
                                      const EigenSolveOptions& options) {
  stack.validate();
  material.validate();
  if (n_per_m < 1) throw ValidationError("n_per_m must be >= 1");
  if (m_min > m_max) throw ValidationError("m0 range is empty");
  if (!(spec.spacing > 0.0)) throw ValidationError("radial grid spacing must be > 0");
  if (spec.rho_max <= stack.outer_edge())
    throw GeometryError("radial grid must extend beyond the outer well edge");

  auto grid = std::make_shared<const RadialGrid>(spec.spacing, spec.rho_max);
  std::unique_ptr<RadialGrid> coarse;
  if (options.check_drift) coarse = std::make_unique<RadialGrid>(2.0 * spec.spacing, spec.rho_max);

  double v_floor = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < grid->size(); ++j) v_floor = std::min(v_floor, potential(stack, grid->rho(j)));

  std::map<int, RadialEigenpairs> by_abs_m;
  for (int m = m_min; m <= m_max; ++m) {
    const int am = std::abs(m);
    if (by_abs_m.count(am)) continue;
    auto pairs = solve_radial(stack, material, am, n_per_m, *grid);
    if (coarse) {
      const auto check = solve_radial(stack, material, am, n_per_m, *coarse);
      for (int n = 0; n < n_per_m; ++n) {
        const double e = pairs.energies[n];
        if (e > options.check_below) continue;
        const double scale = std::max(std::abs(e), e - v_floor);
        const double drift = std::abs(e - check.energies[n]) / scale;
        if (drift > options.drift_tolerance)
          throw AccuracyError("radial grid too coarse: eigenvalue (n0=" + std::to_string(n) +
                              ", |m0|=" + std::to_string(am) + ") drifts by " +
                              std::to_string(drift) + " between h and 2h; reduce spacing");
      }
    }
    by_abs_m.emplace(am, std::move(pairs));
  }

  std::vector<Orbital> out;
  out.reserve(static_cast<std::size_t>(m_max - m_min + 1) * n_per_m);
  for (int m = m_min; m <= m_max; ++m) {
    const auto& pairs = by_abs_m.at(std::abs(m));
    for (int n = 0; n < n_per_m; ++n) {
      Orbital o;
      o.n0 = n;
      o.m0 = m;
      o.energy = pairs.energies[n];
      o.radial = RadialProfile(grid, pairs.radial[n], m);
      out.push_back(std::move(o));
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Orbital& a, const Orbital& b) {
    if (a.energy != b.energy) return a.energy < b.energy;
    if (std::abs(a.m0) != std::abs(b.m0)) return std::abs(a.m0) < std::abs(b.m0);
    if (a.m0 != b.m0) return a.m0 < b.m0;
    return a.n0 < b.n0;
  });
  return out;
}

}  // namespace qring
