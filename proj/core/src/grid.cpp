#include "qring/grid.hpp"

#include <algorithm>
#include <cmath>

#include "qring/error.hpp"
#include "qring/units.hpp"

namespace qring {

void GridSpec::validate() const {
  if (nx < 64 || ny < 64) throw ValidationError("grid.nx and grid.ny must be >= 64");
  if (!(extent > 0.0)) throw ValidationError("grid.extent must be > 0");
  if (!(dt > 0.0)) throw ValidationError("grid.dt must be > 0");
  if (!(duration > 0.0)) throw ValidationError("grid.duration must be > 0");
  if (!(absorber_width >= 0.0) || absorber_width >= extent)
    throw ValidationError("grid.absorber_width must lie in [0, extent)");
}

double GridSpec::dt_ps() const { return dt * units::fs_to_ps; }

long GridSpec::n_steps() const { return std::lround(duration / dt_ps()); }

Grid2D::Grid2D(const GridSpec& spec) : spec_(spec) {
  spec_.validate();
  const std::size_t n = spec_.points();
  x_.resize(n);
  y_.resize(n);
  rho_.resize(n);
  phi_.resize(n);
  for (int j = 0; j < spec_.ny; ++j) {
    const double yj = spec_.y(j);
    for (int i = 0; i < spec_.nx; ++i) {
      const std::size_t k = static_cast<std::size_t>(j) * spec_.nx + i;
      const double xi = spec_.x(i);
      x_[k] = xi;
      y_[k] = yj;
      rho_[k] = std::hypot(xi, yj);
      phi_[k] = std::atan2(yj, xi);
    }
  }
}

std::vector<double> Grid2D::annulus_weights(double rho_lo, double rho_hi, int oversample) const {
  if (oversample < 1) throw ValidationError("annulus oversampling must be >= 1");
  std::vector<double> w(size(), 0.0);
  const double dx = spec_.dx();
  const double dy = spec_.dy();
  const double half_diag = 0.5 * std::hypot(dx, dy);
  const double inv = 1.0 / (static_cast<double>(oversample) * oversample);
  for (std::size_t k = 0; k < size(); ++k) {
    const double r = rho_[k];
    if (r + half_diag < rho_lo || r - half_diag > rho_hi) continue;
    if (r - half_diag >= rho_lo && r + half_diag <= rho_hi) {
      w[k] = 1.0;
      continue;
    }
    int hits = 0;
    for (int a = 0; a < oversample; ++a) {
      const double sx = x_[k] + ((a + 0.5) / oversample - 0.5) * dx;
      for (int b = 0; b < oversample; ++b) {
        const double sy = y_[k] + ((b + 0.5) / oversample - 0.5) * dy;
        const double sr = std::hypot(sx, sy);
        if (sr >= rho_lo && sr <= rho_hi) ++hits;
      }
    }
    w[k] = hits * inv;
  }
  return w;
}

std::vector<double> Grid2D::absorber_mask() const {
  std::vector<double> m(size(), 1.0);
  const double width = spec_.absorber_width;
  if (width <= 0.0) return m;
  const double start = spec_.extent - width;
  auto ramp = [&](double c) {
    const double d = std::abs(c) - start;
    if (d <= 0.0) return 1.0;
    return std::pow(std::cos(0.5 * units::pi * std::min(d / width, 1.0)), 0.125);
  };
  for (std::size_t k = 0; k < size(); ++k) m[k] = ramp(x_[k]) * ramp(y_[k]);
  return m;
}

}  // namespace qring
