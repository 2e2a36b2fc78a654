#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <string>

#include "qring/error.hpp"
#include "qring/ring_model.hpp"

namespace qring {

RadialGrid::RadialGrid(double spacing, double rho_max) : h_(spacing) {
  if (!(spacing > 0.0) || !(rho_max > spacing))
    throw ValidationError("radial grid needs 0 < spacing < rho_max");
  n_ = static_cast<std::size_t>(std::llround(rho_max / spacing));
}

RadialProfile::RadialProfile(std::shared_ptr<const RadialGrid> grid, std::vector<double> values, int m0)
    : grid_(std::move(grid)), values_(std::move(values)), parity_((std::abs(m0) % 2) ? -1 : 1) {}

double RadialProfile::sample(long j) const {
  if (j < 0) return parity_ * sample(-j - 1);
  if (j >= static_cast<long>(values_.size())) return 0.0;
  return values_[static_cast<std::size_t>(j)];
}

double RadialProfile::operator()(double rho) const {
  const double t = std::abs(rho) / grid_->spacing() - 0.5;
  const long j = static_cast<long>(std::floor(t));
  const double s = t - static_cast<double>(j);
  if (j + 1 >= static_cast<long>(values_.size()) + 1) return 0.0;
  const double f0 = sample(j - 1), f1 = sample(j), f2 = sample(j + 1), f3 = sample(j + 2);
  // Lagrange basis on nodes -1, 0, 1, 2.
  const double v = -s * (s - 1.0) * (s - 2.0) / 6.0 * f0 + (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0 * f1 -
                   (s + 1.0) * s * (s - 2.0) / 2.0 * f2 + (s + 1.0) * s * (s - 1.0) / 6.0 * f3;
  return (rho < 0.0 && parity_ < 0) ? -v : v;
}

double RadialProfile::derivative(double rho) const {
  const double t = std::abs(rho) / grid_->spacing() - 0.5;
  const long j = static_cast<long>(std::floor(t));
  const double s = t - static_cast<double>(j);
  if (j >= static_cast<long>(values_.size())) return 0.0;
  const double f0 = sample(j - 1), f1 = sample(j), f2 = sample(j + 1), f3 = sample(j + 2);
  const double d = -(3.0 * s * s - 6.0 * s + 2.0) / 6.0 * f0 + (3.0 * s * s - 4.0 * s - 1.0) / 2.0 * f1 -
                   (3.0 * s * s - 2.0 * s - 2.0) / 2.0 * f2 + (3.0 * s * s - 1.0) / 6.0 * f3;
  const double dv = d / grid_->spacing();
  return (rho < 0.0 && parity_ > 0) ? -dv : dv;
}

double RadialProfile::norm_squared() const {
  double acc = 0.0;
  for (std::size_t j = 0; j < values_.size(); ++j) acc += values_[j] * values_[j] * grid_->rho(j);
  return acc * grid_->spacing();
}

RadialEigenpairs solve_radial(const RingStack& stack, const Material& material, int m0, int count,
                              const RadialGrid& grid) {
  const auto n = static_cast<lapack_int>(grid.size());
  if (count < 1 || count > n) throw ValidationError("requested eigenpair count out of range");
  const double c = material.kinetic_prefactor();
  const double h = grid.spacing();
  const double h2 = h * h;
  const double m2 = static_cast<double>(m0) * m0;

  std::vector<double> d(n), e(n, 0.0);
  for (lapack_int j = 0; j < n; ++j) {
    const double r = grid.rho(j);
    const double r_lo = r - 0.5 * h;  // zero at the first cell: no flux through the origin
    const double r_hi = r + 0.5 * h;
    d[j] = c * (r_hi + r_lo) / (h2 * r) + c * m2 / (r * r) + potential(stack, r);
    if (j + 1 < n) e[j] = -c * r_hi / (h2 * std::sqrt(r * grid.rho(j + 1)));
  }
  // R = 0 exactly at rho_max (odd ghost cell), independent of h.
  d[n - 1] += c * (grid.rho(n - 1) + 0.5 * h) / (h2 * grid.rho(n - 1));

  std::vector<double> w(n), z(static_cast<std::size_t>(n) * count);
  std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(count));
  lapack_int found = 0;
  const lapack_int info = LAPACKE_dstevr(LAPACK_COL_MAJOR, 'V', 'I', n, d.data(), e.data(), 0.0, 0.0,
                                         1, count, 0.0, &found, w.data(), z.data(), n, isuppz.data());
  if (info != 0 || found != count)
    throw SolverError("radial eigensolve failed (dstevr info " + std::to_string(info) + ")");

  RadialEigenpairs out;
  out.energies.assign(w.begin(), w.begin() + count);
  out.radial.resize(count);
  for (int k = 0; k < count; ++k) {
    const double* u = z.data() + static_cast<std::size_t>(k) * n;
    std::vector<double> r(n);
    double norm = 0.0;
    std::size_t peak = 0;
    for (lapack_int j = 0; j < n; ++j) {
      norm += u[j] * u[j];
      if (std::abs(u[j]) > std::abs(u[peak])) peak = static_cast<std::size_t>(j);
    }
    const double scale = (u[peak] < 0.0 ? -1.0 : 1.0) / std::sqrt(norm * h);
    for (lapack_int j = 0; j < n; ++j) r[j] = scale * u[j] / std::sqrt(grid.rho(j));
    out.radial[k] = std::move(r);
  }
  return out;
}

}  // namespace qring
