#include "qring/emission.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qring/error.hpp"
#include "qring/units.hpp"

namespace qring {

namespace {
// e*nm/ps^2 -> C*m/s^2
constexpr double kAccelToSi = units::si::elementary_charge * units::nm_to_m / (units::ps_to_s * units::ps_to_s);
}  // namespace

void DipoleTrace::push(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != channels() || y.size() != channels()) throw ValidationError("dipole channel count mismatch");
  for (std::size_t c = 0; c < channels(); ++c) {
    mx[c].push_back(x[c]);
    my[c].push_back(y[c]);
  }
}

DipoleIntegrator::DipoleIntegrator(const Grid2D& grid, const RingStack& stack, int oversample) {
  stack.validate();
  const double reach = grid.spec().extent;
  auto add = [&](double lo, double hi, const std::string& label, int index) {
    if (hi > reach) throw GeometryError("dipole annulus of " + label + " extends beyond the grid");
    auto w = grid.annulus_weights(std::max(lo, 0.0), hi, oversample);
    std::vector<double> wx(w.size()), wy(w.size());
    const double area = grid.cell_area();
    for (std::size_t k = 0; k < w.size(); ++k) {
      w[k] *= area;
      wx[k] = w[k] * grid.x()[k];
      wy[k] = w[k] * grid.y()[k];
    }
    labels_.push_back(label);
    ring_index_.push_back(index);
    w_.push_back(std::move(w));
    wx_.push_back(std::move(wx));
    wy_.push_back(std::move(wy));
  };
  for (std::size_t i = 0; i < stack.size(); ++i) {
    const double r = stack.rings[i].mean_radius();
    const double half = 0.5 * stack.rings[i].width();
    add(r - half, r + half, "ring" + std::to_string(i + 1), static_cast<int>(i + 1));
  }
  add(stack.inner_edge(), stack.outer_edge(), "total", 0);
}

DipoleTrace DipoleIntegrator::empty_trace(double t0, double dt) const {
  DipoleTrace t;
  t.t0 = t0;
  t.dt = dt;
  t.labels = labels_;
  t.ring_index = ring_index_;
  t.mx.assign(labels_.size(), {});
  t.my.assign(labels_.size(), {});
  return t;
}

void DipoleIntegrator::measure(std::span<const double> density, std::vector<double>& mx,
                               std::vector<double>& my) const {
  mx.assign(channels(), 0.0);
  my.assign(channels(), 0.0);
  for (std::size_t c = 0; c < channels(); ++c) {
    const double* wx = wx_[c].data();
    const double* wy = wy_[c].data();
    double sx = 0.0, sy = 0.0;
    for (std::size_t k = 0; k < density.size(); ++k) {
      sx += wx[k] * density[k];
      sy += wy[k] * density[k];
    }
    mx[c] = sx;
    my[c] = sy;
  }
}

DipoleTrace ring_dipoles(const std::vector<std::vector<double>>& density_frames, const Grid2D& grid,
                         const RingStack& stack, double t0, double dt) {
  DipoleIntegrator integ(grid, stack);
  DipoleTrace trace = integ.empty_trace(t0, dt);
  std::vector<double> x, y;
  for (const auto& frame : density_frames) {
    if (frame.size() != grid.size()) throw ValidationError("density frame size does not match the grid");
    integ.measure(frame, x, y);
    trace.push(x, y);
  }
  return trace;
}

std::vector<double> second_derivative(std::span<const double> x, double dt) {
  const std::size_t n = x.size();
  if (n < 5) throw ValidationError("second derivative needs at least 5 samples");
  if (!(dt > 0.0)) throw ValidationError("second derivative needs a positive sampling interval");
  std::vector<double> d(n);
  const double inv = 1.0 / (12.0 * dt * dt);
  for (std::size_t i = 2; i + 2 < n; ++i)
    d[i] = (-x[i - 2] + 16.0 * x[i - 1] - 30.0 * x[i] + 16.0 * x[i + 1] - x[i + 2]) * inv;
  // One-sided fourth-order-consistent stencils on 6 points.
  auto fwd = [&](std::size_t i) {
    return (45.0 * x[i] - 154.0 * x[i + 1] + 214.0 * x[i + 2] - 156.0 * x[i + 3] + 61.0 * x[i + 4] -
            10.0 * x[i + 5]) * inv;
  };
  auto bwd = [&](std::size_t i) {
    return (45.0 * x[i] - 154.0 * x[i - 1] + 214.0 * x[i - 2] - 156.0 * x[i - 3] + 61.0 * x[i - 4] -
            10.0 * x[i - 5]) * inv;
  };
  if (n >= 6) {
    d[0] = fwd(0);
    d[n - 1] = bwd(n - 1);
    d[1] = (10.0 * x[0] - 15.0 * x[1] - 4.0 * x[2] + 14.0 * x[3] - 6.0 * x[4] + x[5]) * inv;
    d[n - 2] = (10.0 * x[n - 1] - 15.0 * x[n - 2] - 4.0 * x[n - 3] + 14.0 * x[n - 4] - 6.0 * x[n - 5] +
                x[n - 6]) * inv;
  } else {
    d[0] = (35.0 * x[0] - 104.0 * x[1] + 114.0 * x[2] - 56.0 * x[3] + 11.0 * x[4]) * inv;
    d[1] = (11.0 * x[0] - 20.0 * x[1] + 6.0 * x[2] + 4.0 * x[3] - x[4]) * inv;
    d[n - 2] = (11.0 * x[n - 1] - 20.0 * x[n - 2] + 6.0 * x[n - 3] + 4.0 * x[n - 4] - x[n - 5]) * inv;
    d[n - 1] = (35.0 * x[n - 1] - 104.0 * x[n - 2] + 114.0 * x[n - 3] - 56.0 * x[n - 4] + 11.0 * x[n - 5]) * inv;
  }
  return d;
}

DipoleTrace second_derivative(const DipoleTrace& trace) {
  DipoleTrace out = trace;
  for (std::size_t c = 0; c < trace.channels(); ++c) {
    out.mx[c] = second_derivative(trace.mx[c], trace.dt);
    out.my[c] = second_derivative(trace.my[c], trace.dt);
  }
  return out;
}

double DetectionWindow::operator()(double t) const {
  return std::pow(2.0 / units::pi, 0.25) / std::sqrt(width) * std::exp(-(t * t) / (width * width));
}

std::vector<cplx> analytic_signal(std::span<const double> a) {
  const std::size_t n = a.size();
  if (n == 0) return {};
  std::size_t m = 1;
  while (m < 2 * n) m <<= 1;
  Fft1D plan(m);
  ComplexField buf(m, cplx{});
  for (std::size_t i = 0; i < n; ++i) buf[i] = a[i];
  plan.forward(buf.data());
  // Bins 1..m/2-1 hold e^{+i omega t}; keep the mirror bins (e^{-i omega t}).
  const double inv = 1.0 / static_cast<double>(m);
  buf[0] *= 0.5 * inv;
  buf[m / 2] *= 0.5 * inv;
  for (std::size_t k = 1; k < m / 2; ++k) buf[k] = 0.0;
  for (std::size_t k = m / 2 + 1; k < m; ++k) buf[k] *= inv;
  plan.backward(buf.data());
  return {buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(n)};
}

FilteredValue filtered_field(std::span<const cplx> a_plus, double t0, double dt, const DetectionWindow& window,
                             double omega, double t) {
  FilteredValue out{{0.0, 0.0}, false};
  const long n = static_cast<long>(a_plus.size());
  if (n == 0) return {{0.0, 0.0}, true};
  const double reach = window.support();
  const double t_end = t0 + dt * static_cast<double>(n - 1);
  if (t - window.edge_reach() < t0 || t + window.edge_reach() > t_end) out.edge = true;
  const long lo = std::max(0L, static_cast<long>(std::ceil((t - reach - t0) / dt)));
  const long hi = std::min(n - 1, static_cast<long>(std::floor((t + reach - t0) / dt)));
  if (lo > hi) return out;
  cplx acc{0.0, 0.0};
  // Phase advanced by rotation, re-seeded every 64 samples.
  const cplx rot = std::polar(1.0, omega * dt);
  cplx ph{};
  for (long i = lo; i <= hi; ++i) {
    const double ti = t0 + dt * static_cast<double>(i);
    if (((i - lo) & 63) == 0) ph = std::polar(1.0, omega * ti);
    acc += a_plus[static_cast<std::size_t>(i)] * window(t - ti) * ph;
    ph *= rot;
  }
  out.value = acc * dt;
  return out;
}

void SpectrogramSpec::validate() const {
  if (!(f_max > f_min) || f_min < 0.0) throw ValidationError("analysis frequency range must satisfy 0 <= f_min < f_max");
  if (n_freq < 2) throw ValidationError("analysis.n_freq must be >= 2");
  if (!(t_max >= t_min)) throw ValidationError("analysis time range is empty");
  if (!(t_step > 0.0)) throw ValidationError("analysis.t_step must be > 0");
  if (!(window > 0.0)) throw ValidationError("analysis.window must be > 0");
}

std::vector<double> SpectrogramSpec::frequencies() const {
  std::vector<double> f(n_freq);
  for (int i = 0; i < n_freq; ++i) f[i] = f_min + (f_max - f_min) * i / (n_freq - 1);
  return f;
}

std::vector<double> SpectrogramSpec::times() const {
  const long count = static_cast<long>(std::floor((t_max - t_min) / t_step + 1e-9)) + 1;
  std::vector<double> t(count);
  for (long i = 0; i < count; ++i) t[i] = t_min + t_step * static_cast<double>(i);
  return t;
}

double stokes_prefactor() {
  const double c = units::si::speed_of_light;
  return 1.0 / (6.0 * units::pi * units::pi * units::si::epsilon0 * c * c * c);
}

namespace {

template <class Fn>
void for_each_bin(const SpectrogramSpec& spec, Fn&& fn) {
  const auto times = spec.times();
  const auto freqs = spec.frequencies();
  for (std::size_t it = 0; it < times.size(); ++it)
    for (std::size_t jf = 0; jf < freqs.size(); ++jf) fn(it, jf, times[it], freqs[jf]);
}

std::vector<cplx> si_analytic(std::span<const double> a) {
  auto ap = analytic_signal(a);
  for (auto& v : ap) v *= kAccelToSi;
  return ap;
}

}  // namespace

Spectrogram stokes(std::span<const double> ax, std::span<const double> ay, double t0, double dt,
                   const SpectrogramSpec& spec) {
  spec.validate();
  if (ax.size() != ay.size()) throw ValidationError("stokes: component length mismatch");
  Spectrogram s;
  s.times = spec.times();
  s.frequencies = spec.frequencies();
  s.window = spec.window;
  const std::size_t total = s.nt() * s.nf();
  s.s0.assign(total, 0.0);
  s.s1.assign(total, 0.0);
  s.s2.assign(total, 0.0);
  s.s3.assign(total, 0.0);
  s.edge.assign(s.nt(), 0);

  const auto xp = si_analytic(ax);
  const auto yp = si_analytic(ay);
  const double K = stokes_prefactor();
  const DetectionWindow window{spec.window};
  // Time sums in seconds so that S carries SI units.
  for_each_bin(spec, [&](std::size_t it, std::size_t jf, double t, double f) {
    const double omega = 2.0 * units::pi * f;
    const auto X = filtered_field(xp, t0, dt, window, omega, t);
    const auto Y = filtered_field(yp, t0, dt, window, omega, t);
    const cplx x = X.value * std::sqrt(units::ps_to_s);
    const cplx y = Y.value * std::sqrt(units::ps_to_s);
    const double xx = std::norm(x), yy = std::norm(y);
    const cplx xy = std::conj(x) * y;
    const std::size_t k = s.index(it, jf);
    s.s0[k] = K * (xx + yy);
    s.s1[k] = K * (xx - yy);
    s.s2[k] = 2.0 * K * xy.real();
    s.s3[k] = 2.0 * K * xy.imag();
    if (X.edge || Y.edge) s.edge[it] = 1;
  });
  return s;
}

std::vector<Spectrogram> stokes(const DipoleTrace& accel, const SpectrogramSpec& spec) {
  std::vector<Spectrogram> out;
  for (std::size_t c = 0; c < accel.channels(); ++c) {
    auto s = stokes(accel.mx[c], accel.my[c], accel.t0, accel.dt, spec);
    s.ring_index = accel.ring_index[c];
    s.label = accel.labels[c];
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<double> wavelet_check(std::span<const double> ax, std::span<const double> ay, double t0, double dt,
                                  const SpectrogramSpec& spec, double cycles) {
  spec.validate();
  if (!(cycles > 0.0)) throw ValidationError("wavelet cycles must be > 0");
  const auto times = spec.times();
  const auto freqs = spec.frequencies();
  std::vector<double> out(times.size() * freqs.size(), 0.0);
  const auto xp = si_analytic(ax);
  const auto yp = si_analytic(ay);
  const double K = stokes_prefactor();
  for_each_bin(spec, [&](std::size_t it, std::size_t jf, double t, double f) {
    if (f <= 0.0) return;
    const double omega = 2.0 * units::pi * f;
    const double sigma = units::pi * cycles / (3.0 * omega);
    const DetectionWindow kernel{std::sqrt(2.0) * sigma};
    const auto X = filtered_field(xp, t0, dt, kernel, omega, t);
    const auto Y = filtered_field(yp, t0, dt, kernel, omega, t);
    out[it * freqs.size() + jf] = K * units::ps_to_s * (std::norm(X.value) + std::norm(Y.value));
  });
  return out;
}

double normalized_correlation(std::span<const double> a, std::span<const double> b,
                              std::span<const unsigned char> mask) {
  if (a.size() != b.size() || a.size() != mask.size()) throw ValidationError("correlation: size mismatch");
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (mask[i]) ma = std::max(ma, std::abs(a[i])), mb = std::max(mb, std::abs(b[i]));
  if (ma == 0.0 || mb == 0.0) return 0.0;
  double sa = 0.0, sb = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (mask[i]) sa += a[i] / ma, sb += b[i] / mb, ++n;
  const double mean_a = sa / n, mean_b = sb / n;
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!mask[i]) continue;
    const double da = a[i] / ma - mean_a, db = b[i] / mb - mean_b;
    cov += da * db;
    va += da * da;
    vb += db * db;
  }
  if (va == 0.0 || vb == 0.0) return 0.0;
  return cov / std::sqrt(va * vb);
}

SpectrogramPeak peak(const Spectrogram& s, bool skip_edges, double f_min) {
  SpectrogramPeak best;
  best.value = -1.0;
  for (std::size_t it = 0; it < s.nt(); ++it) {
    if (skip_edges && s.edge[it]) continue;
    for (std::size_t jf = 0; jf < s.nf(); ++jf) {
      if (s.frequencies[jf] < f_min) continue;
      const double v = s.s0[s.index(it, jf)];
      if (v > best.value) best = {s.times[it], s.frequencies[jf], v};
    }
  }
  if (best.value < 0.0) best.value = 0.0;
  return best;
}

std::vector<double> band_power(const Spectrogram& s, double f_lo, double f_hi) {
  std::vector<double> out(s.nt(), 0.0);
  for (std::size_t it = 0; it < s.nt(); ++it)
    for (std::size_t jf = 0; jf < s.nf(); ++jf)
      if (s.frequencies[jf] >= f_lo && s.frequencies[jf] <= f_hi) out[it] += s.s0[s.index(it, jf)];
  return out;
}

double quadrupole_moment(std::span<const double> density, const Grid2D& grid) {
  if (density.size() != grid.size()) throw ValidationError("density does not match the grid");
  double acc = 0.0;
  for (std::size_t k = 0; k < density.size(); ++k) acc += density[k] * grid.rho()[k] * grid.rho()[k];
  return -acc * grid.cell_area();
}

QuadrupoleDiagnostic quadrupole_diagnostic(const std::vector<double>& dzz_samples) {
  QuadrupoleDiagnostic d;
  d.dzz = dzz_samples;
  if (dzz_samples.empty()) return d;
  d.mean = std::accumulate(dzz_samples.begin(), dzz_samples.end(), 0.0) / static_cast<double>(dzz_samples.size());
  const auto [lo, hi] = std::minmax_element(dzz_samples.begin(), dzz_samples.end());
  d.amplitude = 0.5 * (*hi - *lo);
  return d;
}

}  // namespace qring
