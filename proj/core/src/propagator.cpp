#include "qring/propagator.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <thread>

#include "qring/array_io.hpp"
#include "qring/error.hpp"
#include "qring/units.hpp"

namespace qring {

namespace {
constexpr cplx I{0.0, 1.0};

std::vector<double> fft_wavenumbers(int n, double spacing) {
  std::vector<double> k(n);
  const double dk = 2.0 * units::pi / (n * spacing);
  for (int i = 0; i < n; ++i) k[i] = (i < (n + 1) / 2 ? i : i - n) * dk;
  return k;
}
}  // namespace

RelaxationModel parse_relaxation_model(const std::string& name) {
  if (name == "coherence") return RelaxationModel::Coherence;
  if (name == "literal") return RelaxationModel::Literal;
  throw ValidationError("unknown relaxation.model '" + name + "' (expected coherence or literal)");
}

std::string to_string(RelaxationModel model) {
  return model == RelaxationModel::Coherence ? "coherence" : "literal";
}

RelaxationSchedule parse_relaxation_schedule(const std::string& name) {
  if (name == "continuous") return RelaxationSchedule::Continuous;
  if (name == "after_pulse") return RelaxationSchedule::AfterPulse;
  if (name == "off") return RelaxationSchedule::Off;
  throw ValidationError("unknown relaxation.schedule '" + name +
                        "' (expected continuous, after_pulse or off)");
}

std::string to_string(RelaxationSchedule schedule) {
  switch (schedule) {
    case RelaxationSchedule::Continuous: return "continuous";
    case RelaxationSchedule::AfterPulse: return "after_pulse";
    case RelaxationSchedule::Off: return "off";
  }
  return "?";
}

double relax_occupation(double f, double target, double dt, double tau) {
  if (!(tau > 0.0)) throw DomainError("relaxation time must be > 0");
  return target + (f - target) * std::exp(-dt / tau);
}

void relax_occupations(EvolvingState& state, const Material& material, double dt, RelaxationModel model) {
  const double decay = std::exp(-dt / material.relaxation_time);
  if (model == RelaxationModel::Coherence) {
    // Coherent weights decay to zero; the lost weight reappears on the
    // equilibrium density, so sum_i f_i + background stays fixed.
    for (auto& o : state.orbitals) o.occupation *= decay;
    state.background = 1.0 - (1.0 - state.background) * decay;
  } else {
    for (auto& o : state.orbitals)
      o.occupation = relax_occupation(o.occupation, o.equilibrium, dt, material.relaxation_time);
  }
}

void ensemble_density(const EvolvingState& state, std::vector<double>& out) {
  std::size_t n = state.equilibrium_density.size();
  if (n == 0 && !state.orbitals.empty()) n = state.orbitals.front().psi.size();
  out.assign(n, 0.0);
  for (const auto& o : state.orbitals) {
    if (o.occupation == 0.0) continue;
    const double f = o.occupation;
    const cplx* p = o.psi.data();
    for (std::size_t k = 0; k < n; ++k) out[k] += f * std::norm(p[k]);
  }
  if (state.background != 0.0 && !state.equilibrium_density.empty())
    for (std::size_t k = 0; k < n; ++k) out[k] += state.background * state.equilibrium_density[k];
}

std::vector<double> ensemble_density(const EvolvingState& state) {
  std::vector<double> out;
  ensemble_density(state, out);
  return out;
}

struct Propagator::Workspace {
  explicit Workspace(std::size_t n, int dim) : basis(dim + 1, ComplexField(n)), w(n), kv_x(n), kv_y(n) {}
  std::vector<ComplexField> basis;
  ComplexField w, kv_x, kv_y;
};

Propagator::Propagator(const GridSpec& grid, RingStack stack, Material material, PulseSpec pulse,
                       PropagatorOptions options)
    : grid_(grid),
      stack_(std::move(stack)),
      material_(material),
      pulse_(pulse),
      options_(options),
      dt_(grid.dt_ps()),
      c_(material.kinetic_prefactor()),
      k_peak_(0.0),
      fft_(grid.nx, grid.ny) {
  stack_.validate();
  material_.validate();
  pulse_.normalize();
  if (options_.lanczos_max_dim < 2) throw ValidationError("lanczos_max_dim must be >= 2");

  const std::size_t n = grid_.size();
  const auto& spec = grid_.spec();
  k_peak_ = peak_wavevector_shift(pulse_);
  const double worst = k_peak_ * std::max(spec.dx(), spec.dy());
  if (worst > options_.max_phase_per_cell)
    throw AccuracyError("vector potential unresolved: k_A*dx = " + std::to_string(worst) +
                        " exceeds " + std::to_string(options_.max_phase_per_cell) +
                        "; refine the grid or lower pulse.coupling_scale");

  potential_.resize(n);
  beam_profile_.resize(n);
  mode_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    potential_[k] = potential(stack_, grid_.rho()[k]);
    mode_[k] = spatial_mode(pulse_, grid_.x()[k], grid_.y()[k]);
    beam_profile_[k] = std::abs(mode_[k]);
  }
  absorber_ = grid_.absorber_mask();

  const auto kx = fft_wavenumbers(spec.nx, spec.dx());
  const auto ky = fft_wavenumbers(spec.ny, spec.dy());
  kinetic_energy_.resize(n);
  kinetic_phase_.resize(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int j = 0; j < spec.ny; ++j)
    for (int i = 0; i < spec.nx; ++i) {
      const std::size_t k = static_cast<std::size_t>(j) * spec.nx + i;
      kinetic_energy_[k] = c_ * (kx[i] * kx[i] + ky[j] * ky[j]);
      kinetic_phase_[k] = std::polar(inv_n, -kinetic_energy_[k] * dt_ / units::hbar);
    }

  quarter_phase_.resize(n);
  kx_.assign(n, 0.0);
  ky_.assign(n, 0.0);
}

Propagator::~Propagator() {
  for (auto* w : workspaces_) delete w;
}

int Propagator::thread_count(std::size_t work) const {
  int t = options_.threads > 0 ? options_.threads : static_cast<int>(std::thread::hardware_concurrency());
  t = std::max(1, t);
  return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(t), std::max<std::size_t>(work, 1)));
}

bool Propagator::wavevector_field(double t, std::vector<double>& kx, std::vector<double>& ky) const {
  const std::size_t n = grid_.size();
  kx.assign(n, 0.0);
  ky.assign(n, 0.0);
  const cplx z = temporal_factor(pulse_, t);
  if (z == cplx{}) return false;
  const auto [ex, ey] = polarization_vector(pulse_.polarization);
  const cplx zx = k_peak_ * ex * z;
  const cplx zy = k_peak_ * ey * z;
  for (std::size_t k = 0; k < n; ++k) {
    kx[k] = std::real(zx * mode_[k]);
    ky[k] = std::real(zy * mode_[k]);
  }
  return true;
}

EvolvingState Propagator::initialize(const std::vector<Orbital>& orbitals) const {
  const std::size_t n = grid_.size();
  const double area = grid_.cell_area();
  const double inscribed = grid_.spec().extent - grid_.spec().absorber_width;
  const double norm2pi = 1.0 / std::sqrt(2.0 * units::pi);

  EvolvingState state;
  state.equilibrium_density.assign(n, 0.0);
  for (const auto& orb : orbitals) {
    if (orb.occupation < options_.occupation_cutoff) continue;
    if (orb.radial.empty()) throw ValidationError("orbital without radial profile");
    {
      const auto& rg = orb.radial.grid();
      const auto vals = orb.radial.values();
      double outside = 0.0;
      for (std::size_t j = 0; j < rg.size(); ++j)
        if (rg.rho(j) > inscribed) outside += vals[j] * vals[j] * rg.rho(j) * rg.spacing();
      if (outside > 1e-10)
        throw GeometryError("orbital (n0=" + std::to_string(orb.n0) + ", m0=" + std::to_string(orb.m0) +
                            ") extends beyond the grid interior (weight " + std::to_string(outside) + ")");
    }
    OrbitalState s;
    s.n0 = orb.n0;
    s.m0 = orb.m0;
    s.energy = orb.energy;
    s.equilibrium = orb.occupation;
    s.occupation = orb.occupation;
    s.psi.resize(n);
    double norm = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double r = orb.radial(grid_.rho()[k]) * norm2pi;
      s.psi[k] = orb.m0 == 0 ? cplx(r, 0.0) : std::polar(r, orb.m0 * grid_.phi()[k]);
      norm += std::norm(s.psi[k]);
    }
    norm *= area;
    s.embed_norm = norm;
    const double scale = 1.0 / std::sqrt(norm);
    for (auto& v : s.psi) v *= scale;

    double coupling = 0.0;
    for (std::size_t k = 0; k < n; ++k) coupling += std::norm(s.psi[k]) * beam_profile_[k] * beam_profile_[k];
    coupling = std::sqrt(coupling * area);
    s.frozen = options_.freeze_threshold > 0.0 && coupling < options_.freeze_threshold;

    for (std::size_t k = 0; k < n; ++k) state.equilibrium_density[k] += s.equilibrium * std::norm(s.psi[k]);
    state.orbitals.push_back(std::move(s));
  }
  if (state.orbitals.empty()) throw ValidationError("no orbital above the occupation cutoff");
  return state;
}

void Propagator::apply_w(const cplx* in, cplx* out, Workspace& ws) const {
  const auto& spec = grid_.spec();
  const int nx = spec.nx, ny = spec.ny;
  const std::size_t n = grid_.size();
  // W f = i c (D(k f) + k D f) with the 4th-order central difference
  // (D f)_i = (-f_{i+2} + 8 f_{i+1} - 8 f_{i-1} + f_{i-2}) / (12 h), periodic.
  // The factor i is applied at the end.
  const double cx = c_ / (12.0 * spec.dx());
  const double cy = c_ / (12.0 * spec.dy());
  cplx* kvx = ws.kv_x.data();
  cplx* kvy = ws.kv_y.data();
  const double* kx = kx_.data();
  const double* ky = ky_.data();
  for (std::size_t k = 0; k < n; ++k) out[k] = 0.0;

  if (has_x_) {
    for (std::size_t k = 0; k < n; ++k) kvx[k] = kx[k] * in[k];
    auto wrap = [nx](int i) { return i < 0 ? i + nx : (i >= nx ? i - nx : i); };
    for (int j = 0; j < ny; ++j) {
      const std::size_t row = static_cast<std::size_t>(j) * nx;
      const cplx* f = in + row;
      const cplx* g = kvx + row;
      const double* kr = kx + row;
      cplx* o = out + row;
      auto point = [&](int i, int ip1, int ip2, int im1, int im2) {
        const cplx dg = -g[ip2] + 8.0 * (g[ip1] - g[im1]) + g[im2];
        const cplx df = -f[ip2] + 8.0 * (f[ip1] - f[im1]) + f[im2];
        o[i] += cx * (dg + kr[i] * df);
      };
      for (int i : {0, 1, nx - 2, nx - 1}) point(i, wrap(i + 1), wrap(i + 2), wrap(i - 1), wrap(i - 2));
      for (int i = 2; i < nx - 2; ++i) point(i, i + 1, i + 2, i - 1, i - 2);
    }
  }
  if (has_y_) {
    for (std::size_t k = 0; k < n; ++k) kvy[k] = ky[k] * in[k];
    for (int j = 0; j < ny; ++j) {
      const std::size_t row = static_cast<std::size_t>(j) * nx;
      const std::size_t up1 = static_cast<std::size_t>((j + 1) % ny) * nx;
      const std::size_t up2 = static_cast<std::size_t>((j + 2) % ny) * nx;
      const std::size_t dn1 = static_cast<std::size_t>((j - 1 + ny) % ny) * nx;
      const std::size_t dn2 = static_cast<std::size_t>((j - 2 + ny) % ny) * nx;
      for (int i = 0; i < nx; ++i) {
        const cplx dg = -kvy[up2 + i] + 8.0 * (kvy[up1 + i] - kvy[dn1 + i]) + kvy[dn2 + i];
        const cplx df = -in[up2 + i] + 8.0 * (in[up1 + i] - in[dn1 + i]) + in[dn2 + i];
        out[row + i] += cy * (dg + ky[row + i] * df);
      }
    }
  }
  for (std::size_t k = 0; k < n; ++k) out[k] = cplx(-out[k].imag(), out[k].real());
}

void Propagator::expm_w(cplx* psi, double tau, Workspace& ws) const {
  // psi <- exp(-i tau W) psi by a three-term Lanczos recurrence. tau * ||W||
  // stays well below one at resolved field strengths, so the Krylov space is
  // a handful of vectors and orthogonality loss is at round-off level.
  const std::size_t n = grid_.size();
  const int max_dim = options_.lanczos_max_dim;
  double beta0 = 0.0;
  for (std::size_t k = 0; k < n; ++k) beta0 += std::norm(psi[k]);
  beta0 = std::sqrt(beta0);
  if (beta0 == 0.0) return;

  std::vector<double> alpha, beta;
  alpha.reserve(max_dim);
  beta.reserve(max_dim);
  {
    cplx* v0 = ws.basis[0].data();
    const double inv = 1.0 / beta0;
    for (std::size_t k = 0; k < n; ++k) v0[k] = psi[k] * inv;
  }
  Eigen::VectorXcd coeffs;
  int dim = 0;
  bool converged = false;
  for (int j = 0; j < max_dim; ++j) {
    const cplx* vj = ws.basis[j].data();
    cplx* w = ws.w.data();
    apply_w(vj, w, ws);
    if (j > 0) {
      const cplx* vp = ws.basis[j - 1].data();
      const double bp = beta[j - 1];
      for (std::size_t k = 0; k < n; ++k) w[k] -= bp * vp[k];
    }
    double a = 0.0;
    for (std::size_t k = 0; k < n; ++k) a += vj[k].real() * w[k].real() + vj[k].imag() * w[k].imag();
    alpha.push_back(a);
    double b = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      w[k] -= a * vj[k];
      b += std::norm(w[k]);
    }
    b = std::sqrt(b);
    dim = j + 1;

    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) {
      T(i, i) = alpha[i];
      if (i + 1 < dim) T(i, i + 1) = T(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    const Eigen::VectorXd& lam = es.eigenvalues();
    const Eigen::MatrixXd& U = es.eigenvectors();
    coeffs = Eigen::VectorXcd::Zero(dim);
    for (int q = 0; q < dim; ++q) {
      const cplx ph = std::polar(1.0, -tau * lam[q]) * U(0, q);
      for (int i = 0; i < dim; ++i) coeffs[i] += U(i, q) * ph;
    }
    const double err = b * std::abs(coeffs[dim - 1]);
    if (err < options_.lanczos_tolerance || b < 1e-300) {
      converged = true;
      break;
    }
    if (j + 1 >= max_dim) break;
    beta.push_back(b);
    cplx* next = ws.basis[j + 1].data();
    const double inv = 1.0 / b;
    for (std::size_t k = 0; k < n; ++k) next[k] = w[k] * inv;
  }
  if (!converged) throw SolverError("Lanczos exponential did not converge; reduce grid.dt");

  // The Krylov coefficients are renormalized so round-off in the basis does
  // not leak into the orbital norm.
  double cn = 0.0;
  for (int i = 0; i < dim; ++i) cn += std::norm(coeffs[i]);
  const double fix = beta0 / std::sqrt(cn);
  const cplx c0 = fix * coeffs[0];
  const cplx* v0 = ws.basis[0].data();
  for (std::size_t k = 0; k < n; ++k) psi[k] = c0 * v0[k];
  for (int i = 1; i < dim; ++i) {
    const cplx ci = fix * coeffs[i];
    const cplx* vi = ws.basis[i].data();
    for (std::size_t k = 0; k < n; ++k) psi[k] += ci * vi[k];
  }
}

void Propagator::advance_orbital(OrbitalState& orb, Workspace& ws) const {
  const std::size_t n = grid_.size();
  cplx* psi = orb.psi.data();
  if (orb.frozen) {
    const cplx ph = std::polar(1.0, -orb.energy * dt_ / units::hbar);
    for (std::size_t k = 0; k < n; ++k) psi[k] *= ph;
    return;
  }
  const cplx* q = quarter_phase_.data();
  const double tau_half = 0.5 * dt_ / units::hbar;
  auto half = [&] {
    if (field_on_) {
      for (std::size_t k = 0; k < n; ++k) psi[k] *= q[k];
      expm_w(psi, tau_half, ws);
      for (std::size_t k = 0; k < n; ++k) psi[k] *= q[k];
    } else {
      for (std::size_t k = 0; k < n; ++k) psi[k] *= q[k] * q[k];
    }
  };
  half();
  fft_.forward(psi);
  const cplx* kp = kinetic_phase_.data();
  for (std::size_t k = 0; k < n; ++k) psi[k] *= kp[k];
  fft_.backward(psi);
  half();
}

void Propagator::step(EvolvingState& state) {
  const std::size_t n = grid_.size();
  const double t_mid = state.time + 0.5 * dt_;
  field_on_ = wavevector_field(t_mid, kx_, ky_);
  has_x_ = field_on_ && std::any_of(kx_.begin(), kx_.end(), [](double v) { return v != 0.0; });
  has_y_ = field_on_ && std::any_of(ky_.begin(), ky_.end(), [](double v) { return v != 0.0; });
  field_on_ = has_x_ || has_y_;
  const double quarter = 0.25 * dt_ / units::hbar;
  for (std::size_t k = 0; k < n; ++k) {
    const double d = potential_[k] + c_ * (kx_[k] * kx_[k] + ky_[k] * ky_[k]);
    quarter_phase_[k] = std::polar(1.0, -d * quarter);
  }

  const std::size_t count = state.orbitals.size();
  const int nthreads = thread_count(count);
  while (static_cast<int>(workspaces_.size()) < nthreads)
    workspaces_.push_back(new Workspace(n, options_.lanczos_max_dim));

  std::vector<double> before(count);
  for (std::size_t i = 0; i < count; ++i) before[i] = norm_squared(state.orbitals[i].psi);

  std::vector<std::exception_ptr> errors(nthreads);
  auto worker = [&](int tid) {
    try {
      for (std::size_t i = tid; i < count; i += nthreads) advance_orbital(state.orbitals[i], *workspaces_[tid]);
    } catch (...) {
      errors[tid] = std::current_exception();
    }
  };
  if (nthreads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker, t);
    worker(0);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  const bool absorbing = grid_.spec().absorber_width > 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    auto& orb = state.orbitals[i];
    double after = norm_squared(orb.psi);
    if (!std::isfinite(after))
      throw DivergenceError("non-finite wavefunction (n0=" + std::to_string(orb.n0) +
                            ", m0=" + std::to_string(orb.m0) + ") at t = " + std::to_string(state.time) + " ps");
    const double step_drift = std::abs(after - before[i]);
    if (step_drift > options_.step_norm_tolerance)
      throw StabilityError("norm drift " + std::to_string(step_drift) + " in one step at t = " +
                           std::to_string(state.time) + " ps; reduce grid.dt");
    if (absorbing) {
      for (std::size_t k = 0; k < n; ++k) orb.psi[k] *= absorber_[k];
      const double absorbed_norm = norm_squared(orb.psi);
      state.absorbed += orb.equilibrium * (after - absorbed_norm);
    } else {
      orb.max_norm_drift = std::max(orb.max_norm_drift, std::abs(after - 1.0));
      if (orb.max_norm_drift > options_.norm_tolerance)
        throw StabilityError("cumulative norm drift " + std::to_string(orb.max_norm_drift) +
                             " exceeds tolerance; reduce grid.dt");
    }
  }

  const bool relax = options_.schedule == RelaxationSchedule::Continuous ||
                     (options_.schedule == RelaxationSchedule::AfterPulse && state.time >= pulse_.duration());
  if (relax) relax_occupations(state, material_, dt_, options_.relaxation);
  state.time += dt_;
  ++state.step_index;
}

void Propagator::run_until(EvolvingState& state, double t_end) {
  while (state.time + 0.5 * dt_ < t_end) step(state);
}

double Propagator::norm_squared(const ComplexField& psi) const {
  double acc = 0.0;
  for (const auto& v : psi) acc += std::norm(v);
  return acc * grid_.cell_area();
}

cplx Propagator::overlap(const ComplexField& a, const ComplexField& b) const {
  cplx acc{0.0, 0.0};
  for (std::size_t k = 0; k < a.size(); ++k) acc += std::conj(a[k]) * b[k];
  return acc * grid_.cell_area();
}

double Propagator::angular_momentum(const ComplexField& psi) const {
  const auto& spec = grid_.spec();
  const std::size_t n = grid_.size();
  const auto kx = fft_wavenumbers(spec.nx, spec.dx());
  const auto ky = fft_wavenumbers(spec.ny, spec.dy());
  ComplexField dx(psi.begin(), psi.end()), dy(psi.begin(), psi.end());
  fft_.forward(dx.data());
  fft_.forward(dy.data());
  for (int j = 0; j < spec.ny; ++j)
    for (int i = 0; i < spec.nx; ++i) {
      const std::size_t k = static_cast<std::size_t>(j) * spec.nx + i;
      dx[k] *= I * kx[i] / static_cast<double>(n);
      dy[k] *= I * ky[j] / static_cast<double>(n);
    }
  fft_.backward(dx.data());
  fft_.backward(dy.data());
  cplx acc{0.0, 0.0};
  for (std::size_t k = 0; k < n; ++k)
    acc += std::conj(psi[k]) * (-I) * (grid_.x()[k] * dy[k] - grid_.y()[k] * dx[k]);
  return std::real(acc) * grid_.cell_area();
}

double Propagator::field_free_energy(const ComplexField& psi) const {
  const std::size_t n = grid_.size();
  ComplexField t(psi.begin(), psi.end());
  fft_.forward(t.data());
  double kin = 0.0;
  for (std::size_t k = 0; k < n; ++k) kin += kinetic_energy_[k] * std::norm(t[k]);
  kin /= static_cast<double>(n);
  double pot = 0.0;
  for (std::size_t k = 0; k < n; ++k) pot += potential_[k] * std::norm(psi[k]);
  return (kin + pot) * grid_.cell_area();
}

void save_checkpoint(const EvolvingState& state, const GridSpec& grid, const std::string& dir,
                     const std::string& scenario_hash) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const std::size_t count = state.orbitals.size();
  std::vector<double> fields;
  fields.reserve(count * grid.points() * 2);
  std::vector<double> table;
  for (const auto& o : state.orbitals) {
    for (const auto& v : o.psi) {
      fields.push_back(v.real());
      fields.push_back(v.imag());
    }
    table.insert(table.end(), {double(o.n0), double(o.m0), o.energy, o.equilibrium, o.occupation,
                               o.frozen ? 1.0 : 0.0, o.max_norm_drift});
  }
  ArrayMeta fm;
  fm.dims = {count, static_cast<std::size_t>(grid.ny), static_cast<std::size_t>(grid.nx), 2};
  fm.axes = {{"orbital", "", 0.0, double(count), count},
             {"y", "nm", grid.y(0), grid.y(grid.ny - 1), static_cast<std::size_t>(grid.ny)},
             {"x", "nm", grid.x(0), grid.x(grid.nx - 1), static_cast<std::size_t>(grid.nx)},
             {"component", "", 0.0, 1.0, 2}};
  fm.quantity = "orbital_fields";
  fm.units = "nm^-1";
  fm.scenario_hash = scenario_hash;
  fm.extra = {{"time_ps", state.time},
              {"step_index", state.step_index},
              {"background", state.background},
              {"absorbed", state.absorbed}};
  write_array(fs::path(dir) / "orbital_fields", fields, fm);

  ArrayMeta tm;
  tm.dims = {count, 7};
  tm.axes = {{"orbital", "", 0.0, double(count), count}, {"column", "", 0.0, 6.0, 7}};
  tm.quantity = "orbital_table";
  tm.scenario_hash = scenario_hash;
  tm.extra = {{"columns", {"n0", "m0", "energy_meV", "f0", "f", "frozen", "max_norm_drift"}}};
  write_array(fs::path(dir) / "orbital_table", table, tm);

  ArrayMeta em;
  em.dims = {static_cast<std::size_t>(grid.ny), static_cast<std::size_t>(grid.nx)};
  em.axes = {fm.axes[1], fm.axes[2]};
  em.quantity = "equilibrium_density";
  em.units = "nm^-2";
  em.scenario_hash = scenario_hash;
  write_array(fs::path(dir) / "equilibrium_density", state.equilibrium_density, em);
}

EvolvingState load_checkpoint(const std::string& dir) {
  namespace fs = std::filesystem;
  const auto fields = read_array(fs::path(dir) / "orbital_fields");
  const auto table = read_array(fs::path(dir) / "orbital_table");
  const auto eq = read_array(fs::path(dir) / "equilibrium_density");
  if (fields.meta.dims.size() != 4 || table.meta.dims.size() != 2 || table.meta.dims[1] != 7 ||
      fields.meta.dims[0] != table.meta.dims[0])
    throw ValidationError("inconsistent checkpoint in " + dir);
  const std::size_t count = fields.meta.dims[0];
  const std::size_t n = fields.meta.dims[1] * fields.meta.dims[2];
  EvolvingState state;
  state.time = fields.meta.extra.at("time_ps");
  state.step_index = fields.meta.extra.at("step_index");
  state.background = fields.meta.extra.at("background");
  state.absorbed = fields.meta.extra.at("absorbed");
  state.equilibrium_density = eq.data;
  for (std::size_t i = 0; i < count; ++i) {
    OrbitalState o;
    const double* row = table.data.data() + 7 * i;
    o.n0 = static_cast<int>(row[0]);
    o.m0 = static_cast<int>(row[1]);
    o.energy = row[2];
    o.equilibrium = row[3];
    o.occupation = row[4];
    o.frozen = row[5] != 0.0;
    o.max_norm_drift = row[6];
    o.psi.resize(n);
    const double* src = fields.data.data() + 2 * n * i;
    for (std::size_t k = 0; k < n; ++k) o.psi[k] = {src[2 * k], src[2 * k + 1]};
    state.orbitals.push_back(std::move(o));
  }
  return state;
}

}  // namespace qring
