#include "qring/fft.hpp"

#include <fftw3.h>

#include <mutex>

#include "qring/error.hpp"

namespace qring {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }
}  // namespace

namespace detail {
void* fft_alloc(std::size_t bytes) { return fftw_malloc(bytes); }
void fft_free(void* p) noexcept { fftw_free(p); }
}  // namespace detail

struct Fft2D::Plans {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

Fft2D::Fft2D(int nx, int ny) : plans_(std::make_unique<Plans>()), n_(static_cast<std::size_t>(nx) * ny) {
  ComplexField scratch(n_);
  std::lock_guard lock(planner_mutex());
  plans_->fwd = fftw_plan_dft_2d(ny, nx, as_fftw(scratch.data()), as_fftw(scratch.data()), FFTW_FORWARD,
                                 FFTW_ESTIMATE);
  plans_->bwd = fftw_plan_dft_2d(ny, nx, as_fftw(scratch.data()), as_fftw(scratch.data()), FFTW_BACKWARD,
                                 FFTW_ESTIMATE);
  if (!plans_->fwd || !plans_->bwd) throw SolverError("FFTW failed to create a 2D plan");
}

Fft2D::~Fft2D() {
  std::lock_guard lock(planner_mutex());
  if (plans_->fwd) fftw_destroy_plan(plans_->fwd);
  if (plans_->bwd) fftw_destroy_plan(plans_->bwd);
}

void Fft2D::forward(cplx* data) const { fftw_execute_dft(plans_->fwd, as_fftw(data), as_fftw(data)); }
void Fft2D::backward(cplx* data) const { fftw_execute_dft(plans_->bwd, as_fftw(data), as_fftw(data)); }

struct Fft1D::Plans {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

Fft1D::Fft1D(std::size_t n) : plans_(std::make_unique<Plans>()), n_(n) {
  ComplexField scratch(n_);
  std::lock_guard lock(planner_mutex());
  const int len = static_cast<int>(n);
  plans_->fwd = fftw_plan_dft_1d(len, as_fftw(scratch.data()), as_fftw(scratch.data()), FFTW_FORWARD,
                                 FFTW_ESTIMATE);
  plans_->bwd = fftw_plan_dft_1d(len, as_fftw(scratch.data()), as_fftw(scratch.data()), FFTW_BACKWARD,
                                 FFTW_ESTIMATE);
  if (!plans_->fwd || !plans_->bwd) throw SolverError("FFTW failed to create a 1D plan");
}

Fft1D::~Fft1D() {
  std::lock_guard lock(planner_mutex());
  if (plans_->fwd) fftw_destroy_plan(plans_->fwd);
  if (plans_->bwd) fftw_destroy_plan(plans_->bwd);
}

void Fft1D::forward(cplx* data) const { fftw_execute_dft(plans_->fwd, as_fftw(data), as_fftw(data)); }
void Fft1D::backward(cplx* data) const { fftw_execute_dft(plans_->bwd, as_fftw(data), as_fftw(data)); }

std::vector<cplx> fft_real(const std::vector<double>& x) {
  Fft1D plan(x.size());
  ComplexField buf(x.begin(), x.end());
  plan.forward(buf.data());
  return {buf.begin(), buf.end()};
}

}  // namespace qring
