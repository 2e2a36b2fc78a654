#pragma once

// Thin RAII layer over FFTW. Plans are created with FFTW_ESTIMATE so the
// chosen algorithm, and hence every output bit, does not depend on timing.
// Execution is thread-safe; planning is serialized internally.

#include <complex>
#include <cstddef>
#include <memory>
#include <new>
#include <vector>

namespace qring {

using cplx = std::complex<double>;

namespace detail {
void* fft_alloc(std::size_t bytes);
void fft_free(void* p) noexcept;
}  // namespace detail

/// Allocator giving FFTW's preferred SIMD alignment.
template <class T>
struct FftAllocator {
  using value_type = T;
  FftAllocator() = default;
  template <class U>
  FftAllocator(const FftAllocator<U>&) noexcept {}
  T* allocate(std::size_t n) {
    if (void* p = detail::fft_alloc(n * sizeof(T))) return static_cast<T*>(p);
    throw std::bad_alloc();
  }
  void deallocate(T* p, std::size_t) noexcept { detail::fft_free(p); }
  template <class U>
  bool operator==(const FftAllocator<U>&) const noexcept { return true; }
};

using ComplexField = std::vector<cplx, FftAllocator<cplx>>;

/// Unnormalized in-place complex 2D transform on an ny x nx row-major array.
class Fft2D {
 public:
  Fft2D(int nx, int ny);
  ~Fft2D();
  Fft2D(const Fft2D&) = delete;
  Fft2D& operator=(const Fft2D&) = delete;

  void forward(cplx* data) const;
  void backward(cplx* data) const;
  [[nodiscard]] std::size_t size() const { return n_; }

 private:
  struct Plans;
  std::unique_ptr<Plans> plans_;
  std::size_t n_;
};

/// Unnormalized out-of-place-capable 1D complex transform.
class Fft1D {
 public:
  explicit Fft1D(std::size_t n);
  ~Fft1D();
  Fft1D(const Fft1D&) = delete;
  Fft1D& operator=(const Fft1D&) = delete;

  void forward(cplx* data) const;
  void backward(cplx* data) const;
  [[nodiscard]] std::size_t size() const { return n_; }

 private:
  struct Plans;
  std::unique_ptr<Plans> plans_;
  std::size_t n_;
};

/// Convenience: forward transform of a real sequence (copied into a buffer).
[[nodiscard]] std::vector<cplx> fft_real(const std::vector<double>& x);

}  // namespace qring
