#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <new>
#include <utility>
#include <vector>

#include "pens/grid.hpp"

namespace pens {

// SIMD-aligned storage so a single cached plan may execute on any buffer.
template <class T>
struct FftwAllocator {
  using value_type = T;
  FftwAllocator() = default;
  template <class U>
  FftwAllocator(const FftwAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) {
    if (n == 0) return nullptr;
    void* p = fftw_malloc(n * sizeof(T));
    if (!p) throw std::bad_alloc();
    return static_cast<T*>(p);
  }
  void deallocate(T* p, std::size_t) noexcept { fftw_free(p); }

  template <class U>
  bool operator==(const FftwAllocator<U>&) const noexcept { return true; }
};

using RealBuffer = std::vector<double, FftwAllocator<double>>;
using ComplexBuffer = std::vector<std::complex<double>, FftwAllocator<std::complex<double>>>;

namespace detail {

class FftPlans {
 public:
  FftPlans(const FftPlans&) = delete;
  FftPlans& operator=(const FftPlans&) = delete;

  explicit FftPlans(const Grid& g) {
    RealBuffer r(g.physical_size());
    ComplexBuffer c(g.spectral_size());
    const int N = g.modes();
    auto* cp = reinterpret_cast<fftw_complex*>(c.data());
    // FFTW_ESTIMATE keeps plan selection independent of timing, so results
    // are bitwise reproducible run to run.
    if (g.dim() == 3) {
      forward_ = fftw_plan_dft_r2c_3d(N, N, N, r.data(), cp, FFTW_ESTIMATE);
      inverse_ = fftw_plan_dft_c2r_3d(N, N, N, cp, r.data(), FFTW_ESTIMATE);
    } else {
      forward_ = fftw_plan_dft_r2c_2d(N, N, r.data(), cp, FFTW_ESTIMATE);
      inverse_ = fftw_plan_dft_c2r_2d(N, N, cp, r.data(), FFTW_ESTIMATE);
    }
  }
  // Plans are cached for the process lifetime and released at exit.
  ~FftPlans() {
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(inverse_);
  }

  // Unnormalized r2c; `in` is preserved.
  void forward(const double* in, std::complex<double>* out) const {
    fftw_execute_dft_r2c(forward_, const_cast<double*>(in), reinterpret_cast<fftw_complex*>(out));
  }
  // Unnormalized c2r; destroys `in`.
  void inverse(std::complex<double>* in, double* out) const {
    fftw_execute_dft_c2r(inverse_, reinterpret_cast<fftw_complex*>(in), out);
  }

  static std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
  }

 private:
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
};

// FFTW planning is not thread-safe; execution of an existing plan is.
inline std::shared_ptr<const FftPlans> plans_for(const Grid& g) {
  static std::map<std::pair<int, int>, std::shared_ptr<const FftPlans>> cache;
  std::lock_guard lock(FftPlans::planner_mutex());
  auto key = std::make_pair(g.dim(), g.modes());
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto p = std::make_shared<const FftPlans>(g);
  cache.emplace(key, p);
  return p;
}

}  // namespace detail
}  // namespace pens
