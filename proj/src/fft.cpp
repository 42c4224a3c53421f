#include "aggdiff/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace aggdiff {

SpectralWorkspace::SpectralWorkspace(int d, int n) : d_(d), n_(n) {
  if (d < 1 || d > 3) throw std::invalid_argument("SpectralWorkspace: bad d");
  real_size_ = 1;
  for (int a = 0; a < d; ++a) real_size_ *= static_cast<std::size_t>(n);
  spec_size_ = real_size_ / static_cast<std::size_t>(n) *
               static_cast<std::size_t>(n / 2 + 1);

  real_ = fftw_alloc_real(real_size_);
  spec_ = reinterpret_cast<std::complex<double>*>(fftw_alloc_complex(spec_size_));
  if (!real_ || !spec_) throw std::bad_alloc();

  int dims[3] = {n, n, n};
  fftw_complex* c = reinterpret_cast<fftw_complex*>(spec_);
  plan_fwd_ = fftw_plan_dft_r2c(d, dims, real_, c, FFTW_ESTIMATE);
  plan_bwd_ = fftw_plan_dft_c2r(d, dims, c, real_, FFTW_ESTIMATE);
  if (!plan_fwd_ || !plan_bwd_)
    throw std::runtime_error("fftw plan creation failed");
}

SpectralWorkspace::~SpectralWorkspace() {
  if (plan_fwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  if (plan_bwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
  if (real_) fftw_free(real_);
  if (spec_) fftw_free(spec_);
}

void SpectralWorkspace::zero_real() {
  std::memset(real_, 0, real_size_ * sizeof(double));
}

void SpectralWorkspace::forward() {
  fftw_execute(static_cast<fftw_plan>(plan_fwd_));
}

void SpectralWorkspace::backward() {
  fftw_execute(static_cast<fftw_plan>(plan_bwd_));
  const double scale = 1.0 / static_cast<double>(real_size_);
  for (std::size_t i = 0; i < real_size_; ++i) real_[i] *= scale;
}

SpectralWorkspace& SpectralWorkspace::get(int d, int n) {
  static std::mutex mtx;
  static std::map<std::pair<int, int>, std::unique_ptr<SpectralWorkspace>> cache;
  std::lock_guard<std::mutex> lock(mtx);
  auto& slot = cache[{d, n}];
  if (!slot) slot = std::make_unique<SpectralWorkspace>(d, n);
  return *slot;
}

} // namespace aggdiff
