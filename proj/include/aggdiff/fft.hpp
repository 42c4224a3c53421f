#pragma once

#include <complex>
#include <cstddef>

namespace aggdiff {

// One real<->half-complex transform pair on an n^d lattice, bound to its own
// fftw buffers so plan alignment is always consistent. Instances are cached
// per (d, n) and handed out by reference; a workspace must be used by one
// worker at a time (plan lookup itself is mutex-guarded).
//
// Plans are created with FFTW_ESTIMATE: planning is then a pure function of
// the shape, which keeps runs bit-reproducible on a given build.
class SpectralWorkspace {
 public:
  SpectralWorkspace(int d, int n);
  ~SpectralWorkspace();
  SpectralWorkspace(const SpectralWorkspace&) = delete;
  SpectralWorkspace& operator=(const SpectralWorkspace&) = delete;

  int dim() const { return d_; }
  int n() const { return n_; }
  std::size_t real_size() const { return real_size_; }
  std::size_t spectrum_size() const { return spec_size_; }
  int last_dim_half() const { return n_ / 2 + 1; }

  double* real() { return real_; }
  const double* real() const { return real_; }
  std::complex<double>* spectrum() { return spec_; }
  const std::complex<double>* spectrum() const { return spec_; }

  void zero_real();

  // real() -> spectrum(), unnormalized
  void forward();
  // spectrum() -> real(), scaled by 1/n^d; clobbers spectrum()
  void backward();

  static SpectralWorkspace& get(int d, int n);

 private:
  int d_;
  int n_;
  std::size_t real_size_;
  std::size_t spec_size_;
  double* real_ = nullptr;
  std::complex<double>* spec_ = nullptr;
  void* plan_fwd_ = nullptr;
  void* plan_bwd_ = nullptr;
};

// Signed lattice wavenumber for axis index k on an n-point axis.
inline int signed_mode(int k, int n) { return k <= n / 2 ? k : k - n; }

} // namespace aggdiff
