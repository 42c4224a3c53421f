#pragma once

// Internal helpers shared by the spectral modules: iteration over half-complex
// spectra with signed lattice modes, and zero-padded embed/crop between a
// field and a transform workspace.

#include <complex>
#include <cstring>

#include "aggdiff/fft.hpp"
#include "aggdiff/grid.hpp"

namespace aggdiff::detail {

// Visits every entry of a d-dimensional r2c spectrum (last axis halved).
// f(flat, k0, k1, k2): signed modes; unused trailing axes are 0.
template <class F>
void for_each_mode(int d, int n, F&& f) {
  const int nh = n / 2 + 1;
  std::size_t flat = 0;
  if (d == 1) {
    for (int k0 = 0; k0 < nh; ++k0) f(flat++, k0, 0, 0);
  } else if (d == 2) {
    for (int i0 = 0; i0 < n; ++i0) {
      const int k0 = signed_mode(i0, n);
      for (int k1 = 0; k1 < nh; ++k1) f(flat++, k0, k1, 0);
    }
  } else {
    for (int i0 = 0; i0 < n; ++i0) {
      const int k0 = signed_mode(i0, n);
      for (int i1 = 0; i1 < n; ++i1) {
        const int k1 = signed_mode(i1, n);
        for (int k2 = 0; k2 < nh; ++k2) f(flat++, k0, k1, k2);
      }
    }
  }
}

// Parseval weight of an r2c entry: interior last-axis modes represent a
// conjugate pair.
inline double mode_weight(int k_last, int n) {
  return (k_last == 0 || k_last == n / 2) ? 1.0 : 2.0;
}

// Copies an n^d field into the corner of an m^d workspace (m >= n), zero
// elsewhere.
inline void embed_padded(const Field& u, SpectralWorkspace& ws) {
  const int d = u.spec.d, n = u.spec.n, m = ws.n();
  ws.zero_real();
  double* dst = ws.real();
  const double* src = u.values.data();
  if (d == 1) {
    std::memcpy(dst, src, sizeof(double) * n);
  } else if (d == 2) {
    for (int i = 0; i < n; ++i)
      std::memcpy(dst + static_cast<std::size_t>(i) * m, src + static_cast<std::size_t>(i) * n,
                  sizeof(double) * n);
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        std::memcpy(dst + (static_cast<std::size_t>(i) * m + j) * m,
                    src + (static_cast<std::size_t>(i) * n + j) * n, sizeof(double) * n);
  }
}

// Inverse of embed_padded: reads the corner back out.
inline void crop_padded(const SpectralWorkspace& ws, Field& u) {
  const int d = u.spec.d, n = u.spec.n, m = ws.n();
  const double* src = ws.real();
  double* dst = u.values.data();
  if (d == 1) {
    std::memcpy(dst, src, sizeof(double) * n);
  } else if (d == 2) {
    for (int i = 0; i < n; ++i)
      std::memcpy(dst + static_cast<std::size_t>(i) * n, src + static_cast<std::size_t>(i) * m,
                  sizeof(double) * n);
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        std::memcpy(dst + (static_cast<std::size_t>(i) * n + j) * n,
                    src + (static_cast<std::size_t>(i) * m + j) * m, sizeof(double) * n);
  }
}

// Wrapped signed displacement coordinate for padded-lattice index j on an
// m-point axis with spacing h: j <= m/2 maps to +j*h, else to (j-m)*h.
inline double wrapped_coord(int j, int m, double h) {
  return (j <= m / 2 ? j : j - m) * h;
}

} // namespace aggdiff::detail
