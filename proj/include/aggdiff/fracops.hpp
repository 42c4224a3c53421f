#pragma once

#include <vector>

#include "aggdiff/grid.hpp"

namespace aggdiff {

enum class KernelMode { Periodic, FreeSpace };

// Parameters of the interaction kernel |z|^(-d+2s) and of the spectral
// realizations of (-Delta)^(-s). Normalization is defined in Fourier space:
// the operator has symbol |xi|^(-2s), and the free-space table carries the
// real-space constant that reproduces that symbol.
struct KernelSpec {
  int d = 3;
  double s = 1.0;
  KernelMode mode = KernelMode::FreeSpace;
  int pad = 2;            // linear padding factor for free-space transforms
  double norm_scale = 1.0; // test hook: deliberately mis-scales the kernel

  void validate() const; // throws std::invalid_argument outside 0 < s < d/2
};

// Real-space constant c with  (-Delta)^(-s) u = c * |z|^(-d+2s) * u,
// i.e. the inverse of  pi^(d/2) 2^(2s) Gamma(s)/Gamma((d-2s)/2).
double riesz_constant(int d, double s);

// Prefactor of grad K_s(z) = cg |z|^(-d-2+2s) z. Equals c*(2s-d) but is
// computed through Gamma((d+2-2s)/2), which stays finite through s = d/2.
double riesz_grad_constant(int d, double s);

// Discrete K_s * u.
//  FreeSpace: convolution with the tabulated kernel on a pad*n lattice; the
//  singular cell takes the analytic average of the kernel over the
//  volume-equivalent ball.
//  Periodic: multiplication by |xi|^(-2s) with the mean zeroed, so the result
//  is the potential of the mean-free part only.
Field riesz_potential(const Field& u, const KernelSpec& k);

// grad(K_s * u) by spectral differentiation of the potential
// (symbol i xi |xi|^(-2s)). Intended use is s > 1/2.
std::vector<Field> grad_riesz_potential(const Field& u, const KernelSpec& k);

// (-Delta)^r u, symbol |xi|^(2r), r in (0, 1].
Field frac_laplacian(const Field& u, double r);

// |grad|^r u, symbol |xi|^r, r >= 0; the mean mode is always zeroed.
Field abs_grad_power(const Field& u, double r);

// <(-Delta)^r v, w> computed spectrally, r in (0, 1). Symmetric in (v, w)
// by construction.
double bilinear_form(const Field& v, const Field& w, double r);

} // namespace aggdiff
