#include "aggdiff/fracops.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <tuple>

#include "spectral_detail.hpp"

namespace aggdiff {

using detail::for_each_mode;
using detail::mode_weight;

namespace {

constexpr double kPi = std::numbers::pi;

double unit_ball_volume(int d) {
  return std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

// Cell average of c|z|^(-d+2s) over the volume-equivalent ball of one cell.
double singular_cell_average(int d, double s, double c, double h) {
  const double omega = unit_ball_volume(d);
  const double r_eq = h * std::pow(omega, -1.0 / d);
  const double hd = std::pow(h, d);
  return c * d * omega * std::pow(r_eq, 2.0 * s) / (2.0 * s * hd);
}

// Free-space kernel spectra are reused heavily; cache them per geometry.
struct KernelTableKey {
  int d;
  int n;
  double L;
  double s;
  double scale;
  bool operator<(const KernelTableKey& o) const {
    return std::tie(d, n, L, s, scale) < std::tie(o.d, o.n, o.L, o.s, o.scale);
  }
};

// Real part of the padded-table transform, with the h^d quadrature factor
// folded in. The kernel is even, so its spectrum is real.
const std::vector<double>& freespace_kernel_spectrum(const GridSpec& g,
                                                     const KernelSpec& k) {
  static std::mutex mtx;
  static std::map<KernelTableKey, std::unique_ptr<std::vector<double>>> cache;
  KernelTableKey key{g.d, g.n, g.L, k.s, k.norm_scale};
  std::lock_guard<std::mutex> lock(mtx);
  auto& slot = cache[key];
  if (slot) return *slot;

  const int m = k.pad * g.n;
  const double h = g.h();
  const double c = riesz_constant(g.d, k.s) * k.norm_scale;
  const double hd = g.cell_volume();
  SpectralWorkspace& ws = SpectralWorkspace::get(g.d, m);

  double* tab = ws.real();
  const double exponent = -g.d + 2.0 * k.s;
  std::size_t idx = 0;
  const int m1 = g.d >= 2 ? m : 1;
  const int m2 = g.d >= 3 ? m : 1;
  for (int i0 = 0; i0 < m; ++i0) {
    const double z0 = detail::wrapped_coord(i0, m, h);
    for (int i1 = 0; i1 < m1; ++i1) {
      const double z1 = g.d >= 2 ? detail::wrapped_coord(i1, m, h) : 0.0;
      for (int i2 = 0; i2 < m2; ++i2) {
        const double z2 = g.d >= 3 ? detail::wrapped_coord(i2, m, h) : 0.0;
        const double r2 = z0 * z0 + z1 * z1 + z2 * z2;
        tab[idx++] = r2 > 0.0 ? c * std::pow(r2, 0.5 * exponent)
                              : singular_cell_average(g.d, k.s, c, h);
      }
    }
  }
  ws.forward();

  auto out = std::make_unique<std::vector<double>>(ws.spectrum_size());
  const std::complex<double>* sp = ws.spectrum();
  for (std::size_t i = 0; i < out->size(); ++i) (*out)[i] = sp[i].real() * hd;
  slot = std::move(out);
  return *slot;
}

// Imaginary parts of the transforms of the analytically differentiated
// kernel, grad K(z) = c (2s-d) |z|^(-d-2+2s) z. Tabulating grad K keeps the
// physical-point values exact; differentiating the padded potential
// spectrally would leak the table's wrap seam back into the box. The odd
// tables have purely imaginary spectra.
const std::vector<std::vector<double>>& freespace_grad_kernel_spectra(
    const GridSpec& g, const KernelSpec& k) {
  static std::mutex mtx;
  static std::map<KernelTableKey,
                  std::unique_ptr<std::vector<std::vector<double>>>>
      cache;
  KernelTableKey key{g.d, g.n, g.L, k.s, k.norm_scale};
  std::lock_guard<std::mutex> lock(mtx);
  auto& slot = cache[key];
  if (slot) return *slot;

  const int m = k.pad * g.n;
  const double h = g.h();
  const double cg = riesz_grad_constant(g.d, k.s) * k.norm_scale;
  const double hd = g.cell_volume();
  SpectralWorkspace& ws = SpectralWorkspace::get(g.d, m);

  auto out = std::make_unique<std::vector<std::vector<double>>>();
  const double exponent = -g.d - 2.0 + 2.0 * k.s;
  const int m1 = g.d >= 2 ? m : 1;
  const int m2 = g.d >= 3 ? m : 1;
  for (int axis = 0; axis < g.d; ++axis) {
    double* tab = ws.real();
    std::size_t idx = 0;
    for (int i0 = 0; i0 < m; ++i0) {
      const double z0 = detail::wrapped_coord(i0, m, h);
      for (int i1 = 0; i1 < m1; ++i1) {
        const double z1 = g.d >= 2 ? detail::wrapped_coord(i1, m, h) : 0.0;
        for (int i2 = 0; i2 < m2; ++i2, ++idx) {
          const double z2 = g.d >= 3 ? detail::wrapped_coord(i2, m, h) : 0.0;
          // Nyquist planes are their own negation; zero keeps the table odd.
          if (i0 == m / 2 || (g.d >= 2 && i1 == m / 2) ||
              (g.d >= 3 && i2 == m / 2)) {
            tab[idx] = 0.0;
            continue;
          }
          const double r2 = z0 * z0 + z1 * z1 + z2 * z2;
          if (r2 == 0.0) {
            tab[idx] = 0.0; // odd kernel: the singular cell averages to zero
            continue;
          }
          const double za = axis == 0 ? z0 : (axis == 1 ? z1 : z2);
          tab[idx] = cg * std::pow(r2, 0.5 * exponent) * za;
        }
      }
    }
    ws.forward();
    const std::complex<double>* sp = ws.spectrum();
    std::vector<double> imag(ws.spectrum_size());
    for (std::size_t i = 0; i < imag.size(); ++i) imag[i] = sp[i].imag() * hd;
    out->push_back(std::move(imag));
  }
  slot = std::move(out);
  return *slot;
}

void check_input(const Field& u) {
  if (!all_finite(u)) throw std::invalid_argument("fracops: non-finite input field");
}

} // namespace

void KernelSpec::validate() const {
  if (d < 1 || d > 3) throw std::invalid_argument("KernelSpec: bad dimension");
  if (!(s > 0.0 && s < 0.5 * d))
    throw std::invalid_argument("KernelSpec: s must lie in (0, d/2)");
  if (mode == KernelMode::FreeSpace && pad < 2)
    throw std::invalid_argument("KernelSpec: FreeSpace requires pad >= 2");
}

double riesz_constant(int d, double s) {
  if (!(s > 0.0 && s < 0.5 * d))
    throw std::invalid_argument("riesz_constant: s outside (0, d/2)");
  return std::tgamma(0.5 * (d - 2.0 * s)) /
         (std::pow(kPi, 0.5 * d) * std::pow(2.0, 2.0 * s) * std::tgamma(s));
}

double riesz_grad_constant(int d, double s) {
  if (!(s > 0.0 && s < 0.5 * (d + 2)))
    throw std::invalid_argument("riesz_grad_constant: s outside (0, (d+2)/2)");
  return -2.0 * std::tgamma(0.5 * (d + 2.0 - 2.0 * s)) /
         (std::pow(kPi, 0.5 * d) * std::pow(2.0, 2.0 * s) * std::tgamma(s));
}

Field riesz_potential(const Field& u, const KernelSpec& k) {
  k.validate();
  check_input(u);
  const GridSpec& g = u.spec;
  if (g.d != k.d) throw std::invalid_argument("riesz_potential: dimension mismatch");

  Field out(g);
  if (k.mode == KernelMode::FreeSpace) {
    const std::vector<double>& khat = freespace_kernel_spectrum(g, k);
    SpectralWorkspace& ws = SpectralWorkspace::get(g.d, k.pad * g.n);
    detail::embed_padded(u, ws);
    ws.forward();
    std::complex<double>* sp = ws.spectrum();
    for (std::size_t i = 0; i < khat.size(); ++i) sp[i] *= khat[i];
    ws.backward();
    detail::crop_padded(ws, out);
  } else {
    SpectralWorkspace& ws = SpectralWorkspace::get(g.d, g.n);
    std::memcpy(ws.real(), u.values.data(), sizeof(double) * u.size());
    ws.forward();
    std::complex<double>* sp = ws.spectrum();
    const double xi0 = kPi / g.L;
    for_each_mode(g.d, g.n, [&](std::size_t f, int k0, int k1, int k2) {
      const double xi2 = xi0 * xi0 * (double(k0) * k0 + double(k1) * k1 + double(k2) * k2);
      sp[f] *= xi2 > 0.0 ? std::pow(xi2, -k.s) : 0.0;
    });
    ws.backward();
    std::memcpy(out.values.data(), ws.real(), sizeof(double) * out.size());
  }
  return out;
}

std::vector<Field> grad_riesz_potential(const Field& u, const KernelSpec& k) {
  k.validate();
  check_input(u);
  const GridSpec& g = u.spec;
  if (g.d != k.d)
    throw std::invalid_argument("grad_riesz_potential: dimension mismatch");

  std::vector<Field> grad;
  grad.reserve(g.d);

  if (k.mode == KernelMode::FreeSpace) {
    const auto& khat = freespace_grad_kernel_spectra(g, k);
    SpectralWorkspace& ws = SpectralWorkspace::get(g.d, k.pad * g.n);
    detail::embed_padded(u, ws);
    ws.forward();
    std::vector<std::complex<double>> uhat(ws.spectrum(),
                                           ws.spectrum() + ws.spectrum_size());
    for (int axis = 0; axis < g.d; ++axis) {
      std::complex<double>* sp = ws.spectrum();
      const std::vector<double>& gi = khat[axis];
      for (std::size_t i = 0; i < uhat.size(); ++i)
        sp[i] = std::complex<double>(-uhat[i].imag() * gi[i],
                                     uhat[i].real() * gi[i]);
      ws.backward();
      Field comp(g);
      detail::crop_padded(ws, comp);
      grad.push_back(std::move(comp));
    }
    return grad;
  }

  SpectralWorkspace& ws = SpectralWorkspace::get(g.d, g.n);
  std::memcpy(ws.real(), u.values.data(), sizeof(double) * u.size());
  ws.forward();

  // potential spectrum, kept across the d differentiations
  std::vector<std::complex<double>> pot(ws.spectrum_size());
  const double xi0 = kPi / g.L;
  {
    const std::complex<double>* sp = ws.spectrum();
    for_each_mode(g.d, g.n, [&](std::size_t f, int k0, int k1, int k2) {
      const double xi2 =
          xi0 * xi0 * (double(k0) * k0 + double(k1) * k1 + double(k2) * k2);
      pot[f] = xi2 > 0.0 ? sp[f] * std::pow(xi2, -k.s) : 0.0;
    });
  }

  for (int axis = 0; axis < g.d; ++axis) {
    std::complex<double>* sp = ws.spectrum();
    for_each_mode(g.d, g.n, [&](std::size_t f, int k0, int k1, int k2) {
      const int ka = axis == 0 ? k0 : (axis == 1 ? k1 : k2);
      // Nyquist mode of the differentiated axis is zeroed to keep the
      // derivative real-valued and odd.
      const double xi = (ka == g.n / 2) ? 0.0 : xi0 * ka;
      sp[f] = pot[f] * std::complex<double>(0.0, xi);
    });
    ws.backward();
    Field comp(g);
    std::memcpy(comp.values.data(), ws.real(), sizeof(double) * comp.size());
    grad.push_back(std::move(comp));
  }
  return grad;
}

namespace {

Field apply_power_symbol(const Field& u, double power_of_xi2) {
  const GridSpec& g = u.spec;
  SpectralWorkspace& ws = SpectralWorkspace::get(g.d, g.n);
  std::memcpy(ws.real(), u.values.data(), sizeof(double) * u.size());
  ws.forward();
  std::complex<double>* sp = ws.spectrum();
  const double xi0 = kPi / g.L;
  for_each_mode(g.d, g.n, [&](std::size_t f, int k0, int k1, int k2) {
    const double xi2 = xi0 * xi0 * (double(k0) * k0 + double(k1) * k1 + double(k2) * k2);
    sp[f] *= xi2 > 0.0 ? std::pow(xi2, power_of_xi2) : 0.0;
  });
  ws.backward();
  Field out(g);
  std::memcpy(out.values.data(), ws.real(), sizeof(double) * out.size());
  return out;
}

} // namespace

Field frac_laplacian(const Field& u, double r) {
  if (!(r > 0.0 && r <= 1.0))
    throw std::invalid_argument("frac_laplacian: r must lie in (0, 1]");
  check_input(u);
  return apply_power_symbol(u, r);
}

Field abs_grad_power(const Field& u, double r) {
  if (!(r >= 0.0)) throw std::invalid_argument("abs_grad_power: r must be >= 0");
  check_input(u);
  return apply_power_symbol(u, 0.5 * r);
}

double bilinear_form(const Field& v, const Field& w, double r) {
  if (!(r > 0.0 && r < 1.0))
    throw std::invalid_argument("bilinear_form: r must lie in (0, 1)");
  check_input(v);
  check_input(w);
  require_same_spec(v, w);
  const GridSpec& g = v.spec;

  SpectralWorkspace& ws = SpectralWorkspace::get(g.d, g.n);
  std::vector<std::complex<double>> vhat(ws.spectrum_size());
  std::memcpy(ws.real(), v.values.data(), sizeof(double) * v.size());
  ws.forward();
  std::memcpy(vhat.data(), ws.spectrum(), sizeof(std::complex<double>) * vhat.size());
  std::memcpy(ws.real(), w.values.data(), sizeof(double) * w.size());
  ws.forward();
  const std::complex<double>* what = ws.spectrum();

  const double xi0 = kPi / g.L;
  const double count = static_cast<double>(g.size());
  std::vector<double> terms(ws.spectrum_size());
  for_each_mode(g.d, g.n, [&](std::size_t f, int k0, int k1, int k2) {
    const double xi2 = xi0 * xi0 * (double(k0) * k0 + double(k1) * k1 + double(k2) * k2);
    const double sym = xi2 > 0.0 ? std::pow(xi2, r) : 0.0;
    const double re = vhat[f].real() * what[f].real() + vhat[f].imag() * what[f].imag();
    const int k_last = g.d == 1 ? k0 : (g.d == 2 ? k1 : k2);
    terms[f] = mode_weight(k_last, g.n) * sym * re;
  });
  return g.domain_volume() / (count * count) * pairwise_sum(terms);
}

} // namespace aggdiff
