#include "aggdiff/drift.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "aggdiff/fracops.hpp"
#include "spectral_detail.hpp"

namespace aggdiff {

namespace {

void validate_regularizer(int d, double s, double epsilon) {
  if (d < 1 || d > 3) throw std::invalid_argument("RegularizerSpec: bad dimension");
  // s = d/2 is admitted: the grad-kernel prefactor stays finite there even
  // though the scalar potential normalization degenerates.
  if (!(s > 0.0 && s <= 0.5 * d))
    throw std::invalid_argument("RegularizerSpec: s must lie in (0, d/2]");
  if (!(epsilon > 0.0 && epsilon < 1.0 / std::sqrt(2.0)))
    throw std::invalid_argument(
        "RegularizerSpec: need 0 < epsilon < 1/sqrt(2) so the plateau "
        "[2eps, 1/eps] is nonempty");
}

// quintic smoothstep on [0,1]
double smoothstep5(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

double smoothstep5_prime(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  return 30.0 * t * t * (1.0 - t) * (1.0 - t);
}

} // namespace

RegularizerSpec::RegularizerSpec(int d_, double s_, double epsilon_)
    : d(d_), s(s_), epsilon(epsilon_) {
  validate_regularizer(d, s, epsilon);
  c_norm = riesz_grad_constant(d, s);
}

RegularizerSpec::RegularizerSpec(int d_, double s_, double epsilon_, double c_norm_)
    : d(d_), s(s_), epsilon(epsilon_), c_norm(c_norm_) {
  validate_regularizer(d, s, epsilon);
}

double zeta(double rho, const RegularizerSpec& spec) {
  if (!(rho >= 0.0)) throw std::invalid_argument("zeta: rho must be >= 0");
  const double e = spec.epsilon;
  if (rho <= e || rho >= 2.0 / e) return 0.0;
  if (rho < 2.0 * e) return smoothstep5((rho - e) / e);
  if (rho <= 1.0 / e) return 1.0;
  return 1.0 - smoothstep5((rho - 1.0 / e) * e);
}

double zeta_prime(double rho, const RegularizerSpec& spec) {
  if (!(rho >= 0.0)) throw std::invalid_argument("zeta_prime: rho must be >= 0");
  const double e = spec.epsilon;
  if (rho <= e || rho >= 2.0 / e) return 0.0;
  if (rho < 2.0 * e) return smoothstep5_prime((rho - e) / e) / e;
  if (rho <= 1.0 / e) return 0.0;
  return -smoothstep5_prime((rho - 1.0 / e) * e) * e;
}

DriftKernel::DriftKernel(const RegularizerSpec& spec, const GridSpec& g,
                         bool build_spectra)
    : spec_(spec), grid_(g), m_(2 * g.n) {
  if (g.d != spec.d) throw std::invalid_argument("DriftKernel: dimension mismatch");
  const double h = g.h();
  if (!(spec.epsilon >= 2.0 * h))
    throw std::invalid_argument("DriftKernel: cutoff epsilon < 2h is not resolved "
                                "by the grid");
  clamped_ = 2.0 / spec.epsilon > 2.0 * g.L;

  const int m = m_;
  const int m1 = g.d >= 2 ? m : 1;
  const int m2 = g.d >= 3 ? m : 1;
  std::size_t total = 1;
  for (int a = 0; a < g.d; ++a) total *= static_cast<std::size_t>(m);
  table_.assign(g.d, std::vector<double>(total, 0.0));

  const double cg = spec.c_norm;
  const double expo = -g.d - 2.0 + 2.0 * spec.s;
  std::size_t idx = 0;
  for (int i0 = 0; i0 < m; ++i0) {
    const double z0 = detail::wrapped_coord(i0, m, h);
    for (int i1 = 0; i1 < m1; ++i1) {
      const double z1 = g.d >= 2 ? detail::wrapped_coord(i1, m, h) : 0.0;
      for (int i2 = 0; i2 < m2; ++i2, ++idx) {
        const double z2 = g.d >= 3 ? detail::wrapped_coord(i2, m, h) : 0.0;
        // Nyquist planes are their own negation on the padded torus; they
        // must vanish for the table to be exactly odd.
        if (i0 == m / 2 || (g.d >= 2 && i1 == m / 2) || (g.d >= 3 && i2 == m / 2))
          continue;
        const double rho = std::sqrt(z0 * z0 + z1 * z1 + z2 * z2);
        const double zt = zeta(rho, spec);
        if (zt == 0.0) continue;
        const double mag = cg * zt * std::pow(rho, expo);
        table_[0][idx] = mag * z0;
        if (g.d >= 2) table_[1][idx] = mag * z1;
        if (g.d >= 3) table_[2][idx] = mag * z2;
      }
    }
  }

  if (!build_spectra) return;
  SpectralWorkspace& ws = SpectralWorkspace::get(g.d, m);
  const double hd = g.cell_volume();
  spec_imag_.assign(g.d, std::vector<double>(ws.spectrum_size()));
  for (int a = 0; a < g.d; ++a) {
    std::copy(table_[a].begin(), table_[a].end(), ws.real());
    ws.forward();
    const std::complex<double>* sp = ws.spectrum();
    for (std::size_t i = 0; i < spec_imag_[a].size(); ++i)
      spec_imag_[a][i] = sp[i].imag() * hd; // odd table -> purely imaginary
  }
}

std::vector<Field> DriftKernel::velocity(const Field& u) const {
  if (!(u.spec == grid_))
    throw std::invalid_argument("DriftKernel::velocity: grid mismatch");
  if (spec_imag_.empty())
    throw std::logic_error("DriftKernel built without spectra");
  SpectralWorkspace& ws = SpectralWorkspace::get(grid_.d, m_);
  detail::embed_padded(u, ws);
  ws.forward();
  std::vector<std::complex<double>> uhat(ws.spectrum(),
                                         ws.spectrum() + ws.spectrum_size());
  std::vector<Field> out;
  out.reserve(grid_.d);
  for (int a = 0; a < grid_.d; ++a) {
    std::complex<double>* sp = ws.spectrum();
    const std::vector<double>& gi = spec_imag_[a];
    for (std::size_t i = 0; i < uhat.size(); ++i) {
      // uhat * (i * gi): kernel spectrum is purely imaginary
      sp[i] = std::complex<double>(-uhat[i].imag() * gi[i],
                                   uhat[i].real() * gi[i]);
    }
    ws.backward();
    Field comp(grid_);
    detail::crop_padded(ws, comp);
    out.push_back(std::move(comp));
  }
  return out;
}

std::vector<Field> build_drift_kernel(const RegularizerSpec& spec,
                                      const GridSpec& g) {
  DriftKernel k(spec, g, /*build_spectra=*/false);
  GridSpec padded(g.d, k.padded_n(), 2.0 * g.L);
  std::vector<Field> out;
  out.reserve(g.d);
  for (int a = 0; a < g.d; ++a) {
    Field f(padded);
    f.values = k.table(a);
    out.push_back(std::move(f));
  }
  return out;
}

std::shared_ptr<const DriftKernel> get_drift_kernel(const RegularizerSpec& spec,
                                                    const GridSpec& g) {
  struct Key {
    int d, n;
    double L, s, eps, c;
    bool operator==(const Key&) const = default;
  };
  static std::mutex mtx;
  static std::deque<std::pair<Key, std::shared_ptr<const DriftKernel>>> lru;
  const Key key{g.d, g.n, g.L, spec.s, spec.epsilon, spec.c_norm};
  std::lock_guard<std::mutex> lock(mtx);
  for (auto& entry : lru)
    if (entry.first == key) return entry.second;
  auto built = std::make_shared<const DriftKernel>(spec, g);
  lru.emplace_front(key, built);
  // Tables at n=128 run to hundreds of MB; keep the cache shallow.
  while (lru.size() > 4) lru.pop_back();
  return built;
}

std::vector<Field> drift_velocity(const Field& u, const RegularizerSpec& spec) {
  if (!all_finite(u)) throw std::invalid_argument("drift_velocity: non-finite input");
  return get_drift_kernel(spec, u.spec)->velocity(u);
}

DivDecayReport verify_div_decay(const RegularizerSpec& base, const GridSpec& g,
                                const std::vector<double>& eps_list) {
  DivDecayReport report;
  report.epsilons = eps_list;
  const double h = g.h();
  const int d = g.d;
  const char* region_names[5] = {"inner", "ramp_in", "plateau", "ramp_out",
                                 "outer"};
  std::vector<std::array<double, 5>> region_C;

  for (double eps : eps_list) {
    RegularizerSpec spec(d, base.s, eps, base.c_norm);
    DriftKernel kern(spec, g, /*build_spectra=*/false);
    report.clamped_any = report.clamped_any || kern.clamped();
    const int m = kern.padded_n();
    const int m1 = d >= 2 ? m : 1;
    const int m2 = d >= 3 ? m : 1;
    std::size_t stride[3] = {1, 1, 1};
    if (d == 2) stride[0] = static_cast<std::size_t>(m);
    if (d == 3) {
      stride[1] = static_cast<std::size_t>(m);
      stride[0] = static_cast<std::size_t>(m) * m;
    }

    std::array<double, 5> C{};
    const double decay_expo = d + 2.0 - 2.0 * spec.s;
    std::size_t idx = 0;
    for (int i0 = 0; i0 < m; ++i0) {
      const double z0 = detail::wrapped_coord(i0, m, h);
      for (int i1 = 0; i1 < m1; ++i1) {
        const double z1 = d >= 2 ? detail::wrapped_coord(i1, m, h) : 0.0;
        for (int i2 = 0; i2 < m2; ++i2, ++idx) {
          const double z2 = d >= 3 ? detail::wrapped_coord(i2, m, h) : 0.0;
          // skip the artificial table edge near the Nyquist planes
          if (std::abs(z0) >= 2.0 * g.L - 2.0 * h ||
              (d >= 2 && std::abs(z1) >= 2.0 * g.L - 2.0 * h) ||
              (d >= 3 && std::abs(z2) >= 2.0 * g.L - 2.0 * h))
            continue;
          const double rho = std::sqrt(z0 * z0 + z1 * z1 + z2 * z2);
          if (rho < h) continue;

          double div = 0.0;
          const int ii[3] = {i0, i1, i2};
          for (int a = 0; a < d; ++a) {
            const std::size_t up =
                idx + (ii[a] + 1 < m ? stride[a] : stride[a] - stride[a] * m);
            const std::size_t dn =
                idx - (ii[a] > 0 ? stride[a] : stride[a] - stride[a] * m);
            div += (kern.table(a)[up] - kern.table(a)[dn]) / (2.0 * h);
          }
          const double ratio = std::abs(div) * std::pow(rho, decay_expo);

          int region;
          if (rho < eps - h)
            region = 0;
          else if (rho < 2.0 * eps + h)
            region = 1;
          else if (rho < 1.0 / eps - h)
            region = 2;
          else if (rho < 2.0 / eps + h)
            region = 3;
          else
            region = 4;
          C[region] = std::max(C[region], ratio);
        }
      }
    }
    region_C.push_back(C);
    report.overall_C.push_back(*std::max_element(C.begin(), C.end()));
  }

  // bounded across the sweep within a factor 2
  const double cmax =
      *std::max_element(report.overall_C.begin(), report.overall_C.end());
  const double cmin =
      *std::min_element(report.overall_C.begin(), report.overall_C.end());
  report.pass = cmin > 0.0 ? cmax / cmin < 2.0 : cmax == 0.0;

  for (std::size_t e = 0; e < eps_list.size(); ++e) {
    for (int r = 0; r < 5; ++r) {
      double rmax = 0.0, rmin = std::numeric_limits<double>::infinity();
      for (const auto& C : region_C) {
        rmax = std::max(rmax, C[r]);
        rmin = std::min(rmin, C[r]);
      }
      const bool row_pass = rmax == 0.0 || (rmin > 0.0 && rmax / rmin < 2.0) ||
                            rmax <= report.overall_C[e];
      report.rows.push_back(
          {eps_list[e], region_names[r], region_C[e][r], row_pass});
    }
  }
  return report;
}

std::string DivDecayReport::csv() const {
  std::ostringstream out;
  out << "epsilon,region,fitted_C,pass\n";
  out.precision(17);
  for (const auto& row : rows)
    out << row.epsilon << ',' << row.region << ',' << row.fitted_C << ','
        << (row.pass ? 1 : 0) << '\n';
  return out.str();
}

} // namespace aggdiff
