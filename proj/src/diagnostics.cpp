#include "aggdiff/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "aggdiff/exponents.hpp"
#include "aggdiff/fft.hpp"
#include "aggdiff/fracops.hpp"
#include "aggdiff/solver.hpp"
#include "spectral_detail.hpp"

namespace aggdiff {

RegimeParams classify(int d, double m, double s) {
  if (d < 1 || d > 3) throw std::invalid_argument("classify: d must be 1, 2 or 3");
  if (!(m > 1.0)) throw std::invalid_argument("classify: m must exceed 1");
  if (!(s > 0.0 && s <= 0.5 * d))
    throw std::invalid_argument("classify: s must lie in (0, d/2]");

  RegimeParams r;
  r.d = d;
  r.m = m;
  r.s = s;
  r.m_c = 2.0 - 2.0 * s / d;
  r.subcritical = subcritical_exact(d, rat_from_double(m), rat_from_double(s));

  if (!r.subcritical) {
    r.case_tag = RegimeCase::Unsupported;
    r.note = m == r.m_c ? "critical: behaviour decided by the initial mass"
                        : "supercritical: finite time blow-up possible";
    return r;
  }
  if (s > 1.0) {
    r.case_tag = RegimeCase::S_large;
  } else if (s > 0.5) {
    r.case_tag = m < 2.0 ? RegimeCase::S_half_m_lt2 : RegimeCase::S_half_m_ge2;
  } else if (m < 2.0) {
    r.case_tag = RegimeCase::S_small_m_lt2;
  } else {
    r.case_tag = RegimeCase::Unsupported;
    r.note = "boundedness open for m >= 2 with s <= 1/2";
  }
  if (r.note.empty()) {
    if (s <= 1.0) r.note = "uniqueness open for s <= 1";
    if (s <= 0.5) r.note += (r.note.empty() ? "" : "; ") +
                            std::string("regularity open for s <= 1/2");
  }
  return r;
}

const char* regime_case_name(RegimeCase c) {
  switch (c) {
    case RegimeCase::S_half_m_lt2: return "S_half_m_lt2";
    case RegimeCase::S_half_m_ge2: return "S_half_m_ge2";
    case RegimeCase::S_small_m_lt2: return "S_small_m_lt2";
    case RegimeCase::S_large: return "S_large";
    case RegimeCase::Unsupported: return "Unsupported";
  }
  return "?";
}

double hminus1_distance(const Field& u1, const Field& u2) {
  require_same_spec(u1, u2);
  const double m1 = integrate(u1), m2 = integrate(u2);
  const double scale = std::max({std::abs(m1), std::abs(m2), 1.0});
  if (std::abs(m1 - m2) > 1e-8 * scale)
    throw std::invalid_argument(
        "hminus1_distance: masses differ; the difference must be mean-free");

  const GridSpec& g = u1.spec;
  SpectralWorkspace& ws = SpectralWorkspace::get(g.d, g.n);
  for (std::size_t i = 0; i < g.size(); ++i)
    ws.real()[i] = u1.values[i] - u2.values[i];
  ws.forward();

  const std::complex<double>* sp = ws.spectrum();
  const double xi0 = std::numbers::pi / g.L;
  const double count = static_cast<double>(g.size());
  std::vector<double> terms(ws.spectrum_size(), 0.0);
  detail::for_each_mode(g.d, g.n, [&](std::size_t f, int k0, int k1, int k2) {
    const double xi2 = xi0 * xi0 * (double(k0) * k0 + double(k1) * k1 + double(k2) * k2);
    if (xi2 == 0.0) return;
    const int k_last = g.d == 1 ? k0 : (g.d == 2 ? k1 : k2);
    terms[f] = detail::mode_weight(k_last, g.n) * std::norm(sp[f]) / xi2;
  });
  return g.domain_volume() / (count * count) * pairwise_sum(terms);
}

double gn_check(const Field& u, double s_ord, double p, double r, double q,
                double alpha) {
  if (!(p >= 1.0 && r >= 1.0 && q >= 1.0))
    throw std::invalid_argument("gn_check: exponents must be >= 1");
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw std::invalid_argument("gn_check: alpha must lie in [0, 1]");
  const double lhs = 1.0 / p;
  const double rhs = s_ord / u.spec.d + (1.0 / r - 1.0 / u.spec.d) * alpha +
                     (1.0 - alpha) / q;
  if (std::abs(lhs - rhs) > 1e-12)
    throw std::invalid_argument(
        "gn_check: exponents violate the interpolation balance");

  const Field num_field = s_ord > 0.0 ? abs_grad_power(u, s_ord) : u;
  const double num = lp_norm(num_field, p);

  const std::vector<Field> grad = gradient_fd(u);
  Field grad_mag(u.spec);
  for (std::size_t i = 0; i < u.size(); ++i) {
    double acc = 0.0;
    for (const Field& c : grad) acc += c.values[i] * c.values[i];
    grad_mag.values[i] = std::sqrt(acc);
  }
  const double den = std::pow(lp_norm(grad_mag, r), alpha) *
                     std::pow(lp_norm(u, q), 1.0 - alpha);
  if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return num / den;
}

namespace {

double percentile(std::vector<double>& sorted_values, double q) {
  const std::size_t n = sorted_values.size();
  const double pos = q * static_cast<double>(n - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, n - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted_values[lo] * (1.0 - frac) + sorted_values[hi] * frac;
}

} // namespace

OscillationReport oscillation_decay(const std::vector<Snapshot>& snaps, double m,
                                    const OscillationParams& params) {
  OscillationReport report;
  if (snaps.empty()) throw std::invalid_argument("oscillation_decay: no snapshots");
  const GridSpec& g = snaps.front().field.spec;
  const double h = g.h();

  const double r_min = std::pow(params.a, params.k_max) * params.r0;
  if (r_min < 4.0 * h) {
    report.sufficient_resolution = false;
    report.note = "smallest cylinder radius below 4h; refine the grid or "
                  "shrink k_max";
  }

  for (int k = 0; k <= params.k_max; ++k) {
    const double rk = std::pow(params.a, k) * params.r0;
    const double tk = std::pow(params.b, 2 * k) * rk * rk;
    std::vector<double> samples;
    for (const Snapshot& snap : snaps) {
      if (snap.t > tk + 1e-14) continue;
      const int n = g.n;
      const int n1 = g.d >= 2 ? n : 1;
      const int n2 = g.d >= 3 ? n : 1;
      std::size_t idx = 0;
      for (int i0 = 0; i0 < n; ++i0) {
        const double x0 = g.coord(i0) - params.center[0];
        for (int i1 = 0; i1 < n1; ++i1) {
          const double x1 = g.d >= 2 ? g.coord(i1) - params.center[1] : 0.0;
          for (int i2 = 0; i2 < n2; ++i2, ++idx) {
            const double x2 = g.d >= 3 ? g.coord(i2) - params.center[2] : 0.0;
            if (x0 * x0 + x1 * x1 + x2 * x2 > rk * rk) continue;
            const double u = snap.field.values[idx];
            samples.push_back(std::pow(u > 0.0 ? u : 0.0, m));
          }
        }
      }
    }
    report.radius.push_back(rk);
    report.time_height.push_back(tk);
    report.samples.push_back(samples.size());
    if (samples.size() < 2) {
      report.sufficient_resolution = false;
      report.note = "a cylinder holds fewer than 2 samples";
      report.osc_percentile.push_back(0.0);
      report.osc_exact.push_back(0.0);
      continue;
    }
    std::sort(samples.begin(), samples.end());
    report.osc_exact.push_back(samples.back() - samples.front());
    report.osc_percentile.push_back(percentile(samples, 0.98) -
                                    percentile(samples, 0.02));
  }

  // least-squares slope of log osc against k gives the per-level decay
  std::vector<double> xs, ys;
  for (int k = 0; k <= params.k_max; ++k) {
    if (report.osc_percentile[k] > 0.0) {
      xs.push_back(k);
      ys.push_back(std::log(report.osc_percentile[k]));
    }
  }
  if (xs.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sx += xs[i];
      sy += ys[i];
      sxx += xs[i] * xs[i];
      sxy += xs[i] * ys[i];
    }
    const double nn = static_cast<double>(xs.size());
    const double slope = (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
    report.eta_fitted = std::exp(slope);
    report.holder_exponent = slope / std::log(params.a);
  } else {
    report.eta_fitted = 0.0;
    report.holder_exponent = 0.0; // constant field: osc identically zero
  }
  return report;
}

EnergyAuditReport energy_audit(const DiagnosticsSeries& series, double n,
                               double m) {
  EnergyAuditReport report;
  report.n = n;
  report.C_m = 4.0 * n * m * (n - 1.0) / ((n + m - 1.0) * (n + m - 1.0));

  std::size_t slot = series.n_list.size();
  for (std::size_t i = 0; i < series.n_list.size(); ++i)
    if (series.n_list[i] == n) slot = i;
  if (slot == series.n_list.size())
    throw std::invalid_argument("energy_audit: exponent n was not recorded");
  if (series.rows.size() < 3)
    throw std::invalid_argument("energy_audit: need at least 3 recorded rows");

  const auto& rows = series.rows;
  for (std::size_t i = 1; i + 1 < rows.size(); ++i) {
    const double dt_span = rows[i + 1].t - rows[i - 1].t;
    const double ddt =
        (rows[i + 1].int_un[slot] - rows[i - 1].int_un[slot]) / dt_span;
    const double lhs = ddt + report.C_m * rows[i].grad_l2[slot];
    const double rhs = rows[i].drift_pair[slot];
    report.t.push_back(rows[i].t);
    report.lhs.push_back(lhs);
    report.rhs.push_back(rhs);
    report.residual.push_back(lhs - rhs);
  }
  report.max_residual = report.residual.empty()
                            ? 0.0
                            : *std::max_element(report.residual.begin(),
                                                report.residual.end());

  double grad_acc = 0.0, vu_acc = 0.0;
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    const double w = rows[i + 1].t - rows[i].t;
    grad_acc += 0.5 * w * (rows[i].grad_u_sq + rows[i + 1].grad_u_sq);
    vu_acc += 0.5 * w * (rows[i].vu_sq + rows[i + 1].vu_sq);
  }
  report.grad_u_spacetime_l2 = std::sqrt(grad_acc);
  report.vu_spacetime_l2 = std::sqrt(vu_acc);
  return report;
}

IterationRecursionReport iteration_recursion(const std::vector<double>& A0,
                                             double C0, double C1,
                                             const std::vector<double>& seq,
                                             const std::vector<double>& t_grid,
                                             double B0) {
  if (A0.size() != t_grid.size())
    throw std::invalid_argument("iteration_recursion: A0 and t_grid mismatch");
  if (seq.size() < 2)
    throw std::invalid_argument("iteration_recursion: need at least two levels");

  IterationRecursionReport report;
  std::vector<double> prev = A0;
  for (std::size_t k = 1; k < seq.size(); ++k) {
    const double nk = seq[k];
    std::vector<double> cur(t_grid.size());
    cur[0] = std::pow(B0, nk);
    const double const_source = std::pow(C1, nk);
    const double growth = std::pow(C1, static_cast<double>(k));
    const double power = 2.0 + (C1 != 0.0 ? C1 / nk : 0.0);
    for (std::size_t i = 1; i < t_grid.size(); ++i) {
      const double dt = t_grid[i] - t_grid[i - 1];
      const double src_lo = const_source + growth * std::pow(prev[i - 1], power);
      const double src_hi = const_source + growth * std::pow(prev[i], power);
      const double src = std::max(src_lo, src_hi); // worst case on the cell
      if (C0 != 0.0) {
        const double decay = std::exp(-C0 * dt);
        cur[i] = cur[i - 1] * decay + src * (1.0 - decay) / C0;
      } else {
        cur[i] = cur[i - 1] + src * dt;
      }
      if (!std::isfinite(cur[i]) || cur[i] > 1e300) {
        report.diverged = true;
        cur[i] = std::numeric_limits<double>::infinity();
      }
    }
    double supb = 0.0;
    for (double a : cur)
      supb = std::max(supb, std::isfinite(a) ? std::pow(std::max(a, 0.0), 1.0 / nk)
                                             : std::numeric_limits<double>::infinity());
    report.sup_B.push_back(supb);
    prev = std::move(cur);
    if (report.diverged) break;
  }

  report.overall_sup = 0.0;
  for (double b : report.sup_B) report.overall_sup = std::max(report.overall_sup, b);
  if (report.diverged || !std::isfinite(report.overall_sup)) {
    report.certified = false;
    report.diverged = true;
    report.note = "recursion diverged; no uniform bound certified";
  } else if (report.sup_B.size() >= 2) {
    const double last = report.sup_B.back();
    const double before = report.sup_B[report.sup_B.size() - 2];
    report.certified =
        std::abs(last - before) <= 0.02 * std::max({1.0, last, before});
    report.note = report.certified ? "sup B_k stabilized across levels"
                                   : "sup B_k still drifting at the last level";
  }
  return report;
}

Field rescale_field(const Field& u, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("rescale_field: r must be positive");
  const GridSpec& g = u.spec;
  GridSpec gr(g.d, g.n, g.L / r);
  Field out(gr);
  const double amp = std::pow(r, g.d);
  const int n = g.n;
  const int n1 = g.d >= 2 ? n : 1;
  const int n2 = g.d >= 3 ? n : 1;

  // r x for a point of the target grid must be sampled from the source grid;
  // integer r keeps it on-lattice, otherwise use multilinear interpolation.
  auto sample = [&](double x0, double x1, double x2) {
    double pos[3] = {x0, x1, x2};
    int base[3] = {0, 0, 0};
    double fr[3] = {0, 0, 0};
    for (int a = 0; a < g.d; ++a) {
      double t = (pos[a] + g.L) / g.h();
      double fl = std::floor(t);
      base[a] = static_cast<int>(fl);
      fr[a] = t - fl;
    }
    double acc = 0.0;
    const int corners = 1 << g.d;
    for (int cbits = 0; cbits < corners; ++cbits) {
      double w = 1.0;
      std::array<int, 3> ix = {0, 0, 0};
      for (int a = 0; a < g.d; ++a) {
        const int off = (cbits >> a) & 1;
        w *= off ? fr[a] : 1.0 - fr[a];
        int i = base[a] + off;
        i %= n;
        if (i < 0) i += n;
        ix[a] = i;
      }
      acc += w * u.values[flat_index(g, ix)];
    }
    return acc;
  };

  std::size_t idx = 0;
  for (int i0 = 0; i0 < n; ++i0) {
    const double x0 = r * gr.coord(i0);
    for (int i1 = 0; i1 < n1; ++i1) {
      const double x1 = g.d >= 2 ? r * gr.coord(i1) : 0.0;
      for (int i2 = 0; i2 < n2; ++i2, ++idx) {
        const double x2 = g.d >= 3 ? r * gr.coord(i2) : 0.0;
        out.values[idx] = amp * sample(x0, x1, x2);
      }
    }
  }
  return out;
}

namespace {

Field drift_divergence_term(const Field& u, double s) {
  KernelSpec k{u.spec.d, s, KernelMode::FreeSpace};
  const std::vector<Field> gradK = grad_riesz_potential(u, k);
  std::vector<Field> flux;
  flux.reserve(u.spec.d);
  for (int a = 0; a < u.spec.d; ++a) {
    Field f(u.spec);
    for (std::size_t i = 0; i < u.size(); ++i)
      f.values[i] = u.values[i] * gradK[a].values[i];
    flux.push_back(std::move(f));
  }
  Field div(u.spec);
  for (int a = 0; a < u.spec.d; ++a) {
    const std::vector<Field> g = gradient_fd(flux[a]);
    for (std::size_t i = 0; i < div.size(); ++i)
      div.values[i] += g[a].values[i];
  }
  return div;
}

} // namespace

double measured_drift_scaling_exponent(const Field& u, double r, double s,
                                       double m) {
  const Field ur = rescale_field(u, r);
  const Field a_ur = drift_divergence_term(ur, s);

  const Field a_u = drift_divergence_term(u, s);
  // sample A[u](r x) on the rescaled lattice: rescale the *field* A[u] with
  // the plain dilation (no r^d amplitude), then undo the amplitude factor.
  Field a_u_dilated = rescale_field(a_u, r);
  const double amp = std::pow(r, u.spec.d);
  for (double& v : a_u_dilated.values) v /= amp;

  const double num = lp_norm(a_ur, 1.0);
  const double den =
      std::pow(r, u.spec.d * m + 2.0) * lp_norm(a_u_dilated, 1.0);
  if (!(num > 0.0) || !(den > 0.0))
    throw std::invalid_argument("measured_drift_scaling_exponent: zero drift term");
  return std::log(num / den) / std::log(r);
}

} // namespace aggdiff
