#include "aggdiff/initial.hpp"

#include <cmath>
#include <stdexcept>

namespace aggdiff {

namespace {

template <class F>
Field fill_radial(const GridSpec& g, const std::array<double, 3>& center, F&& f) {
  Field out(g);
  const int n = g.n;
  const int n1 = g.d >= 2 ? n : 1;
  const int n2 = g.d >= 3 ? n : 1;
  std::size_t idx = 0;
  for (int i0 = 0; i0 < n; ++i0) {
    const double x0 = g.coord(i0) - center[0];
    for (int i1 = 0; i1 < n1; ++i1) {
      const double x1 = g.d >= 2 ? g.coord(i1) - center[1] : 0.0;
      for (int i2 = 0; i2 < n2; ++i2, ++idx) {
        const double x2 = g.d >= 3 ? g.coord(i2) - center[2] : 0.0;
        out.values[idx] = f(std::sqrt(x0 * x0 + x1 * x1 + x2 * x2));
      }
    }
  }
  return out;
}

void normalize_mass(Field& f, double mass) {
  const double got = integrate(f);
  if (!(got > 0.0))
    throw std::invalid_argument("initial data has zero mass on this grid");
  const double scale = mass / got;
  for (double& v : f.values) v *= scale;
}

} // namespace

Field make_gaussian(const GridSpec& g, double mass, double sigma,
                    const std::array<double, 3>& center) {
  if (!(sigma > 0.0) || !(mass >= 0.0))
    throw std::invalid_argument("make_gaussian: need sigma > 0, mass >= 0");
  Field f = fill_radial(g, center, [sigma](double r) {
    return std::exp(-0.5 * r * r / (sigma * sigma));
  });
  if (mass == 0.0) {
    for (double& v : f.values) v = 0.0;
    return f;
  }
  normalize_mass(f, mass);
  return f;
}

Field make_ball(const GridSpec& g, double mass, double radius,
                const std::array<double, 3>& center) {
  if (!(radius > 0.0) || !(mass >= 0.0))
    throw std::invalid_argument("make_ball: need radius > 0, mass >= 0");
  Field f = fill_radial(g, center,
                        [radius](double r) { return r <= radius ? 1.0 : 0.0; });
  if (mass == 0.0) {
    for (double& v : f.values) v = 0.0;
    return f;
  }
  normalize_mass(f, mass);
  return f;
}

double barenblatt_value(int d, double m, double C, double t, double r) {
  if (!(m > 1.0)) throw std::invalid_argument("barenblatt: m must exceed 1");
  if (!(t > 0.0)) throw std::invalid_argument("barenblatt: t must be positive");
  const double beta = 1.0 / (d * (m - 1.0) + 2.0);
  const double alpha = d * beta;
  const double kappa = (m - 1.0) * beta / (2.0 * m);
  const double y = C - kappa * r * r * std::pow(t, -2.0 * beta);
  if (y <= 0.0) return 0.0;
  return std::pow(t, -alpha) * std::pow(y, 1.0 / (m - 1.0));
}

Field make_barenblatt(const GridSpec& g, double m, double t, double C,
                      const std::array<double, 3>& center) {
  return fill_radial(g, center, [&](double r) {
    return barenblatt_value(g.d, m, C, t, r);
  });
}

} // namespace aggdiff
