#include "aggdiff/grid.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace aggdiff {

namespace {

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

} // namespace

GridSpec::GridSpec(int d_, int n_, double L_) : d(d_), n(n_), L(L_) {
  if (d < 1 || d > 3)
    throw std::invalid_argument("GridSpec: d must be 1, 2 or 3");
  if (n < 8 || !is_pow2(n))
    throw std::invalid_argument("GridSpec: n must be a power of two >= 8");
  if (!(L > 0.0) || !std::isfinite(L))
    throw std::invalid_argument("GridSpec: L must be positive and finite");
}

double GridSpec::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < d; ++a) v *= h();
  return v;
}

double GridSpec::domain_volume() const {
  double v = 1.0;
  for (int a = 0; a < d; ++a) v *= 2.0 * L;
  return v;
}

std::size_t GridSpec::size() const {
  std::size_t s = 1;
  for (int a = 0; a < d; ++a) s *= static_cast<std::size_t>(n);
  return s;
}

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 32) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

void require_same_spec(const Field& a, const Field& b) {
  if (!(a.spec == b.spec))
    throw std::invalid_argument("field operation on mismatched grids");
}

bool all_finite(const Field& f) {
  for (double x : f.values)
    if (!std::isfinite(x)) return false;
  return true;
}

double integrate(const Field& f) {
  return f.spec.cell_volume() * pairwise_sum(f.values);
}

double lp_norm(const Field& f, double p) {
  if (std::isinf(p)) return max_abs(f);
  if (!(p >= 1.0))
    throw std::invalid_argument("lp_norm: p must be >= 1 or infinity");
  std::vector<double> powed(f.size());
  for (std::size_t i = 0; i < f.size(); ++i)
    powed[i] = std::pow(std::abs(f.values[i]), p);
  return std::pow(f.spec.cell_volume() * pairwise_sum(powed), 1.0 / p);
}

double inner(const Field& a, const Field& b) {
  require_same_spec(a, b);
  std::vector<double> prod(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    prod[i] = a.values[i] * b.values[i];
  return a.spec.cell_volume() * pairwise_sum(prod);
}

std::pair<Field, Field> truncate_above(const Field& f, double j) {
  if (!(j >= 0.0))
    throw std::invalid_argument("truncate_above: j must be >= 0");
  Field hi(f.spec), lo(f.spec);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double u = f.values[i];
    hi.values[i] = u > j ? u - j : 0.0;
    lo.values[i] = u < j ? u : j;
  }
  return {std::move(hi), std::move(lo)};
}

Field operator+(const Field& a, const Field& b) {
  require_same_spec(a, b);
  Field r(a.spec);
  for (std::size_t i = 0; i < a.size(); ++i)
    r.values[i] = a.values[i] + b.values[i];
  return r;
}

Field operator-(const Field& a, const Field& b) {
  require_same_spec(a, b);
  Field r(a.spec);
  for (std::size_t i = 0; i < a.size(); ++i)
    r.values[i] = a.values[i] - b.values[i];
  return r;
}

Field operator*(double c, const Field& a) {
  Field r(a.spec);
  for (std::size_t i = 0; i < a.size(); ++i) r.values[i] = c * a.values[i];
  return r;
}

double max_abs(const Field& f) {
  double m = 0.0;
  for (double x : f.values) m = std::max(m, std::abs(x));
  return m;
}

double min_value(const Field& f) {
  double m = std::numeric_limits<double>::infinity();
  for (double x : f.values) m = std::min(m, x);
  return m;
}

std::size_t flat_index(const GridSpec& g, const std::array<int, 3>& idx) {
  std::size_t k = 0;
  for (int a = 0; a < g.d; ++a)
    k = k * static_cast<std::size_t>(g.n) + static_cast<std::size_t>(idx[a]);
  return k;
}

Field laplacian_fd(const Field& f) {
  const GridSpec& g = f.spec;
  const double inv_h2 = 1.0 / (g.h() * g.h());
  Field out(g);
  const int n = g.n;
  // stride of axis a in the row-major layout
  std::size_t stride[3] = {1, 1, 1};
  for (int a = g.d - 2; a >= 0; --a)
    stride[a] = stride[a + 1] * static_cast<std::size_t>(n);

  const std::size_t total = g.size();
  for (std::size_t i = 0; i < total; ++i) {
    double acc = -2.0 * g.d * f.values[i];
    std::size_t rest = i;
    for (int a = 0; a < g.d; ++a) {
      const std::size_t ia = (rest / stride[a]) % static_cast<std::size_t>(n);
      const std::size_t up = ia + 1 < static_cast<std::size_t>(n)
                                 ? i + stride[a]
                                 : i + stride[a] - stride[a] * n;
      const std::size_t dn =
          ia > 0 ? i - stride[a] : i - stride[a] + stride[a] * n;
      acc += f.values[up] + f.values[dn];
      (void)rest;
    }
    out.values[i] = acc * inv_h2;
  }
  return out;
}

} // namespace aggdiff
