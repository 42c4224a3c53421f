#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "aggdiff/grid.hpp"
#include "aggdiff/initial.hpp"
#include "aggdiff/snapshot.hpp"

using namespace aggdiff;

namespace {

// Independent quadrature oracle: plain ordered accumulation, no pairwise
// tree, no cell_volume helper.
double naive_weighted_sum(const Field& f) {
  double h = 2.0 * f.spec.L / f.spec.n;
  double w = 1.0;
  for (int a = 0; a < f.spec.d; ++a) w *= h;
  long double acc = 0.0;
  for (double v : f.values) acc += v;
  return static_cast<double>(acc) * w;
}

double naive_lp(const Field& f, double p) {
  double h = 2.0 * f.spec.L / f.spec.n;
  double w = 1.0;
  for (int a = 0; a < f.spec.d; ++a) w *= h;
  long double acc = 0.0;
  for (double v : f.values) acc += std::pow(std::abs(v), p);
  return std::pow(static_cast<double>(acc) * w, 1.0 / p);
}

Field random_field(const GridSpec& g, unsigned seed, double lo = -1.0,
                   double hi = 1.0) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  Field f(g);
  for (double& v : f.values) v = dist(rng);
  return f;
}

} // namespace

TEST_CASE("grid spec invariants") {
  CHECK_THROWS_AS(GridSpec(3, 7, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(GridSpec(3, 12, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(GridSpec(3, 32, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(GridSpec(4, 32, 1.0), std::invalid_argument);

  GridSpec g(3, 8, 1.0);
  // h^d n^d = (2L)^d exactly: n a power of two makes the division exact
  double lhs = g.cell_volume();
  for (int a = 0; a < 3; ++a) lhs *= g.n;
  CHECK(lhs == g.domain_volume());
}

TEST_CASE("integrate: constant, zero, gaussian vs oracle") {
  GridSpec g(3, 8, 1.0);
  CHECK(integrate(Field(g, 1.0)) == doctest::Approx(8.0).epsilon(1e-15));
  CHECK(integrate(Field(g)) == 0.0);

  GridSpec gg(3, 32, 8.0);
  Field gauss = make_gaussian(gg, 2.5, 1.0);
  const double oracle = naive_weighted_sum(gauss);
  CHECK(integrate(gauss) == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("lp_norm: constants, infinity, random vs oracle") {
  GridSpec g(1, 8, 1.0);
  CHECK(lp_norm(Field(g, 2.0), 1.0) == doctest::Approx(4.0).epsilon(1e-15));

  GridSpec g3(3, 16, 1.0);
  Field f = random_field(g3, 7);
  double mx = 0.0;
  for (double v : f.values) mx = std::max(mx, std::abs(v));
  CHECK(lp_norm(f, std::numeric_limits<double>::infinity()) == mx);

  CHECK(lp_norm(f, 3.0) == doctest::Approx(naive_lp(f, 3.0)).epsilon(1e-12));
  CHECK_THROWS_AS(lp_norm(f, 0.5), std::invalid_argument);
}

TEST_CASE("truncate_above: split and reconstruction") {
  GridSpec g(2, 16, 1.0);
  auto [hi0, lo0] = truncate_above(Field(g, 0.5), 1.0);
  CHECK(max_abs(hi0) == 0.0);
  CHECK(lo0.values[3] == 0.5);

  auto [hi3, lo3] = truncate_above(Field(g, 3.0), 1.0);
  CHECK(hi3.values[0] == 2.0);
  CHECK(lo3.values[0] == 1.0);

  Field f = random_field(g, 11, 0.0, 5.0);
  auto [hi, lo] = truncate_above(f, 1.7);
  for (std::size_t i = 0; i < f.size(); ++i) {
    // (u-j)+j re-rounds once; the split reconstructs to an ulp
    const double err = std::abs(hi.values[i] + lo.values[i] - f.values[i]);
    CHECK(err <= 2.0 * std::abs(f.values[i]) *
                     std::numeric_limits<double>::epsilon());
  }
  CHECK_THROWS_AS(truncate_above(f, -1.0), std::invalid_argument);
}

TEST_CASE("truncation preserves mass exactly") {
  GridSpec g(3, 16, 2.0);
  for (unsigned seed = 0; seed < 20; ++seed) {
    Field f = random_field(g, 100 + seed, 0.0, 4.0);
    auto [hi, lo] = truncate_above(f, 0.3 + 0.2 * seed);
    const double total = integrate(f);
    CHECK(integrate(hi) + integrate(lo) ==
          doctest::Approx(total).epsilon(1e-12));
  }
}

TEST_CASE("lp monotone in p on a unit-volume box") {
  // Power-mean inequality: on a probability space ||u||_p grows with p;
  // checked against the summation oracle on random fields.
  GridSpec g(2, 32, 0.5); // volume 1
  for (unsigned seed = 0; seed < 100; ++seed) {
    Field f = random_field(g, 500 + seed, -1.0, 1.0);
    const double n1 = lp_norm(f, 1.5);
    const double n2 = lp_norm(f, 3.0);
    const double ninf = lp_norm(f, std::numeric_limits<double>::infinity());
    CHECK(n2 >= n1 * (1.0 - 1e-12));
    CHECK(ninf >= n2 * (1.0 - 1e-12));
    CHECK(lp_norm(f, 3.0) == doctest::Approx(naive_lp(f, 3.0)).epsilon(1e-12));
  }
}

TEST_CASE("mixed-grid arithmetic is rejected") {
  Field a{GridSpec(2, 16, 1.0)};
  Field b{GridSpec(2, 16, 2.0)};
  CHECK_THROWS_AS(inner(a, b), std::invalid_argument);
  CHECK_THROWS_AS(a + b, std::invalid_argument);
}

TEST_CASE("snapshot round trip") {
  GridSpec g(3, 8, 1.5);
  Field f = random_field(g, 42);
  const char* path = "roundtrip_test.agd";
  write_snapshot(path, f, 0.75);
  Snapshot s = read_snapshot(path);
  CHECK(s.t == 0.75);
  CHECK(s.field.spec == g);
  for (std::size_t i = 0; i < f.size(); ++i)
    CHECK(s.field.values[i] == f.values[i]);
  std::remove(path);

  CHECK(content_hash(f) == content_hash(s.field));
  Field other = random_field(g, 43);
  CHECK(content_hash(f) != content_hash(other));
}

TEST_CASE("fd laplacian of a single mode") {
  GridSpec g(1, 64, 1.0);
  Field f(g);
  const double xi = 2.0 * std::numbers::pi / (2.0 * g.L) * 3.0;
  for (int i = 0; i < g.n; ++i) f.values[i] = std::sin(xi * g.coord(i));
  Field lap = laplacian_fd(f);
  // discrete eigenvalue of the 3-point stencil
  const double lam = -(2.0 - 2.0 * std::cos(xi * g.h())) / (g.h() * g.h());
  for (int i = 0; i < g.n; ++i)
    CHECK(lap.values[i] == doctest::Approx(lam * f.values[i]).epsilon(1e-9));
}
