#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace aggdiff {

// Uniform Cartesian grid on the centered cube [-L, L)^d with n samples per
// axis, n a power of two. Sample i along an axis sits at x = -L + i*h with
// h = 2L/n; each sample is the midpoint of its periodic cell, so the grid is
// symmetric under x -> -x (index i -> (n-i) mod n) and grids with the same L
// nest across refinement levels.
struct GridSpec {
  int d = 3;
  int n = 8;
  double L = 1.0;

  GridSpec() = default;
  GridSpec(int d_, int n_, double L_);

  double h() const { return 2.0 * L / n; }
  double cell_volume() const;   // h^d, by repeated multiplication
  double domain_volume() const; // (2L)^d
  std::size_t size() const;     // n^d
  double coord(int i) const { return -L + i * h(); }

  bool operator==(const GridSpec&) const = default;
};

// Scalar field sampled on a GridSpec, row-major (axis 0 slowest).
struct Field {
  GridSpec spec;
  std::vector<double> values;

  Field() = default;
  explicit Field(const GridSpec& g) : spec(g), values(g.size(), 0.0) {}
  Field(const GridSpec& g, double fill) : spec(g), values(g.size(), fill) {}

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  std::size_t size() const { return values.size(); }
};

// Deterministic fixed-order pairwise summation; reductions must not depend
// on thread count or traversal accidents.
double pairwise_sum(std::span<const double> v);

// Throws std::invalid_argument on mixed-grid arithmetic.
void require_same_spec(const Field& a, const Field& b);

bool all_finite(const Field& f);

// h^d * sum(values): midpoint rule, exact for the discrete conservation law.
double integrate(const Field& f);

// (h^d sum |v|^p)^(1/p); p = infinity gives max |v|. Rejects p < 1.
double lp_norm(const Field& f, double p);

// h^d * sum(a*b)
double inner(const Field& a, const Field& b);

// Splits u at level j >= 0 into (max(u-j,0), min(u,j)); the parts sum back
// to u exactly.
std::pair<Field, Field> truncate_above(const Field& f, double j);

// Pointwise helpers used throughout the diagnostics.
Field operator+(const Field& a, const Field& b);
Field operator-(const Field& a, const Field& b);
Field operator*(double c, const Field& a);

double max_abs(const Field& f);
double min_value(const Field& f);

// Maps a multi-index (first d entries used) to the row-major flat index.
std::size_t flat_index(const GridSpec& g, const std::array<int, 3>& idx);

// Second-order centered 2d+1-point Laplacian with periodic wrap.
Field laplacian_fd(const Field& f);

} // namespace aggdiff
