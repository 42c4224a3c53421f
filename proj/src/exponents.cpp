#include "aggdiff/exponents.hpp"

#include <cmath>
#include <stdexcept>

namespace aggdiff {

Rat rat_from_double(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("rat_from_double: non-finite");
  if (x == 0.0) return Rat(0);
  int exp = 0;
  const double mant = std::frexp(x, &exp); // x = mant * 2^exp, |mant| in [0.5, 1)
  const long long scaled = static_cast<long long>(std::ldexp(mant, 53));
  const int shift = exp - 53;
  BigInt num(scaled);
  if (shift >= 0) return Rat(num << shift);
  return Rat(num, BigInt(1) << (-shift));
}

double rat_to_double(const Rat& r) {
  // good enough for reporting; exact decisions never round-trip through this
  return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

Rat critical_exponent_exact(int d, const Rat& s) {
  return Rat(2) - Rat(2) * s / Rat(d);
}

bool subcritical_exact(int d, const Rat& m, const Rat& s) {
  return m > critical_exponent_exact(d, s);
}

Rat moser_closed_form(const Rat& m, int k) {
  return (BigInt(1) << k) * (Rat(2) - m) - Rat(1) + m;
}

std::vector<Rat> moser_sequence_exact(const Rat& m, int k_max) {
  if (!(m > Rat(1) && m < Rat(2)))
    throw std::invalid_argument(
        "moser_sequence: requires 1 < m < 2; for m >= 2 use the dyadic "
        "sequence n_k = 2^k instead");
  if (k_max < 0) throw std::invalid_argument("moser_sequence: k_max < 0");
  std::vector<Rat> seq;
  seq.reserve(static_cast<std::size_t>(k_max) + 1);
  Rat n(1);
  seq.push_back(n);
  for (int k = 0; k < k_max; ++k) {
    n = Rat(2) * n + Rat(1) - m;
    seq.push_back(n);
  }
  return seq;
}

std::vector<double> moser_sequence(double m, int k_max) {
  const auto exact = moser_sequence_exact(rat_from_double(m), k_max);
  std::vector<double> out;
  out.reserve(exact.size());
  for (const Rat& r : exact) out.push_back(rat_to_double(r));
  return out;
}

IterationExponents iteration_exponents_exact(int d, const Rat& m, const Rat& s,
                                             const Rat& n) {
  if (d < 1) throw std::invalid_argument("iteration_exponents: bad dimension");
  if (n < Rat(3) - m)
    throw std::invalid_argument("iteration_exponents: requires n >= 3 - m");
  const Rat rd(d);
  const Rat half(1, 2);
  const Rat sobolev = half + Rat(1) / rd; // 1/2 + 1/d

  IterationExponents e;
  e.l = (m + n - Rat(1)) / Rat(2);
  e.p = (Rat(2) + rd * (m + n - Rat(1))) / (Rat(1) + rd * (m + e.l - Rat(2)));
  e.q = (Rat(2) + rd * (m + n - Rat(1))) / (Rat(1) + rd * (n + Rat(1) - e.l));
  // 1/2 = (2-2s)/d + (1/2 - 1/d) alpha + (1 - alpha)
  e.alpha = ((Rat(2) - Rat(2) * s) / rd + half) / sobolev;
  // (1/2) l/(n+1-l) = (1/2 - 1/d) beta + (1 - beta)
  const Rat tail = n + Rat(1) - e.l;
  e.beta = (Rat(1) - half * e.l / tail) / sobolev;
  e.theta = e.alpha + tail / e.l * e.beta;
  return e;
}

IterationExponentsD iteration_exponents(int d, double m, double s, double n) {
  const auto e = iteration_exponents_exact(d, rat_from_double(m), rat_from_double(s),
                                           rat_from_double(n));
  return {rat_to_double(e.l),     rat_to_double(e.p),    rat_to_double(e.q),
          rat_to_double(e.alpha), rat_to_double(e.beta), rat_to_double(e.theta)};
}

bool theta_at_base_below_two(int d, const Rat& m, const Rat& s) {
  const auto e = iteration_exponents_exact(d, m, s, Rat(3) - m);
  return e.theta < Rat(2);
}

Rat theta_limit_exact(int d, const Rat& s) {
  const Rat rd(d);
  return ((Rat(2) - Rat(2) * s) / rd + Rat(1)) / (Rat(1, 2) + Rat(1) / rd);
}

} // namespace aggdiff
