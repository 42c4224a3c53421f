#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/rational.hpp>

#include <vector>

namespace aggdiff {

// Exponent bookkeeping for the L^p iteration machinery. The subcritical
// strict inequalities are knife-edge near m = 2 - 2s/d, so everything here
// runs in exact rational arithmetic; doubles enter through their exact
// binary expansion.
using BigInt = boost::multiprecision::cpp_int;
using Rat = boost::rational<BigInt>;

Rat rat_from_double(double x);
double rat_to_double(const Rat& r);

// m_c = 2 - 2s/d
Rat critical_exponent_exact(int d, const Rat& s);
// m > 2 - 2s/d, exact comparison
bool subcritical_exact(int d, const Rat& m, const Rat& s);

// Norm-exponent sequence n_0 = 1, n_{k+1} = 2 n_k + 1 - m, with closed form
// n_k = 2^k (2 - m) - 1 + m. Requires 1 < m < 2 (for m >= 2 the dyadic
// sequence n_k = 2^k is the right ladder and this throws with that hint).
std::vector<Rat> moser_sequence_exact(const Rat& m, int k_max);
Rat moser_closed_form(const Rat& m, int k);
std::vector<double> moser_sequence(double m, int k_max);

// Exponents attached to level n of the iteration: l = (m+n-1)/2, the
// convolution pair (p, q), the two interpolation exponents (alpha, beta) and
// theta = alpha + ((n+1-l)/l) beta. Requires n >= 3 - m.
struct IterationExponents {
  Rat l, p, q, alpha, beta, theta;
};

IterationExponents iteration_exponents_exact(int d, const Rat& m, const Rat& s,
                                             const Rat& n);

struct IterationExponentsD {
  double l, p, q, alpha, beta, theta;
};

IterationExponentsD iteration_exponents(int d, double m, double s, double n);

// theta(3-m) < 2, decided exactly; equivalent to subcriticality.
bool theta_at_base_below_two(int d, const Rat& m, const Rat& s);

// Limit of theta(n) as n -> infinity: ((2-2s)/d + 1) / (1/2 + 1/d).
Rat theta_limit_exact(int d, const Rat& s);

} // namespace aggdiff
