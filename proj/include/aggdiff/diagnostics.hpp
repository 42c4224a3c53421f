#pragma once

#include <array>
#include <string>
#include <vector>

#include "aggdiff/grid.hpp"
#include "aggdiff/series.hpp"
#include "aggdiff/snapshot.hpp"

namespace aggdiff {

// Which boundedness argument covers a parameter triple. Unsupported marks
// both the open corner {m >= 2, s <= 1/2} and the supercritical range.
enum class RegimeCase {
  S_half_m_lt2,  // 1/2 < s <= 1, m < 2
  S_half_m_ge2,  // 1/2 < s <= 1, m >= 2
  S_small_m_lt2, // s <= 1/2, m < 2
  S_large,       // s > 1
  Unsupported,
};

struct RegimeParams {
  int d = 3;
  double m = 2.0;
  double s = 1.0;
  double m_c = 0.0;         // 2 - 2s/d
  bool subcritical = false; // m > m_c, decided in exact arithmetic
  RegimeCase case_tag = RegimeCase::Unsupported;
  std::string note; // open-problem / supercritical flags for reporting
};

// Requires d in {1,2,3}, m > 1, s in (0, d/2]. The s = d/2 edge is admitted
// because the drift prefactor stays finite there.
RegimeParams classify(int d, double m, double s);

const char* regime_case_name(RegimeCase c);

// eta = ||grad phi||_2^2 where Lap(phi) = u1 - u2, solved spectrally on the
// torus. Rejects unequal masses (the difference must be mean-free).
double hminus1_distance(const Field& u1, const Field& u2);

// || |grad|^s u ||_p / (||grad u||_r^alpha ||u||_q^(1-alpha)).
// The exponents must satisfy 1/p = s/d + (1/r - 1/d) alpha + (1-alpha)/q
// to 1e-12; gradients are centered differences, |grad|^s is spectral.
double gn_check(const Field& u, double s_ord, double p, double r, double q,
                double alpha);

struct OscillationParams {
  double a = 0.75; // spatial shrink factor per level
  double b = 0.8;  // temporal shrink factor per level (height b^{2k} r_k^2)
  double r0 = 0.5; // base radius
  int k_max = 4;
  std::array<double, 3> center = {0, 0, 0};
};

struct OscillationReport {
  std::vector<double> radius;         // r_k
  std::vector<double> time_height;    // c_k r_k^2
  std::vector<double> osc_percentile; // 98th - 2nd percentile of v
  std::vector<double> osc_exact;      // max - min
  std::vector<std::size_t> samples;
  double eta_fitted = 0.0;      // geometric decay rate per level
  double holder_exponent = 0.0; // log eta / log a
  bool sufficient_resolution = true;
  std::string note;
};

// Oscillation of v = u^m over nested parabolic cylinders
// Q^0(a^k r0, b^{2k}) = {|x - center| <= a^k r0} x [0, b^{2k} (a^k r0)^2].
// Snapshots are (field, time) pairs starting at t = 0.
OscillationReport oscillation_decay(const std::vector<Snapshot>& snaps, double m,
                                    const OscillationParams& params);

struct EnergyAuditReport {
  double n = 0.0;
  double C_m = 0.0; // 4 n m (n-1) / (n+m-1)^2
  std::vector<double> t;
  std::vector<double> lhs;      // d/dt int u^n + C_m ||grad u^l||_2^2
  std::vector<double> rhs;      // (n-1) int (V*u) . grad u^n
  std::vector<double> residual; // lhs - rhs, predicted <= 0
  double max_residual = 0.0;
  double grad_u_spacetime_l2 = 0.0; // ||grad u||_{L^2(space x [0,T])}
  double vu_spacetime_l2 = 0.0;     // ||V*u||_{L^2(space x [0,T])}
};

// Evaluates the L^p energy-evolution inequality on a recorded series; the
// time derivative uses centered differences on the snapshot grid.
EnergyAuditReport energy_audit(const DiagnosticsSeries& series, double n,
                               double m);

struct IterationRecursionReport {
  std::vector<double> sup_B;   // per level k >= 1
  double overall_sup = 0.0;
  bool certified = false;      // sup stabilized across levels
  bool diverged = false;
  std::string note;
};

// Integrates d/dt A_k + C0 A_k = C1^{n_k} + C1^k A_{k-1}^{2 + C1/n_k} as an
// equality (worst case) along t_grid, with A_k(0) = B0^{n_k}, and reports the
// normalized bounds B_k = A_k^{1/n_k}. Divergence is reported, not thrown.
IterationRecursionReport iteration_recursion(const std::vector<double>& A0,
                                             double C0, double C1,
                                             const std::vector<double>& seq,
                                             const std::vector<double>& t_grid,
                                             double B0);

// u_r(x) = r^d u(r x) sampled on the (n, L/r) grid; with integer r the sample
// points land exactly on the source lattice.
Field rescale_field(const Field& u, double r);

// Measured scaling exponent of the drift operator A[u] = div(u grad K_s*u):
// log_r( ||A[u_r]||_1 / (r^(dm+2) ||A[u](r .)||_1) ), which the scaling
// transform predicts to be 2d - dm - 2s.
double measured_drift_scaling_exponent(const Field& u, double r, double s,
                                       double m);

} // namespace aggdiff
