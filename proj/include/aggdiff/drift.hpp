#pragma once

#include <memory>
#include <string>
#include <vector>

#include "aggdiff/grid.hpp"

namespace aggdiff {

// Parameters of the regularized interaction field
//   V_{s,eps}(x) = zeta_eps(|x|) * grad K_s(x),
// where zeta_eps vanishes on [0, eps] and beyond 2/eps and equals 1 on
// [2 eps, 1/eps]. c_norm is the grad-kernel prefactor in use (from the
// fracops normalization unless overridden).
struct RegularizerSpec {
  int d = 3;
  double s = 1.0;
  double epsilon = 0.1;
  double c_norm = 0.0;

  RegularizerSpec(int d_, double s_, double epsilon_);
  RegularizerSpec(int d_, double s_, double epsilon_, double c_norm_);
};

// Radial cutoff profile, quintic-smoothstep ramps, C^2, values in [0,1].
// Ramp slopes satisfy |zeta'| <= 1.875/eps inside and <= 1.875*eps outside.
double zeta(double rho, const RegularizerSpec& spec);
double zeta_prime(double rho, const RegularizerSpec& spec);

// Tabulated drift kernel on the 2x padded lattice of a grid, with the
// component spectra precomputed for convolution. Immutable once built.
class DriftKernel {
 public:
  // Throws std::invalid_argument when eps < 2h (under-resolved cutoff).
  // build_spectra=false skips the transforms when only the table is needed.
  DriftKernel(const RegularizerSpec& spec, const GridSpec& g,
              bool build_spectra = true);

  const RegularizerSpec& spec() const { return spec_; }
  const GridSpec& grid() const { return grid_; }
  int padded_n() const { return m_; }
  // outer cutoff 2/eps exceeds the padded half-width 2L
  bool clamped() const { return clamped_; }

  // component a of the table, padded wrapped layout, m^d values
  const std::vector<double>& table(int a) const { return table_[a]; }

  // V * u by padded spectral convolution; u must live on grid().
  std::vector<Field> velocity(const Field& u) const;

 private:
  RegularizerSpec spec_;
  GridSpec grid_;
  int m_;
  bool clamped_ = false;
  std::vector<std::vector<double>> table_; // d components
  std::vector<std::vector<double>> spec_imag_; // Im of spectra, h^d folded in
};

// The kernel table as d Fields on the padded grid (wrapped displacement
// layout), mirroring the tabulation the convolution uses.
std::vector<Field> build_drift_kernel(const RegularizerSpec& spec,
                                      const GridSpec& g);

// V_{s,eps} * u. Kernels are cached per (spec, grid) behind a small LRU.
std::vector<Field> drift_velocity(const Field& u, const RegularizerSpec& spec);

std::shared_ptr<const DriftKernel> get_drift_kernel(const RegularizerSpec& spec,
                                                    const GridSpec& g);

// Audit of the decay bound |div V_{s,eps}(x)| <= C |x|^(-d-2+2s).
struct DivDecayRow {
  double epsilon;
  std::string region; // inner, ramp_in, plateau, ramp_out, outer
  double fitted_C;
  bool pass;
};

struct DivDecayReport {
  std::vector<DivDecayRow> rows;
  std::vector<double> epsilons;
  std::vector<double> overall_C; // smallest admissible C per epsilon
  bool pass = false;             // overall_C spread within a factor 2
  bool clamped_any = false;
  std::string csv() const; // columns: epsilon,region,fitted_C,pass
};

DivDecayReport verify_div_decay(const RegularizerSpec& base, const GridSpec& g,
                                const std::vector<double>& eps_list = {0.05, 0.1,
                                                                       0.2});

} // namespace aggdiff
