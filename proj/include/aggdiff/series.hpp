#pragma once

#include <limits>
#include <string>
#include <vector>

namespace aggdiff {

// One recorded instant of a run. The per-exponent slots line up with the
// requesting series' p_list / n_list.
struct SeriesRow {
  double t = 0.0;
  double mass = 0.0;
  double linf = 0.0;
  std::vector<double> lp;         // ||u||_p per requested p
  std::vector<double> int_un;     // integral of u^n per requested n
  std::vector<double> grad_l2;    // ||grad u^l||_2^2, l = (n+m-1)/2
  std::vector<double> drift_pair; // (n-1) int (V*u) . grad u^n
  double grad_u_sq = 0.0;         // ||grad u||_2^2
  double vu_sq = 0.0;             // ||V*u||_2^2
  double hminus1 = std::numeric_limits<double>::quiet_NaN(); // pair runs only
  double boundary_mass = 0.0;
  double clipped_mass = 0.0; // cumulative
  double dt = 0.0;
  long step = 0;
};

struct DiagnosticsSeries {
  std::vector<double> p_list;
  std::vector<double> n_list;
  std::vector<SeriesRow> rows;

  std::string csv_header() const;
  std::string csv() const; // fixed header + one line per row

  // t strictly increasing, all entries finite
  void check_consistent() const;
};

} // namespace aggdiff
