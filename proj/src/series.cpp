#include "aggdiff/series.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace aggdiff {

namespace {

std::string tag(double x) {
  std::ostringstream s;
  s << x;
  std::string t = s.str();
  for (char& c : t)
    if (c == '.' || c == '-') c = '_';
  return t;
}

} // namespace

std::string DiagnosticsSeries::csv_header() const {
  std::ostringstream out;
  out << "step,t,dt,mass,linf";
  for (double p : p_list) out << ",lp_" << tag(p);
  for (double n : n_list)
    out << ",un_" << tag(n) << ",gradl2_" << tag(n) << ",drift_" << tag(n);
  out << ",grad_u_sq,vu_sq,hminus1,boundary_mass,clipped_mass";
  return out.str();
}

std::string DiagnosticsSeries::csv() const {
  std::ostringstream out;
  out.precision(17);
  out << csv_header() << '\n';
  for (const SeriesRow& r : rows) {
    out << r.step << ',' << r.t << ',' << r.dt << ',' << r.mass << ',' << r.linf;
    for (double v : r.lp) out << ',' << v;
    for (std::size_t i = 0; i < n_list.size(); ++i)
      out << ',' << r.int_un[i] << ',' << r.grad_l2[i] << ',' << r.drift_pair[i];
    out << ',' << r.grad_u_sq << ',' << r.vu_sq << ',' << r.hminus1 << ','
        << r.boundary_mass << ',' << r.clipped_mass;
    out << '\n';
  }
  return out.str();
}

void DiagnosticsSeries::check_consistent() const {
  double prev = -std::numeric_limits<double>::infinity();
  for (const SeriesRow& r : rows) {
    if (!(r.t > prev))
      throw std::runtime_error("DiagnosticsSeries: times not strictly increasing");
    prev = r.t;
    auto finite = [](double x) { return std::isfinite(x); };
    if (!finite(r.mass) || !finite(r.linf) || !finite(r.boundary_mass) ||
        !finite(r.clipped_mass))
      throw std::runtime_error("DiagnosticsSeries: non-finite entry");
    for (double v : r.lp)
      if (!finite(v)) throw std::runtime_error("DiagnosticsSeries: non-finite lp");
    for (double v : r.int_un)
      if (!finite(v)) throw std::runtime_error("DiagnosticsSeries: non-finite u^n");
  }
}

} // namespace aggdiff
