#include "aggdiff/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

namespace aggdiff {

namespace {

double mobility_power(double u, double m) {
  const double up = u > 0.0 ? u : 0.0;
  if (m == 2.0) return up;
  if (m == 3.0) return up * up;
  return std::pow(up, m - 1.0);
}

double minmod(double a, double b) {
  if (a > 0.0 && b > 0.0) return std::min(a, b);
  if (a < 0.0 && b < 0.0) return std::max(a, b);
  return 0.0;
}

} // namespace

DtPolicy DtPolicy::fixed(double dt) {
  DtPolicy p;
  p.kind = Kind::Fixed;
  p.dt = dt;
  return p;
}

DtPolicy DtPolicy::adaptive(double cfl_diff, double cfl_adv) {
  DtPolicy p;
  p.kind = Kind::Adaptive;
  p.cfl_diff = cfl_diff;
  p.cfl_adv = cfl_adv;
  return p;
}

void SolverConfig::validate() const {
  if (!(m > 1.0))
    throw std::invalid_argument("SolverConfig: m must exceed 1 (degenerate range)");
  if (!(epsilon >= 0.0))
    throw std::invalid_argument("SolverConfig: epsilon must be >= 0");
  if (!(t_end >= 0.0)) throw std::invalid_argument("SolverConfig: t_end < 0");
  if (dt_policy.kind == DtPolicy::Kind::Fixed) {
    if (!(dt_policy.dt > 0.0))
      throw std::invalid_argument("SolverConfig: Fixed dt must be positive");
  } else {
    if (!(dt_policy.cfl_diff > 0.0 && dt_policy.cfl_diff <= 1.0) ||
        !(dt_policy.cfl_adv > 0.0 && dt_policy.cfl_adv <= 1.0))
      throw std::invalid_argument("SolverConfig: cfl factors must lie in (0, 1]");
  }
  if (snapshot_every < 1)
    throw std::invalid_argument("SolverConfig: snapshot_every < 1");
  if (picard_sweeps < 1)
    throw std::invalid_argument("SolverConfig: picard_sweeps < 1");
}

SolverError::SolverError(const std::string& what, long step_, double t_)
    : std::runtime_error([&] {
        std::ostringstream s;
        s << what << " (step " << step_ << ", t = " << t_ << ")";
        return s.str();
      }()),
      step(step_),
      t(t_) {}

Simulation::Simulation(Field u0, SolverConfig cfg,
                       std::shared_ptr<const DriftKernel> drift)
    : state_{std::move(u0)}, cfg_(std::move(cfg)), drift_(std::move(drift)) {
  init();
}

Simulation::Simulation(RunState state, SolverConfig cfg,
                       std::shared_ptr<const DriftKernel> drift)
    : state_(std::move(state)), cfg_(std::move(cfg)), drift_(std::move(drift)) {
  init();
}

void Simulation::init() {
  cfg_.validate();
  const GridSpec& g = state_.u.spec;
  if (drift_ && !(drift_->grid() == g))
    throw std::invalid_argument("Simulation: drift kernel grid mismatch");
  if (!all_finite(state_.u))
    throw SolverError("non-finite initial data", state_.step, state_.t);
  if (min_value(state_.u) < 0.0)
    throw SolverError("negative initial data", state_.step, state_.t);

  n_ = g.n;
  total_ = g.size();
  stride_[g.d - 1] = 1;
  for (int a = g.d - 2; a >= 0; --a)
    stride_[a] = stride_[a + 1] * static_cast<std::size_t>(n_);

  for (int a = 0; a < g.d; ++a) face_mob_[a].assign(total_, 0.0);
  flux_.assign(total_, 0.0);
  cg_r_.assign(total_, 0.0);
  cg_p_.assign(total_, 0.0);
  cg_ap_.assign(total_, 0.0);
  cg_diag_.assign(total_, 0.0);
  ubar_.assign(total_, 0.0);
  rhs_.assign(total_, 0.0);

  if (state_.mass0 < 0.0) state_.mass0 = integrate(state_.u);
  state_.diag.p_list = cfg_.p_list;
  state_.diag.n_list = cfg_.energy_n_list;
}

bool Simulation::finished() const {
  return state_.t >= cfg_.t_end || state_.step >= cfg_.max_steps;
}

const std::vector<Field>& Simulation::velocity() {
  if (!vel_valid_) {
    if (drift_) vel_ = drift_->velocity(state_.u);
    vel_valid_ = true;
  }
  return vel_;
}

double Simulation::choose_dt() {
  const GridSpec& g = state_.u.spec;
  const double h = g.h();
  double vmax = 0.0;
  if (drift_) {
    velocity();
    for (const Field& c : vel_) vmax = std::max(vmax, max_abs(c));
  }
  const double remaining = cfg_.t_end - state_.t;

  if (cfg_.dt_policy.kind == DtPolicy::Kind::Fixed) {
    // Diffusion is implicit; the hard stability limit is the explicit
    // advection sweep.
    if (vmax > 0.0 && cfg_.dt_policy.dt > h / vmax)
      throw SolverError("CFL violation: Fixed dt exceeds h/max|V|", state_.step,
                        state_.t);
    return std::min(cfg_.dt_policy.dt, remaining);
  }

  const double umax = max_abs(state_.u);
  const double diff_scale = cfg_.epsilon + cfg_.m * mobility_power(umax, cfg_.m);
  double dt = remaining;
  if (diff_scale > 0.0)
    dt = std::min(dt, cfg_.dt_policy.cfl_diff * h * h / (2.0 * g.d * diff_scale));
  if (vmax > 0.0) dt = std::min(dt, cfg_.dt_policy.cfl_adv * h / vmax);
  if (!(dt > 0.0))
    throw SolverError("admissible dt collapsed to zero", state_.step, state_.t);
  return dt;
}

void Simulation::advect(double dt) {
  if (!drift_) return;
  velocity();
  const GridSpec& g = state_.u.spec;
  const double h = g.h();
  const int d = g.d;
  const int n = n_;
  std::vector<double>& u = state_.u.values;

  for (int a = 0; a < d; ++a) {
    const std::vector<double>& v = vel_[a].values;
    const std::size_t sa = stride_[a];
    const int n1 = d >= 2 ? n : 1;
    const int n2 = d >= 3 ? n : 1;

    // flux through the upwind-reconstructed face between cell i and i+1
    std::size_t idx = 0;
    for (int i0 = 0; i0 < n; ++i0)
      for (int i1 = 0; i1 < n1; ++i1)
        for (int i2 = 0; i2 < n2; ++i2, ++idx) {
          const int ia = a == 0 ? i0 : (a == 1 ? i1 : i2);
          const std::size_t up = ia + 1 < n ? idx + sa : idx + sa - sa * n;
          const std::size_t up2 =
              ia + 2 < n ? idx + 2 * sa : idx + 2 * sa - sa * n;
          const std::size_t dn = ia > 0 ? idx - sa : idx - sa + sa * n;
          const double w = 0.5 * (v[idx] + v[up]);
          double uf;
          if (w >= 0.0)
            uf = u[idx] + 0.5 * minmod(u[idx] - u[dn], u[up] - u[idx]);
          else
            uf = u[up] - 0.5 * minmod(u[up] - u[idx], u[up2] - u[up]);
          flux_[idx] = w * uf;
        }

    const double lambda = dt / h;
    idx = 0;
    for (int i0 = 0; i0 < n; ++i0)
      for (int i1 = 0; i1 < n1; ++i1)
        for (int i2 = 0; i2 < n2; ++i2, ++idx) {
          const int ia = a == 0 ? i0 : (a == 1 ? i1 : i2);
          const std::size_t dn = ia > 0 ? idx - sa : idx - sa + sa * n;
          u[idx] -= lambda * (flux_[idx] - flux_[dn]);
        }
  }
  vel_valid_ = false;
}

void Simulation::build_face_mobility(const std::vector<double>& ubar) {
  const GridSpec& g = state_.u.spec;
  const int d = g.d;
  const int n = n_;
  const int n1 = d >= 2 ? n : 1;
  const int n2 = d >= 3 ? n : 1;
  const double m = cfg_.m;
  for (int a = 0; a < d; ++a) {
    const std::size_t sa = stride_[a];
    std::vector<double>& A = face_mob_[a];
    std::size_t idx = 0;
    for (int i0 = 0; i0 < n; ++i0)
      for (int i1 = 0; i1 < n1; ++i1)
        for (int i2 = 0; i2 < n2; ++i2, ++idx) {
          const int ia = a == 0 ? i0 : (a == 1 ? i1 : i2);
          const std::size_t up = ia + 1 < n ? idx + sa : idx + sa - sa * n;
          A[idx] = cfg_.epsilon +
                   0.5 * m * (mobility_power(ubar[idx], m) +
                              mobility_power(ubar[up], m));
        }
  }
}

void Simulation::apply_helmholtz(const std::vector<double>& x,
                                 std::vector<double>& out, double dt) const {
  const GridSpec& g = state_.u.spec;
  const double c = dt / (g.h() * g.h());
  const int d = g.d;
  const int n = n_;
  const int n1 = d >= 2 ? n : 1;
  const int n2 = d >= 3 ? n : 1;

  std::size_t idx = 0;
  for (int i0 = 0; i0 < n; ++i0)
    for (int i1 = 0; i1 < n1; ++i1)
      for (int i2 = 0; i2 < n2; ++i2, ++idx) {
        double acc = 0.0;
        for (int a = 0; a < d; ++a) {
          const std::size_t sa = stride_[a];
          const int ia = a == 0 ? i0 : (a == 1 ? i1 : i2);
          const std::size_t up = ia + 1 < n ? idx + sa : idx + sa - sa * n;
          const std::size_t dn = ia > 0 ? idx - sa : idx - sa + sa * n;
          const double Aup = face_mob_[a][idx];
          const double Adn = face_mob_[a][dn];
          acc += Aup * (x[up] - x[idx]) - Adn * (x[idx] - x[dn]);
        }
        out[idx] = x[idx] - c * acc;
      }
}

double Simulation::cg_solve(std::vector<double>& g, const std::vector<double>& rhs,
                            double dt) {
  const GridSpec& gs = state_.u.spec;
  const double c = dt / (gs.h() * gs.h());
  const int d = gs.d;
  const int n = n_;
  const int n1 = d >= 2 ? n : 1;
  const int n2 = d >= 3 ? n : 1;

  // Jacobi diagonal of I + dt L
  std::size_t idx = 0;
  for (int i0 = 0; i0 < n; ++i0)
    for (int i1 = 0; i1 < n1; ++i1)
      for (int i2 = 0; i2 < n2; ++i2, ++idx) {
        double diag = 1.0;
        for (int a = 0; a < d; ++a) {
          const std::size_t sa = stride_[a];
          const int ia = a == 0 ? i0 : (a == 1 ? i1 : i2);
          const std::size_t dn = ia > 0 ? idx - sa : idx - sa + sa * n;
          diag += c * (face_mob_[a][idx] + face_mob_[a][dn]);
        }
        cg_diag_[idx] = diag;
      }

  auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
  };

  apply_helmholtz(g, cg_ap_, dt);
  double rhs_norm2 = 0.0;
  for (std::size_t i = 0; i < total_; ++i) {
    cg_r_[i] = rhs[i] - cg_ap_[i];
    rhs_norm2 += rhs[i] * rhs[i];
  }
  if (rhs_norm2 == 0.0) {
    std::fill(g.begin(), g.end(), 0.0);
    return 0.0;
  }
  const double tol2 = cfg_.cg_tol * cfg_.cg_tol * rhs_norm2;

  for (std::size_t i = 0; i < total_; ++i) cg_p_[i] = cg_r_[i] / cg_diag_[i];
  double rz = dot(cg_r_, cg_p_);
  double res2 = dot(cg_r_, cg_r_);

  int it = 0;
  while (res2 > tol2 && it < cfg_.cg_max_iters) {
    apply_helmholtz(cg_p_, cg_ap_, dt);
    const double alpha = rz / dot(cg_p_, cg_ap_);
    for (std::size_t i = 0; i < total_; ++i) {
      g[i] += alpha * cg_p_[i];
      cg_r_[i] -= alpha * cg_ap_[i];
    }
    double rz_new = 0.0;
    res2 = 0.0;
    for (std::size_t i = 0; i < total_; ++i) {
      const double z = cg_r_[i] / cg_diag_[i];
      rz_new += cg_r_[i] * z;
      res2 += cg_r_[i] * cg_r_[i];
    }
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < total_; ++i)
      cg_p_[i] = cg_r_[i] / cg_diag_[i] + beta * cg_p_[i];
    ++it;
  }
  return std::sqrt(res2 / rhs_norm2);
}

void Simulation::diffuse(double dt) {
  std::vector<double>& u = state_.u.values;
  rhs_ = u;
  ubar_ = u;

  double residual = 0.0;
  for (int sweep = 0; sweep < cfg_.picard_sweeps; ++sweep) {
    build_face_mobility(ubar_);
    std::vector<double> g = ubar_; // warm start from the previous iterate
    residual = cg_solve(g, rhs_, dt);
    ubar_ = std::move(g);
  }
  max_picard_residual_ = std::max(max_picard_residual_, residual);

  // Commit in flux form: u_new = rhs - dt L g telescopes exactly, so the
  // inner-solver tolerance never leaks into the mass budget.
  apply_helmholtz(ubar_, cg_ap_, dt);
  for (std::size_t i = 0; i < total_; ++i)
    u[i] = rhs_[i] - (cg_ap_[i] - ubar_[i]);
  vel_valid_ = false;
}

void Simulation::clip_and_check() {
  std::vector<double>& u = state_.u.values;
  double clipped = 0.0;
  for (std::size_t i = 0; i < total_; ++i) {
    if (u[i] < 0.0) {
      clipped -= u[i];
      u[i] = 0.0;
    }
  }
  state_.clipped_total += clipped * state_.u.spec.cell_volume();

  if (!all_finite(state_.u))
    throw SolverError("non-finite field after step", state_.step, state_.t);

  const double mass = integrate(state_.u);
  const double ref = state_.mass0 != 0.0 ? std::abs(state_.mass0) : 1.0;
  if (std::abs(mass - state_.mass0) > cfg_.mass_drift_tol * ref)
    throw SolverError("mass drift beyond tolerance", state_.step, state_.t);

  if (state_.mass0 > 0.0 &&
      boundary_mass() > cfg_.boundary_mass_tol * state_.mass0)
    throw SolverError(
        "boundary mass beyond tolerance; domain too small for this run",
        state_.step, state_.t);
}

double Simulation::boundary_mass() const {
  const GridSpec& g = state_.u.spec;
  const int rim = cfg_.boundary_rim_cells;
  const int n = n_;
  const int n1 = g.d >= 2 ? n : 1;
  const int n2 = g.d >= 3 ? n : 1;
  auto in_rim = [&](int i) { return i < rim || i >= n - rim; };
  double sum = 0.0;
  std::size_t idx = 0;
  for (int i0 = 0; i0 < n; ++i0)
    for (int i1 = 0; i1 < n1; ++i1)
      for (int i2 = 0; i2 < n2; ++i2, ++idx) {
        if (in_rim(i0) || (g.d >= 2 && in_rim(i1)) || (g.d >= 3 && in_rim(i2)))
          sum += state_.u.values[idx];
      }
  return sum * g.cell_volume();
}

void Simulation::step() {
  if (finished()) return;
  const double dt = choose_dt();
  advect(dt);
  diffuse(dt);
  state_.t += dt;
  state_.step += 1;
  last_dt_ = dt;
  clip_and_check();
}

void Simulation::record_row() {
  const GridSpec& g = state_.u.spec;
  const Field& u = state_.u;
  SeriesRow row;
  row.step = state_.step;
  row.t = state_.t;
  row.dt = last_dt_;
  row.mass = integrate(u);
  row.linf = max_abs(u);
  for (double p : cfg_.p_list) row.lp.push_back(lp_norm(u, p));

  const std::vector<Field>* vel = nullptr;
  if (drift_) {
    velocity();
    vel = &vel_;
  }

  {
    const std::vector<Field> grad_u = gradient_fd(u);
    double gsq = 0.0;
    for (const Field& c : grad_u) gsq += inner(c, c);
    row.grad_u_sq = gsq;
  }
  if (vel) {
    double vsq = 0.0;
    for (const Field& c : *vel) vsq += inner(c, c);
    row.vu_sq = vsq;
  }

  for (double nexp : cfg_.energy_n_list) {
    Field un(g), ul(g);
    const double l = 0.5 * (nexp + cfg_.m - 1.0);
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double v = u.values[i] > 0.0 ? u.values[i] : 0.0;
      un.values[i] = std::pow(v, nexp);
      ul.values[i] = std::pow(v, l);
    }
    row.int_un.push_back(integrate(un));
    const std::vector<Field> grad_ul = gradient_fd(ul);
    double gl = 0.0;
    for (const Field& c : grad_ul) gl += inner(c, c);
    row.grad_l2.push_back(gl);
    double pair = 0.0;
    if (vel) {
      const std::vector<Field> grad_un = gradient_fd(un);
      for (int a = 0; a < g.d; ++a) pair += inner((*vel)[a], grad_un[a]);
      pair *= (nexp - 1.0);
    }
    row.drift_pair.push_back(pair);
  }

  row.boundary_mass = boundary_mass();
  row.clipped_mass = state_.clipped_total;
  state_.diag.rows.push_back(std::move(row));
}

std::vector<Field> gradient_fd(const Field& f) {
  const GridSpec& g = f.spec;
  const double inv2h = 0.5 / g.h();
  const int n = g.n;
  const int n1 = g.d >= 2 ? n : 1;
  const int n2 = g.d >= 3 ? n : 1;
  std::size_t stride[3] = {1, 1, 1};
  stride[g.d - 1] = 1;
  for (int a = g.d - 2; a >= 0; --a)
    stride[a] = stride[a + 1] * static_cast<std::size_t>(n);

  std::vector<Field> grad(g.d, Field(g));
  for (int a = 0; a < g.d; ++a) {
    const std::size_t sa = stride[a];
    std::size_t idx = 0;
    for (int i0 = 0; i0 < n; ++i0)
      for (int i1 = 0; i1 < n1; ++i1)
        for (int i2 = 0; i2 < n2; ++i2, ++idx) {
          const int ia = a == 0 ? i0 : (a == 1 ? i1 : i2);
          const std::size_t up = ia + 1 < n ? idx + sa : idx + sa - sa * n;
          const std::size_t dn = ia > 0 ? idx - sa : idx - sa + sa * n;
          grad[a].values[idx] = (f.values[up] - f.values[dn]) * inv2h;
        }
  }
  return grad;
}

std::pair<Field, DiagnosticsSeries> run(const Field& u0, const SolverConfig& cfg,
                                        const std::optional<RegularizerSpec>& kernel,
                                        const SnapshotHook& hook) {
  std::shared_ptr<const DriftKernel> drift;
  if (kernel) drift = get_drift_kernel(*kernel, u0.spec);
  Simulation sim(u0, cfg, drift);

  sim.record_row();
  if (hook) hook(sim.state());
  while (!sim.finished()) {
    sim.step();
    if (sim.state().step % cfg.snapshot_every == 0 || sim.finished()) {
      sim.record_row();
      if (hook) hook(sim.state());
    }
  }
  return {sim.state().u, sim.state().diag};
}

RunState step(const RunState& state, const SolverConfig& cfg,
              std::shared_ptr<const DriftKernel> drift) {
  Simulation sim(state, cfg, std::move(drift));
  sim.step();
  return sim.state();
}

EpsilonLimitReport epsilon_limit_study(const Field& u0, const SolverConfig& cfg,
                                       double s,
                                       const std::vector<double>& eps_list) {
  if (cfg.dt_policy.kind != DtPolicy::Kind::Fixed)
    throw std::invalid_argument(
        "epsilon_limit_study: requires a Fixed dt policy so snapshot times "
        "align across runs");
  for (std::size_t i = 1; i < eps_list.size(); ++i)
    if (!(eps_list[i] < eps_list[i - 1]))
      throw std::invalid_argument("epsilon_limit_study: eps_list must decrease");

  EpsilonLimitReport report;
  report.eps = eps_list;

  std::vector<std::vector<Field>> fields(eps_list.size());
  std::vector<std::vector<double>> times(eps_list.size());
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    SolverConfig ci = cfg;
    ci.epsilon = eps_list[i]; // parabolic regularization and cutoff tied
    RegularizerSpec kern(u0.spec.d, s, eps_list[i]);
    run(u0, ci, kern, [&](const RunState& st) {
      fields[i].push_back(st.u);
      times[i].push_back(st.t);
    });
  }

  for (std::size_t i = 0; i + 1 < eps_list.size(); ++i) {
    const std::size_t count = std::min(fields[i].size(), fields[i + 1].size());
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < count; ++k) {
      const double d0 = lp_norm(fields[i][k] - fields[i + 1][k], 1.0);
      const double d1 = lp_norm(fields[i][k + 1] - fields[i + 1][k + 1], 1.0);
      acc += 0.5 * (d0 + d1) * (times[i][k + 1] - times[i][k]);
    }
    report.pairwise_l1.push_back(acc);
  }

  report.monotone = true;
  for (std::size_t i = 0; i + 1 < report.pairwise_l1.size(); ++i) {
    if (!(report.pairwise_l1[i + 1] < report.pairwise_l1[i]))
      report.monotone = false;
    const double dr = report.pairwise_l1[i] > 0.0 && report.pairwise_l1[i + 1] > 0.0
                          ? std::log(report.pairwise_l1[i] / report.pairwise_l1[i + 1]) /
                                std::log(eps_list[i] / eps_list[i + 1])
                          : 0.0;
    report.orders.push_back(dr);
  }
  if (!report.orders.empty()) {
    double sum = 0.0;
    for (double o : report.orders) sum += o;
    report.fitted_order = sum / static_cast<double>(report.orders.size());
  }
  if (report.pairwise_l1.empty() ||
      report.pairwise_l1.front() == 0.0) // identical runs, e.g. zero data
    report.monotone = true;
  return report;
}

} // namespace aggdiff
