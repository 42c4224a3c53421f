#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "aggdiff/drift.hpp"
#include "aggdiff/grid.hpp"
#include "aggdiff/series.hpp"

namespace aggdiff {

struct DtPolicy {
  enum class Kind { Fixed, Adaptive };
  Kind kind = Kind::Adaptive;
  double dt = 0.0;       // Fixed
  double cfl_diff = 0.4; // Adaptive: dt <= cfl_diff h^2 / (2d (eps + m max u^{m-1}))
  double cfl_adv = 0.4;  // both: dt <= cfl_adv h / max|V|

  static DtPolicy fixed(double dt);
  static DtPolicy adaptive(double cfl_diff = 0.4, double cfl_adv = 0.4);
};

struct SolverConfig {
  double m = 2.0;       // diffusion exponent, > 1
  double epsilon = 0.0; // parabolic regularization
  DtPolicy dt_policy = DtPolicy::adaptive();
  double t_end = 1.0;
  int snapshot_every = 10;
  long max_steps = std::numeric_limits<long>::max();

  std::vector<double> p_list;        // recorded L^p norms
  std::vector<double> energy_n_list; // recorded energy-audit exponents

  // run-abort safeguards
  int boundary_rim_cells = 2;
  double boundary_mass_tol = 1e-8;
  double mass_drift_tol = 1e-9;

  // implicit diffusion solve
  int picard_sweeps = 2;
  double cg_tol = 1e-11;
  int cg_max_iters = 2000;

  void validate() const;
};

struct RunState {
  Field u;
  double t = 0.0;
  long step = 0;
  DiagnosticsSeries diag;
  double mass0 = -1.0; // reference mass; set on first construction
  double clipped_total = 0.0;
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, long step, double t);
  long step;
  double t;
};

// Owns the run state plus the reusable solve buffers. One step is
//   explicit conservative MUSCL/minmod advection by V * u,
// then
//   backward-Euler diffusion with lagged mobility (Picard sweeps), solved by
//   Jacobi-CG and committed in flux (defect) form so mass is conserved to
//   machine precision regardless of the inner tolerance.
// Negative undershoots are clipped at 0 and the clipped mass is accounted.
class Simulation {
 public:
  Simulation(Field u0, SolverConfig cfg,
             std::shared_ptr<const DriftKernel> drift = nullptr);
  Simulation(RunState state, SolverConfig cfg,
             std::shared_ptr<const DriftKernel> drift = nullptr);

  const RunState& state() const { return state_; }
  RunState& state() { return state_; }
  const SolverConfig& config() const { return cfg_; }
  bool finished() const;

  void step();
  void record_row(); // appends a diagnostics row for the current state

  // velocity field V * u for the current state (empty when drift is off)
  const std::vector<Field>& velocity();

  double last_dt() const { return last_dt_; }
  double max_picard_residual() const { return max_picard_residual_; }

 private:
  void init();
  double choose_dt();
  void advect(double dt);
  void diffuse(double dt);
  void clip_and_check();
  double boundary_mass() const;
  void build_face_mobility(const std::vector<double>& ubar);
  void apply_helmholtz(const std::vector<double>& x, std::vector<double>& out,
                       double dt) const;
  double cg_solve(std::vector<double>& g, const std::vector<double>& rhs,
                  double dt);

  RunState state_;
  SolverConfig cfg_;
  std::shared_ptr<const DriftKernel> drift_;

  std::vector<Field> vel_;
  bool vel_valid_ = false;

  // geometry
  int n_ = 0;
  std::size_t total_ = 0;
  std::size_t stride_[3] = {1, 1, 1};

  // buffers
  std::vector<double> face_mob_[3];
  std::vector<double> flux_;
  std::vector<double> cg_r_, cg_p_, cg_ap_, cg_diag_, ubar_, rhs_;

  double last_dt_ = 0.0;
  double max_picard_residual_ = 0.0;
};

using SnapshotHook = std::function<void(const RunState&)>;

// Integrates u0 to cfg.t_end, recording a diagnostics row (and invoking the
// hook) every snapshot_every steps plus at the first and last instant.
// kernel = nullopt runs with the drift disabled.
std::pair<Field, DiagnosticsSeries> run(
    const Field& u0, const SolverConfig& cfg,
    const std::optional<RegularizerSpec>& kernel,
    const SnapshotHook& hook = {});

// Single-step entry matching the run-state contract.
RunState step(const RunState& state, const SolverConfig& cfg,
              std::shared_ptr<const DriftKernel> drift);

// Centered-difference gradient with periodic wrap; shared by the solver
// diagnostics and the audit tooling.
std::vector<Field> gradient_fd(const Field& f);

struct EpsilonLimitReport {
  std::vector<double> eps;
  std::vector<double> pairwise_l1; // space-time L1 distance of successive runs
  std::vector<double> orders;      // log-ratio fit per adjacent distance pair
  double fitted_order = 0.0;
  bool monotone = false;
};

// Runs the same experiment across eps_list (parabolic regularization and
// kernel cutoff tied together) and measures self-convergence. Requires a
// Fixed dt policy so snapshot times align across runs.
EpsilonLimitReport epsilon_limit_study(const Field& u0, const SolverConfig& cfg,
                                       double s,
                                       const std::vector<double>& eps_list);

} // namespace aggdiff
