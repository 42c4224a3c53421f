#pragma once

#include <string>
#include <vector>

#include "aggdiff/config.hpp"
#include "aggdiff/diagnostics.hpp"
#include "aggdiff/snapshot.hpp"

namespace aggdiff {

struct RunOutput {
  Field final_field;
  DiagnosticsSeries series;
  RegimeParams regime;
  std::vector<Snapshot> snapshots; // populated when keep_snapshots
  double max_picard_residual = 0.0;
  std::string error; // empty on success; run aborted otherwise
  long error_step = -1;
  double error_t = 0.0;
};

// Executes one configured run. write_files emits series.csv, meta.json and
// snap_<step>.agd under cfg.output_dir; keep_snapshots retains fields
// in-memory for the diagnostics that need trajectories.
RunOutput run_experiment(const ExperimentConfig& cfg, bool keep_snapshots = false,
                         bool write_files = true);

struct GronwallFit {
  double C = 0.0;       // fitted slope of log eta
  double log_eta0 = 0.0;
  bool valid = false;
};

struct CompareOutput {
  std::vector<double> t;
  std::vector<double> eta; // H^-1 distance squared
  GronwallFit fit;
  RunOutput a, b;
  std::string error;
};

// Co-evolves two runs sharing grid and physics; initial data may differ but
// must share mass.
CompareOutput compare_experiments(const ExperimentConfig& ca,
                                  const ExperimentConfig& cb,
                                  bool write_files = true);

struct ScalingReport {
  double r = 1.0;
  double m = 0.0;
  double m_c = 0.0;
  double l1_discrepancy_rel = 0.0; // evolved rescaled run vs rescaled base run
  double measured_exponent = 0.0;  // drift-term mismatch, operator route
  double predicted_exponent = 0.0; // 2d - dm - 2s
};

// Base run to cfg.t_end; rescaled-data run (grid L/r, cutoff eps/r, parabolic
// eps r^{d(m-1)}) to t_end / r^{d(m-1)+2}; reports the relative L1 gap and
// the measured drift scaling exponent at t = 0.
ScalingReport scaling_test(const ExperimentConfig& cfg, double r);

struct VerifyCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct VerifyOptions {
  bool fast = false;
  // deliberately mis-scale the free-space kernel constant (negative control)
  double inject_kernel_scale = 1.0;
};

// The operator/property battery behind `aggdiff verify`.
std::vector<VerifyCheck> verify_battery(const VerifyOptions& opt);

// Oscillation-decay analysis over a finished run directory (snap_*.agd +
// meta.json); returns the report and writes holder.json when write_files.
OscillationReport holder_from_run_dir(const std::string& run_dir,
                                      bool write_files = true);

} // namespace aggdiff
