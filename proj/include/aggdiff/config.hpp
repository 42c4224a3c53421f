#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "aggdiff/diagnostics.hpp"
#include "aggdiff/drift.hpp"
#include "aggdiff/grid.hpp"
#include "aggdiff/solver.hpp"

namespace aggdiff {

struct InitialSpec {
  std::string kind = "gaussian"; // gaussian | ball | barenblatt | file | zero
  double mass = 1.0;
  double sigma = 0.4;
  double radius = 0.5;
  double t0 = 1.0;
  double C = 1.0;
  std::array<double, 3> center = {0, 0, 0};
  std::string path; // file kind
};

// Everything a batch run needs; serializes to/from the JSON config format.
struct ExperimentConfig {
  // grid
  int d = 3;
  int n = 64;
  double L = 2.0;
  // physics
  double m = 2.0;
  double s = 1.0;
  double epsilon = 0.0;         // parabolic regularization
  double kernel_epsilon = -1.0; // < 0: tied to epsilon
  bool drift_enabled = true;
  // solver
  std::string dt_kind = "adaptive"; // adaptive | fixed
  double dt = 0.0;
  double cfl_diff = 0.4;
  double cfl_adv = 0.4;
  double t_end = 1.0;
  int snapshot_every = 10;
  long max_steps = -1; // < 0: unlimited
  // initial data
  InitialSpec initial;
  std::optional<InitialSpec> pair_initial; // cmd_compare second run
  // diagnostics
  std::vector<double> p_list = {2.0};
  std::vector<double> energy_n_list;
  OscillationParams oscillation;
  bool oscillation_enabled = false;
  // output
  std::string output_dir = "out";

  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig from_json_file(const std::string& path);
  std::string to_json_text() const;

  GridSpec grid() const;
  SolverConfig solver_config() const;
  // nullopt when the drift is disabled
  std::optional<RegularizerSpec> regularizer() const;
  double effective_kernel_epsilon() const;
};

// m enters only for the barenblatt kind (the profile of the configured
// diffusion exponent).
Field build_initial(const InitialSpec& spec, const GridSpec& g, double m);

} // namespace aggdiff
