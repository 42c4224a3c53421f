// aggdiff: batch experiment runner for the diffusion-aggregation laboratory.
//
//   aggdiff run <config.json>         evolve one configured experiment
//   aggdiff compare <a.json> <b.json> co-evolve two runs, H^-1 gap + fit
//   aggdiff verify [--fast]           operator/property self-test battery
//   aggdiff regime <d> <m> <s>        classification against m_c = 2 - 2s/d
//   aggdiff holder <run_dir>          oscillation-decay fit over snapshots
//
// Exit codes: 0 ok, 1 verify failures, 2 bad config/arguments, 3 solver
// error, 4 compare mass mismatch.

#include <cstdio>
#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"

#include "aggdiff/runner.hpp"

using namespace aggdiff;

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for degenerate diffusion-aggregation"};
  app.require_subcommand(1);

  std::string config_path, config_b, run_dir;
  bool fast = false;
  double inject_scale = 1.0;
  int reg_d = 3;
  double reg_m = 2.0, reg_s = 1.0;

  CLI::App* cmd_run = app.add_subcommand("run", "execute one configured run");
  cmd_run->add_option("config", config_path, "JSON config")->required();

  CLI::App* cmd_compare =
      app.add_subcommand("compare", "co-evolve two runs and track the H^-1 gap");
  cmd_compare->add_option("config_a", config_path, "first JSON config")->required();
  cmd_compare->add_option("config_b", config_b, "second JSON config")->required();

  CLI::App* cmd_verify = app.add_subcommand("verify", "operator self-tests");
  cmd_verify->add_flag("--fast", fast, "smaller grids, fewer sweeps");
  cmd_verify
      ->add_option("--inject-kernel-scale", inject_scale,
                   "mis-scale the free-space kernel constant (negative control)")
      ->capture_default_str();

  CLI::App* cmd_regime = app.add_subcommand("regime", "classify (d, m, s)");
  cmd_regime->add_option("d", reg_d)->required();
  cmd_regime->add_option("m", reg_m)->required();
  cmd_regime->add_option("s", reg_s)->required();

  CLI::App* cmd_holder =
      app.add_subcommand("holder", "oscillation decay over a finished run");
  cmd_holder->add_option("run_dir", run_dir, "run output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*cmd_run) {
      ExperimentConfig cfg;
      try {
        cfg = ExperimentConfig::from_json_file(config_path);
      } catch (const std::exception& err) {
        std::cerr << "config error: " << err.what() << "\n";
        return 2;
      }
      RunOutput out = run_experiment(cfg);
      if (!out.error.empty()) {
        std::cerr << "solver error: " << out.error << "\n";
        return 3;
      }
      const SeriesRow& last = out.series.rows.back();
      std::cout << "run complete: t = " << last.t << ", mass = " << last.mass
                << ", linf = " << last.linf << "\n"
                << "outputs in " << cfg.output_dir << "\n";
      return 0;
    }

    if (*cmd_compare) {
      ExperimentConfig ca, cb;
      try {
        ca = ExperimentConfig::from_json_file(config_path);
        cb = ExperimentConfig::from_json_file(config_b);
      } catch (const std::exception& err) {
        std::cerr << "config error: " << err.what() << "\n";
        return 2;
      }
      CompareOutput out = compare_experiments(ca, cb);
      if (!out.error.empty()) {
        std::cerr << "compare error: " << out.error << "\n";
        return 4;
      }
      std::cout << "eta(0) = " << out.eta.front() << ", eta(end) = "
                << out.eta.back();
      if (out.fit.valid) std::cout << ", fitted Gronwall C = " << out.fit.C;
      std::cout << "\noutputs in " << ca.output_dir << "\n";
      return 0;
    }

    if (*cmd_verify) {
      VerifyOptions opt;
      opt.fast = fast;
      opt.inject_kernel_scale = inject_scale;
      const auto checks = verify_battery(opt);
      int failures = 0;
      for (const auto& c : checks) {
        std::printf("%-42s %s  %s\n", c.name.c_str(), c.pass ? "PASS" : "FAIL",
                    c.detail.c_str());
        if (!c.pass) ++failures;
      }
      std::printf("%d/%zu checks passed\n", static_cast<int>(checks.size()) - failures,
                  checks.size());
      return failures == 0 ? 0 : 1;
    }

    if (*cmd_regime) {
      RegimeParams r;
      try {
        r = classify(reg_d, reg_m, reg_s);
      } catch (const std::exception& err) {
        std::cerr << "invalid parameters: " << err.what() << "\n";
        return 2;
      }
      std::printf("d = %d, m = %g, s = %g\n", r.d, r.m, r.s);
      std::printf("m_c = 2 - 2s/d = %.12g\n", r.m_c);
      std::printf("classification: %s\n",
                  r.subcritical ? "subcritical (diffusion dominates)"
                                : (r.m == r.m_c ? "critical" : "supercritical"));
      std::printf("case: %s\n", regime_case_name(r.case_tag));
      if (!r.note.empty()) std::printf("flags: %s\n", r.note.c_str());
      return 0;
    }

    if (*cmd_holder) {
      OscillationReport rep = holder_from_run_dir(run_dir);
      std::printf("levels: %zu, fitted eta = %.6g, holder exponent = %.6g\n",
                  rep.radius.size(), rep.eta_fitted, rep.holder_exponent);
      if (!rep.sufficient_resolution)
        std::printf("warning: %s\n", rep.note.c_str());
      std::printf("report written to %s/holder.json\n", run_dir.c_str());
      return 0;
    }
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 3;
  }
  return 2;
}
