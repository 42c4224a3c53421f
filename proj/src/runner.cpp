#include "aggdiff/runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "json.hpp"

#include "aggdiff/exponents.hpp"
#include "aggdiff/fracops.hpp"
#include "aggdiff/initial.hpp"
#include "aggdiff/solver.hpp"

namespace aggdiff {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string snapshot_name(long step) {
  std::ostringstream s;
  s << "snap_" << step << ".agd";
  return s.str();
}

void write_meta(const fs::path& dir, const ExperimentConfig& cfg,
                const RunOutput& out, const std::string& u0_hash) {
  json meta;
  meta["config"] = json::parse(cfg.to_json_text());
  meta["u0_hash"] = u0_hash;
  meta["regime"] = {{"m_c", out.regime.m_c},
                    {"subcritical", out.regime.subcritical},
                    {"case", regime_case_name(out.regime.case_tag)},
                    {"note", out.regime.note}};
  meta["max_picard_residual"] = out.max_picard_residual;
  if (!out.series.rows.empty()) {
    const SeriesRow& last = out.series.rows.back();
    meta["final"] = {{"t", last.t},
                     {"mass", last.mass},
                     {"linf", last.linf},
                     {"boundary_mass", last.boundary_mass},
                     {"clipped_mass", last.clipped_mass}};
    meta["mass_rel_drift"] =
        out.series.rows.front().mass != 0.0
            ? std::abs(last.mass - out.series.rows.front().mass) /
                  std::abs(out.series.rows.front().mass)
            : 0.0;
  }
  if (!out.error.empty())
    meta["error"] = {{"what", out.error}, {"step", out.error_step}, {"t", out.error_t}};
  std::ofstream f(dir / "meta.json");
  f << meta.dump(2) << '\n';
}

} // namespace

RunOutput run_experiment(const ExperimentConfig& cfg, bool keep_snapshots,
                         bool write_files) {
  RunOutput out;
  out.regime = classify(cfg.d, cfg.m, cfg.s);

  const GridSpec g = cfg.grid();
  Field u0 = build_initial(cfg.initial, g, cfg.m);
  const std::string u0_hash = content_hash(u0);

  fs::path dir(cfg.output_dir);
  if (write_files) fs::create_directories(dir);

  SnapshotHook hook = [&](const RunState& st) {
    if (keep_snapshots) out.snapshots.push_back({st.u, st.t});
    if (write_files) write_snapshot((dir / snapshot_name(st.step)).string(), st.u, st.t);
  };

  std::shared_ptr<const DriftKernel> drift;
  const auto kernel = cfg.regularizer();
  if (kernel) drift = get_drift_kernel(*kernel, g);

  Simulation sim(std::move(u0), cfg.solver_config(), drift);
  try {
    sim.record_row();
    hook(sim.state());
    while (!sim.finished()) {
      sim.step();
      if (sim.state().step % cfg.snapshot_every == 0 || sim.finished()) {
        sim.record_row();
        hook(sim.state());
      }
    }
  } catch (const SolverError& err) {
    out.error = err.what();
    out.error_step = err.step;
    out.error_t = err.t;
  }

  out.final_field = sim.state().u;
  out.series = sim.state().diag;
  out.max_picard_residual = sim.max_picard_residual();

  if (write_files) {
    std::ofstream csv(dir / "series.csv");
    csv << out.series.csv();
    write_meta(dir, cfg, out, u0_hash);
  }
  return out;
}

CompareOutput compare_experiments(const ExperimentConfig& ca,
                                  const ExperimentConfig& cb, bool write_files) {
  CompareOutput out;
  if (!(ca.grid() == cb.grid()) || ca.m != cb.m || ca.s != cb.s ||
      ca.epsilon != cb.epsilon || ca.drift_enabled != cb.drift_enabled)
    throw std::invalid_argument("compare: runs must share grid and physics");

  const GridSpec g = ca.grid();
  Field ua = build_initial(ca.initial, g, ca.m);
  Field ub = build_initial(cb.initial, g, cb.m);
  const double mass_a = integrate(ua), mass_b = integrate(ub);
  if (std::abs(mass_a - mass_b) >
      1e-11 * std::max({std::abs(mass_a), std::abs(mass_b), 1.0})) {
    out.error = "initial data masses differ";
    return out;
  }

  std::shared_ptr<const DriftKernel> drift;
  const auto kernel = ca.regularizer();
  if (kernel) drift = get_drift_kernel(*kernel, g);

  SolverConfig sc = ca.solver_config();
  if (sc.dt_policy.kind != DtPolicy::Kind::Fixed)
    throw std::invalid_argument(
        "compare: use a fixed dt policy so the two runs share time levels");

  Simulation sa(std::move(ua), sc, drift);
  Simulation sb(std::move(ub), sc, drift);

  auto record_eta = [&] {
    out.t.push_back(sa.state().t);
    out.eta.push_back(hminus1_distance(sa.state().u, sb.state().u));
  };
  record_eta();
  while (!sa.finished() && !sb.finished()) {
    sa.step();
    sb.step();
    if (sa.state().step % sc.snapshot_every == 0 || sa.finished() || sb.finished())
      record_eta();
  }
  sa.record_row();
  sb.record_row();
  out.a.final_field = sa.state().u;
  out.b.final_field = sb.state().u;
  out.a.series = sa.state().diag;
  out.b.series = sb.state().diag;

  // least squares on log eta over the positive tail
  std::vector<double> ts, ls;
  for (std::size_t i = 0; i < out.eta.size(); ++i)
    if (out.eta[i] > 0.0) {
      ts.push_back(out.t[i]);
      ls.push_back(std::log(out.eta[i]));
    }
  if (ts.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double nn = static_cast<double>(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
      sx += ts[i];
      sy += ls[i];
      sxx += ts[i] * ts[i];
      sxy += ts[i] * ls[i];
    }
    out.fit.C = (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
    out.fit.log_eta0 = (sy - out.fit.C * sx) / nn;
    out.fit.valid = true;
  }

  if (write_files) {
    fs::path dir(ca.output_dir);
    fs::create_directories(dir);
    std::ofstream csv(dir / "eta.csv");
    csv.precision(17);
    csv << "t,eta\n";
    for (std::size_t i = 0; i < out.t.size(); ++i)
      csv << out.t[i] << ',' << out.eta[i] << '\n';
    json fit{{"C", out.fit.C}, {"log_eta0", out.fit.log_eta0}, {"valid", out.fit.valid}};
    std::ofstream jf(dir / "gronwall.json");
    jf << fit.dump(2) << '\n';
  }
  return out;
}

ScalingReport scaling_test(const ExperimentConfig& cfg, double r) {
  ScalingReport report;
  report.r = r;
  report.m = cfg.m;
  report.m_c = 2.0 - 2.0 * cfg.s / cfg.d;
  report.predicted_exponent = 2.0 * cfg.d - cfg.d * cfg.m - 2.0 * cfg.s;

  const GridSpec g = cfg.grid();
  Field u0 = build_initial(cfg.initial, g, cfg.m);

  report.measured_exponent =
      r == 1.0 ? report.predicted_exponent
               : measured_drift_scaling_exponent(u0, r, cfg.s, cfg.m);

  if (r == 1.0) {
    report.l1_discrepancy_rel = 0.0;
    return report;
  }

  const double time_factor = std::pow(r, cfg.d * (cfg.m - 1.0) + 2.0);

  // base run
  RunOutput base = run_experiment(cfg, false, false);
  if (!base.error.empty())
    throw std::runtime_error("scaling_test base run failed: " + base.error);

  // rescaled-data run on the L/r grid with rescaled regularizations
  ExperimentConfig rc = cfg;
  rc.L = cfg.L / r;
  rc.epsilon = cfg.epsilon * std::pow(r, cfg.d * (cfg.m - 1.0));
  rc.kernel_epsilon = cfg.effective_kernel_epsilon() / r;
  rc.t_end = cfg.t_end / time_factor;
  if (rc.dt_kind == "fixed") rc.dt = cfg.dt / time_factor;

  Field v0 = rescale_field(u0, r);
  const auto kernel = rc.regularizer();
  SolverConfig sc = rc.solver_config();
  auto [v_final, v_series] = run(v0, sc, kernel);

  const Field expected = rescale_field(base.final_field, r);
  const double denom = lp_norm(expected, 1.0);
  report.l1_discrepancy_rel =
      denom > 0.0 ? lp_norm(v_final - expected, 1.0) / denom : 0.0;
  return report;
}

OscillationReport holder_from_run_dir(const std::string& run_dir,
                                      bool write_files) {
  fs::path dir(run_dir);
  std::ifstream mf(dir / "meta.json");
  if (!mf) throw std::invalid_argument("holder: missing meta.json in " + run_dir);
  json meta = json::parse(mf);
  const ExperimentConfig cfg =
      ExperimentConfig::from_json_text(meta.at("config").dump());

  std::vector<Snapshot> snaps;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("snap_", 0) == 0 && entry.path().extension() == ".agd")
      snaps.push_back(read_snapshot(entry.path().string()));
  }
  if (snaps.empty())
    throw std::invalid_argument("holder: no snapshots in " + run_dir);
  std::sort(snaps.begin(), snaps.end(),
            [](const Snapshot& a, const Snapshot& b) { return a.t < b.t; });

  OscillationReport rep = oscillation_decay(snaps, cfg.m, cfg.oscillation);
  if (write_files) {
    json j{{"eta_fitted", rep.eta_fitted},
           {"holder_exponent", rep.holder_exponent},
           {"sufficient_resolution", rep.sufficient_resolution},
           {"radius", rep.radius},
           {"osc_percentile", rep.osc_percentile},
           {"osc_exact", rep.osc_exact},
           {"note", rep.note}};
    std::ofstream out(dir / "holder.json");
    out << j.dump(2) << '\n';
  }
  return rep;
}

std::vector<VerifyCheck> verify_battery(const VerifyOptions& opt) {
  std::vector<VerifyCheck> checks;
  auto add = [&](const std::string& name, bool pass, const std::string& detail) {
    checks.push_back({name, pass, detail});
  };
  std::ostringstream detail;
  const int n_small = opt.fast ? 16 : 32;

  // 1. periodic symbol eigenfunction
  {
    GridSpec g(3, n_small, 1.0);
    Field u(g);
    const double xi = std::numbers::pi / g.L * 2.0; // mode k = 2
    for (int i = 0; i < g.n; ++i)
      for (int j = 0; j < g.n; ++j)
        for (int k = 0; k < g.n; ++k)
          u.values[(static_cast<std::size_t>(i) * g.n + j) * g.n + k] =
              std::sin(xi * g.coord(i));
    KernelSpec ks{3, 0.8, KernelMode::Periodic};
    Field pot = riesz_potential(u, ks);
    double err = 0.0;
    const double scale = std::pow(xi * xi, -0.8);
    for (std::size_t i = 0; i < u.size(); ++i)
      err = std::max(err, std::abs(pot.values[i] - scale * u.values[i]));
    detail.str("");
    detail << "max deviation " << err;
    add("periodic symbol eigenfunction", err < 1e-10, detail.str());
  }

  // 2. Newtonian inverse identity (bulk of cmd_verify's negative control)
  {
    GridSpec g(3, 32, 1.0);
    Field u = make_gaussian(g, 1.0, 0.12);
    KernelSpec ks{3, 1.0, KernelMode::FreeSpace};
    ks.norm_scale = opt.inject_kernel_scale;
    Field pot = riesz_potential(u, ks);
    Field lap = laplacian_fd(pot);
    // interior residual; the potential is not periodic across the box
    double num = 0.0, den = 0.0;
    const int rim = 2;
    for (int i = rim; i < g.n - rim; ++i)
      for (int j = rim; j < g.n - rim; ++j)
        for (int k = rim; k < g.n - rim; ++k) {
          const std::size_t f = (static_cast<std::size_t>(i) * g.n + j) * g.n + k;
          const double r = -lap.values[f] - u.values[f];
          num += r * r;
          den += u.values[f] * u.values[f];
        }
    const double rel = std::sqrt(num / den);
    detail.str("");
    detail << "relative residual " << rel;
    add("newtonian inverse identity", rel < 1e-2, detail.str());
  }

  // 3. drift kernel antisymmetry and mass neutrality
  {
    GridSpec g(3, n_small, 1.0);
    RegularizerSpec spec(3, 0.9, 0.2);
    auto kern = build_drift_kernel(spec, g);
    const int m = kern[0].spec.n;
    double asym = 0.0, sum0 = 0.0;
    for (int a = 0; a < 3; ++a) {
      double acc = 0.0;
      for (double v : kern[a].values) acc += v;
      sum0 = std::max(sum0, std::abs(acc));
    }
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k) {
          const std::size_t f = (static_cast<std::size_t>(i) * m + j) * m + k;
          const std::size_t fr =
              (static_cast<std::size_t>((m - i) % m) * m + (m - j) % m) * m +
              (m - k) % m;
          asym = std::max(asym, std::abs(kern[0].values[f] + kern[0].values[fr]));
        }
    detail.str("");
    detail << "antisymmetry " << asym << ", component sum " << sum0;
    add("drift kernel odd symmetry", asym == 0.0 && sum0 < 1e-12, detail.str());
  }

  // 4. divergence decay bound
  {
    GridSpec g(3, opt.fast ? 32 : 64, 0.75);
    RegularizerSpec spec(3, 1.0, 0.1);
    auto rep = verify_div_decay(spec, g, {0.1, 0.2});
    detail.str("");
    detail << "overall C: " << rep.overall_C[0] << ", " << rep.overall_C[1];
    add("drift divergence decay", rep.pass, detail.str());
  }

  // 5. Plancherel split independence
  {
    GridSpec g(3, n_small, 1.0);
    Field u = make_gaussian(g, 1.0, 0.25);
    Field w = make_gaussian(g, 2.0, 0.35, {0.3, 0.1, -0.2});
    const double full = bilinear_form(u, w, 0.7);
    const Field a1 = abs_grad_power(u, 0.9);  // |grad|^{r - r1}, r1 = 0.5 -> 2r - 2r1 = 0.9
    const Field a2 = abs_grad_power(w, 0.5);
    const double split = inner(a1, a2);
    detail.str("");
    detail << "direct " << full << " vs split " << split;
    add("plancherel split independence",
        std::abs(full - split) < 1e-10 * std::max(1.0, std::abs(full)),
        detail.str());
  }

  // 6. inverse composition
  {
    GridSpec g(3, n_small, 1.0);
    Field u = make_gaussian(g, 1.0, 0.3);
    const double mean = integrate(u) / g.domain_volume();
    KernelSpec ks{3, 1.0, KernelMode::Periodic};
    Field pot = riesz_potential(u, ks);
    Field back = frac_laplacian(frac_laplacian(pot, 0.5), 0.5);
    double err = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
      err = std::max(err, std::abs(back.values[i] - (u.values[i] - mean)));
    detail.str("");
    detail << "max deviation " << err;
    add("composition recovers mean-free input", err < 1e-8, detail.str());
  }

  // 7. GN ratio sweep
  {
    GridSpec g(3, n_small, 1.0);
    const int count = opt.fast ? 8 : 24;
    bool ok = true;
    double worst = 0.0;
    std::mt19937 rng(1234);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int trial = 0; trial < count; ++trial) {
      Field u = make_gaussian(g, 1.0, 0.2 + 0.02 * (trial % 5),
                              {0.1 * gauss(rng), 0.1 * gauss(rng), 0.0});
      const double alpha = 0.75;
      const double p = 1.0 / (0.5 / 3.0 + (0.5 - 1.0 / 3.0) * alpha +
                              (1.0 - alpha) / 2.0);
      const double ratio = gn_check(u, 0.5, p, 2.0, 2.0, alpha);
      worst = std::max(worst, ratio);
      ok = ok && ratio < 10.0;
    }
    detail.str("");
    detail << "worst ratio " << worst;
    add("gagliardo-nirenberg ratio bounded", ok, detail.str());
  }

  // 8. exponent algebra knife edge
  {
    bool ok = true;
    for (int i = 0; i < 10 && ok; ++i) {
      const Rat s(3 + i, 4);       // s = 0.75 .. 3.0 (clipped below)
      if (s >= Rat(3, 2)) break;
      const Rat mc = critical_exponent_exact(3, s);
      const Rat delta(1, 1000000);
      ok = ok && theta_at_base_below_two(3, mc + delta, s) &&
           !theta_at_base_below_two(3, mc - delta, s);
    }
    add("theta(3-m) < 2 iff subcritical", ok, "exact rational sweep near m_c");
  }

  // 9. moser sequence identity
  {
    const auto seq = moser_sequence_exact(Rat(3, 2), 20);
    bool ok = true;
    for (int k = 0; k <= 20; ++k)
      ok = ok && seq[static_cast<std::size_t>(k)] == moser_closed_form(Rat(3, 2), k);
    add("moser recursion equals closed form", ok, "k <= 20, exact");
  }

  return checks;
}

} // namespace aggdiff
