#include "aggdiff/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "aggdiff/initial.hpp"
#include "aggdiff/snapshot.hpp"

namespace aggdiff {

using nlohmann::json;

namespace {

InitialSpec initial_from_json(const json& j) {
  InitialSpec s;
  s.kind = j.value("kind", s.kind);
  const json params = j.value("params", json::object());
  s.mass = params.value("mass", s.mass);
  s.sigma = params.value("sigma", s.sigma);
  s.radius = params.value("radius", s.radius);
  s.t0 = params.value("t0", s.t0);
  s.C = params.value("C", s.C);
  s.path = params.value("path", s.path);
  if (params.contains("center")) {
    auto c = params.at("center").get<std::vector<double>>();
    for (std::size_t a = 0; a < c.size() && a < 3; ++a) s.center[a] = c[a];
  }
  return s;
}

json initial_to_json(const InitialSpec& s) {
  json params{{"mass", s.mass},   {"sigma", s.sigma}, {"radius", s.radius},
              {"t0", s.t0},       {"C", s.C},
              {"center", std::vector<double>(s.center.begin(), s.center.end())}};
  if (!s.path.empty()) params["path"] = s.path;
  return json{{"kind", s.kind}, {"params", params}};
}

} // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& err) {
    throw std::invalid_argument(std::string("config parse error: ") + err.what());
  }
  ExperimentConfig cfg;
  const json grid = j.value("grid", json::object());
  cfg.d = grid.value("d", cfg.d);
  cfg.n = grid.value("n", cfg.n);
  cfg.L = grid.value("L", cfg.L);

  const json phys = j.value("physics", json::object());
  cfg.m = phys.value("m", cfg.m);
  cfg.s = phys.value("s", cfg.s);
  cfg.epsilon = phys.value("epsilon", cfg.epsilon);
  cfg.kernel_epsilon = phys.value("kernel_epsilon", cfg.kernel_epsilon);
  cfg.drift_enabled = phys.value("drift_enabled", cfg.drift_enabled);

  const json solver = j.value("solver", json::object());
  if (solver.contains("dt_policy")) {
    const json& p = solver.at("dt_policy");
    cfg.dt_kind = p.value("type", cfg.dt_kind);
    cfg.dt = p.value("dt", cfg.dt);
    cfg.cfl_diff = p.value("cfl_diff", cfg.cfl_diff);
    cfg.cfl_adv = p.value("cfl_adv", cfg.cfl_adv);
  }
  cfg.t_end = solver.value("t_end", cfg.t_end);
  cfg.snapshot_every = solver.value("snapshot_every", cfg.snapshot_every);
  cfg.max_steps = solver.value("max_steps", cfg.max_steps);

  if (j.contains("initial")) cfg.initial = initial_from_json(j.at("initial"));

  const json diag = j.value("diagnostics", json::object());
  if (diag.contains("p_list"))
    cfg.p_list = diag.at("p_list").get<std::vector<double>>();
  if (diag.contains("energy_n_list"))
    cfg.energy_n_list = diag.at("energy_n_list").get<std::vector<double>>();
  if (diag.contains("pair_run"))
    cfg.pair_initial = initial_from_json(diag.at("pair_run"));
  if (diag.contains("oscillation")) {
    const json& o = diag.at("oscillation");
    cfg.oscillation_enabled = true;
    cfg.oscillation.a = o.value("a", cfg.oscillation.a);
    cfg.oscillation.b = o.value("b", cfg.oscillation.b);
    cfg.oscillation.r0 = o.value("r0", cfg.oscillation.r0);
    cfg.oscillation.k_max = o.value("k_max", cfg.oscillation.k_max);
    if (o.contains("center")) {
      auto c = o.at("center").get<std::vector<double>>();
      for (std::size_t a = 0; a < c.size() && a < 3; ++a)
        cfg.oscillation.center[a] = c[a];
    }
  }

  cfg.output_dir = j.value("output_dir", cfg.output_dir);
  return cfg;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

std::string ExperimentConfig::to_json_text() const {
  json j;
  j["grid"] = {{"d", d}, {"n", n}, {"L", L}};
  j["physics"] = {{"m", m},
                  {"s", s},
                  {"epsilon", epsilon},
                  {"kernel_epsilon", kernel_epsilon},
                  {"drift_enabled", drift_enabled}};
  json policy;
  if (dt_kind == "fixed")
    policy = {{"type", "fixed"}, {"dt", dt}};
  else
    policy = {{"type", "adaptive"}, {"cfl_diff", cfl_diff}, {"cfl_adv", cfl_adv}};
  j["solver"] = {{"dt_policy", policy},
                 {"t_end", t_end},
                 {"snapshot_every", snapshot_every},
                 {"max_steps", max_steps}};
  j["initial"] = initial_to_json(initial);
  json diag{{"p_list", p_list}, {"energy_n_list", energy_n_list}};
  if (pair_initial) diag["pair_run"] = initial_to_json(*pair_initial);
  if (oscillation_enabled)
    diag["oscillation"] = {
        {"a", oscillation.a},
        {"b", oscillation.b},
        {"r0", oscillation.r0},
        {"k_max", oscillation.k_max},
        {"center", std::vector<double>(oscillation.center.begin(),
                                       oscillation.center.end())}};
  j["diagnostics"] = diag;
  j["output_dir"] = output_dir;
  return j.dump(2);
}

GridSpec ExperimentConfig::grid() const { return GridSpec(d, n, L); }

SolverConfig ExperimentConfig::solver_config() const {
  SolverConfig cfg;
  cfg.m = m;
  cfg.epsilon = epsilon;
  cfg.dt_policy = dt_kind == "fixed" ? DtPolicy::fixed(dt)
                                     : DtPolicy::adaptive(cfl_diff, cfl_adv);
  cfg.t_end = t_end;
  cfg.snapshot_every = snapshot_every;
  if (max_steps >= 0) cfg.max_steps = max_steps;
  cfg.p_list = p_list;
  cfg.energy_n_list = energy_n_list;
  cfg.validate();
  return cfg;
}

double ExperimentConfig::effective_kernel_epsilon() const {
  return kernel_epsilon >= 0.0 ? kernel_epsilon : epsilon;
}

std::optional<RegularizerSpec> ExperimentConfig::regularizer() const {
  if (!drift_enabled) return std::nullopt;
  return RegularizerSpec(d, s, effective_kernel_epsilon());
}

Field build_initial(const InitialSpec& spec, const GridSpec& g, double m) {
  if (spec.kind == "gaussian")
    return make_gaussian(g, spec.mass, spec.sigma, spec.center);
  if (spec.kind == "ball") return make_ball(g, spec.mass, spec.radius, spec.center);
  if (spec.kind == "barenblatt")
    return make_barenblatt(g, m, spec.t0, spec.C, spec.center);
  if (spec.kind == "zero") return Field(g);
  if (spec.kind == "file") {
    Snapshot s = read_snapshot(spec.path);
    if (!(s.field.spec == g))
      throw std::invalid_argument("initial file grid does not match config");
    return std::move(s.field);
  }
  throw std::invalid_argument("unknown initial kind: " + spec.kind);
}

} // namespace aggdiff
