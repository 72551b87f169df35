#pragma once

// Batch front-end: configuration, profile specs, command dispatch, artifacts
// and exit codes. tools/burgers_cli.cpp only forwards to cli_main.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "burgers/approx.hpp"
#include "burgers/controls.hpp"
#include "burgers/csv.hpp"
#include "burgers/errors.hpp"
#include "burgers/fit.hpp"
#include "burgers/global_inviscid.hpp"
#include "burgers/grid.hpp"
#include "burgers/local_exact.hpp"
#include "burgers/pipeline.hpp"
#include "burgers/report.hpp"
#include "burgers/smoothing.hpp"
#include "burgers/transport.hpp"
#include "burgers/viscous.hpp"

#ifndef BURGERS_VERSION
#define BURGERS_VERSION "1.0.0"
#endif

namespace burgers {

namespace fs = std::filesystem;

inline const char* output_root_env() { return "BURGERS_OUTPUT_ROOT"; }

enum ExitCode : int { exit_pass = 0, exit_config = 2, exit_solver = 3, exit_monitor = 4, exit_convergence = 5 };

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> c{"simulate", "control-inviscid", "control-viscous", "smooth", "approx",
                                          "local-exact", "pipeline", "alpha-limit", "sweep"};
  return c;
}

struct RunConfig {
  std::string command = "simulate";
  double L = 1.0;
  double T = 1.0;
  std::size_t n = 201;
  std::size_t m = 200;
  double alpha = 0.1;
  std::vector<double> alphas;  // empty: {alpha}
  double alpha_ref = 1e-3;
  double eta = 0.25;
  double margin = 0.1;
  double tau = 0.0;  // 0: T/20
  double N = 0.3;
  std::string profile = "sin:1:1";
  std::string target = "zero";
  std::string out;  // empty: $BURGERS_OUTPUT_ROOT/<command>, else out/<command>
  std::size_t stride = 1;
  double tolerance_factor = 20.0;  // terminal checks use factor * (dx + dt)
  double picard_tol = 1e-11;
  int picard_max_iter = 30;
  double epsilon = 1e-8;
  double cg_tol = 1e-12;
  double delta_hat = 0.0;  // 0: calibrate
  double delta_hat2 = 0.0;
  double delta_hat_v = 0.0;
  double theta = 0.5;
  bool rannacher = true;
  int max_halvings = 5;
  int tau_halvings = 6;
  std::string sweep = "alpha";  // alpha | tau | refine
  std::string sweep_command = "control-viscous";
  std::vector<double> taus;
  std::vector<std::size_t> ns;
  std::size_t threads = 0;  // 0: hardware concurrency

  std::string config_file;
  std::vector<std::string> overridden;  // set in the file and on the command line

  std::vector<double> alpha_list() const { return alphas.empty() ? std::vector<double>{alpha} : alphas; }
  double tau_or_default() const { return tau > 0.0 ? tau : T / 20.0; }
};

namespace detail {

inline std::unique_ptr<CLI::App> make_app(RunConfig& c) {
  auto app = std::make_unique<CLI::App>("Burgers-alpha controllability lab", "burgers_cli");
  app->option_defaults()->always_capture_default();
  app->add_option("command", c.command, "command to run")->check(CLI::IsMember(command_names()));
  app->add_option("--config", c.config_file, "flat key = value configuration file");
  app->add_option("--L", c.L, "interval length");
  app->add_option("--T", c.T, "horizon");
  app->add_option("--n", c.n, "spatial nodes");
  app->add_option("--m", c.m, "time steps");
  app->add_option("--alpha", c.alpha, "filter parameter");
  app->add_option("--alphas", c.alphas, "filter parameter list");
  app->add_option("--alpha_ref", c.alpha_ref, "reference alpha of the limit study");
  app->add_option("--eta", c.eta, "extension width");
  app->add_option("--margin", c.margin, "lambda amplitude margin");
  app->add_option("--tau", c.tau, "approximate-control window (0: T/20)");
  app->add_option("--N", c.N, "target constant");
  app->add_option("--profile", c.profile, "initial profile spec");
  app->add_option("--target", c.target, "target profile spec");
  app->add_option("--out", c.out, "output directory");
  app->add_option("--stride", c.stride, "frame stride of trajectory CSVs");
  app->add_option("--tolerance_factor", c.tolerance_factor, "terminal tolerance factor on dx + dt");
  app->add_option("--picard_tol", c.picard_tol, "fixed-point gap tolerance");
  app->add_option("--picard_max_iter", c.picard_max_iter, "fixed-point iteration cap");
  app->add_option("--epsilon", c.epsilon, "HUM penalty");
  app->add_option("--cg_tol", c.cg_tol, "CG relative tolerance");
  app->add_option("--delta_hat", c.delta_hat, "inviscid smallness threshold (0: calibrate)");
  app->add_option("--delta_hat2", c.delta_hat2, "bridge smallness threshold (0: calibrate)");
  app->add_option("--delta_hat_v", c.delta_hat_v, "local exact smallness threshold (0: calibrate)");
  app->add_option("--theta", c.theta, "time-stepping weight");
  app->add_option("--rannacher", c.rannacher, "start with backward-Euler quarter steps");
  app->add_option("--max_halvings", c.max_halvings, "step rejections per step");
  app->add_option("--tau_halvings", c.tau_halvings, "tau halvings allowed by the pipeline");
  app->add_option("--sweep", c.sweep, "sweep kind")->check(CLI::IsMember({"alpha", "tau", "refine"}));
  app->add_option("--sweep_command", c.sweep_command, "command run by every sweep cell")
      ->check(CLI::IsMember({"control-inviscid", "control-viscous", "approx", "local-exact", "simulate"}));
  app->add_option("--taus", c.taus, "tau list of the tau sweep");
  app->add_option("--ns", c.ns, "node counts of the refinement sweep");
  app->add_option("--threads", c.threads, "sweep worker threads");
  return app;
}

inline std::vector<std::string> valid_keys() {
  RunConfig dummy;
  auto app = make_app(dummy);
  std::vector<std::string> keys;
  for (const CLI::Option* o : app->get_options()) {
    if (o->get_name() == "--help") continue;
    std::string k = o->get_lnames().empty() ? o->get_name() : o->get_lnames().front();
    if (k == "config") continue;
    keys.push_back(k);
  }
  return keys;
}

inline std::string join(const std::vector<std::string>& v, const std::string& sep) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + v[i];
  return s;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string p;
  while (std::getline(ss, p, sep)) parts.push_back(p);
  return parts;
}

inline double to_number(const std::string& s, const std::string& spec) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("profile '" + spec + "': '" + s + "' is not a number");
  }
}

} // namespace detail

inline void validate(const RunConfig& c) {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  need(c.L > 0.0, "L must be positive");
  need(c.T > 0.0, "T must be positive");
  need(c.n >= 3, "n must be at least 3");
  need(c.m >= 1, "m must be at least 1");
  need(c.alpha >= 0.0, "alpha must be >= 0");
  for (double a : c.alphas) need(a >= 0.0, "alphas must be >= 0");
  need(c.alpha_ref > 0.0, "alpha_ref must be positive");
  need(c.eta > 0.0 && c.eta < 0.5 * c.L, "eta must lie in (0, L/2)");
  need(c.margin >= 0.0, "margin must be >= 0");
  need(c.tau >= 0.0, "tau must be >= 0");
  need(c.tau_or_default() < 0.5 * c.T, "stage plan needs tau < T/2");
  need(std::isfinite(c.N), "N must be finite");
  need(c.stride >= 1, "stride must be at least 1");
  need(c.tolerance_factor > 0.0, "tolerance_factor must be positive");
  need(c.picard_tol > 0.0 && c.picard_max_iter >= 1, "picard tolerances must be positive");
  need(c.epsilon > 0.0 && c.cg_tol > 0.0, "epsilon and cg_tol must be positive");
  need(c.delta_hat >= 0.0 && c.delta_hat2 >= 0.0 && c.delta_hat_v >= 0.0, "thresholds must be >= 0");
  need(c.theta >= 0.0 && c.theta <= 1.0, "theta must lie in [0, 1]");
  need(c.max_halvings >= 0 && c.tau_halvings >= 0, "halving counts must be >= 0");
  for (double t : c.taus) need(t > 0.0 && t < 0.5 * c.T, "taus must lie in (0, T/2)");
  for (std::size_t k : c.ns) need(k >= 3, "ns entries must be at least 3");
  if (c.command == "sweep") {
    if (c.sweep == "tau") need(!c.taus.empty(), "tau sweep needs taus");
    if (c.sweep == "refine") need(c.ns.size() >= 2, "refinement sweep needs at least two ns");
  }
}

/// Named initial profiles: zero, const:c, sin:k:amp, bump:center:width:amp, csv:path.
inline Field make_profile(const std::string& spec, const Grid1D& g) {
  using detail::to_number;
  if (spec.rfind("csv:", 0) == 0) {
    const auto rows = read_xy_csv(spec.substr(4));
    if (rows.size() < 2) throw ConfigError("profile '" + spec + "' needs at least two rows");
    if (rows.front().first > g.x_left + 1e-12 || rows.back().first < g.x_right - 1e-12)
      throw ConfigError("profile '" + spec + "' does not cover [" + fmt_double(g.x_left) + ", " +
                        fmt_double(g.x_right) + "]");
    return Field::sample(g, [&](double x) {
      auto it = std::lower_bound(rows.begin(), rows.end(), x, [](const auto& r, double v) { return r.first < v; });
      if (it == rows.begin()) return it->second;
      if (it == rows.end()) return rows.back().second;
      const auto& [x1, y1] = *it;
      const auto& [x0, y0] = *(it - 1);
      return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
    });
  }
  const auto parts = detail::split(spec, ':');
  if (parts.empty()) throw ConfigError("empty profile spec");
  const std::string& kind = parts[0];
  const double L = g.length();
  auto arity = [&](std::size_t k) {
    if (parts.size() != k + 1)
      throw ConfigError("profile '" + spec + "': " + kind + " takes " + std::to_string(k) + " parameter(s)");
  };
  if (kind == "zero") {
    arity(0);
    return Field(g, 0.0);
  }
  if (kind == "const") {
    arity(1);
    return Field(g, to_number(parts[1], spec));
  }
  if (kind == "sin") {
    arity(2);
    const double k = to_number(parts[1], spec), a = to_number(parts[2], spec);
    return Field::sample(g, [&](double x) { return a * std::sin(k * std::numbers::pi * (x - g.x_left) / L); });
  }
  if (kind == "bump") {
    arity(3);
    const double c = to_number(parts[1], spec), w = to_number(parts[2], spec), a = to_number(parts[3], spec);
    if (!(w > 0.0)) throw ConfigError("profile '" + spec + "': width must be positive");
    return Field::sample(g, [&](double x) {
      const double r = (x - c) / w;
      return std::abs(r) < 1.0 ? a * std::exp(1.0 - 1.0 / (1.0 - r * r)) : 0.0;
    });
  }
  throw ConfigError("unknown profile '" + spec + "'; expected zero, const:c, sin:k:amp, bump:center:width:amp or csv:path");
}

/// Flags override file values; unknown file keys are rejected with the valid list.
inline RunConfig parse_config(const std::vector<std::string>& args) {
  RunConfig first;
  auto app = detail::make_app(first);
  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app->parse(rev);
  } catch (const CLI::CallForHelp&) {
    throw;
  } catch (const CLI::ParseError& e) {
    throw ConfigError(std::string(e.what()) + "; valid keys: " + detail::join(detail::valid_keys(), ", "));
  }
  if (first.config_file.empty()) {
    validate(first);
    return first;
  }

  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigTOML().from_file(first.config_file);
  } catch (const CLI::ParseError& e) {
    throw ConfigError("cannot read config file " + first.config_file + ": " + e.what());
  }
  std::vector<std::string> merged;
  std::vector<std::string> overridden;
  for (const auto& it : items) {
    if (!it.parents.empty() || it.name == "--") {
      if (it.name == "++" || it.name == "--") continue;
      throw ConfigError("config sections are not supported: " + detail::join(it.parents, "."));
    }
    const std::string key = it.name;
    if (key == "command") {
      if (app->get_option("command")->count() > 0) overridden.push_back(key);
      else if (!it.inputs.empty()) merged.insert(merged.begin(), it.inputs.front());
      continue;
    }
    const CLI::Option* opt = app->get_option_no_throw("--" + key);
    if (opt == nullptr || key == "config")
      throw ConfigError("unknown key '" + key + "'; valid keys: " + detail::join(detail::valid_keys(), ", "));
    if (opt->count() > 0) {
      overridden.push_back(key);
      continue;
    }
    merged.push_back("--" + key);
    for (const auto& v : it.inputs) merged.push_back(v);
  }
  merged.insert(merged.end(), args.begin(), args.end());

  RunConfig cfg;
  auto app2 = detail::make_app(cfg);
  std::vector<std::string> rev2(merged.rbegin(), merged.rend());
  try {
    app2->parse(rev2);
  } catch (const CLI::ParseError& e) {
    throw ConfigError(std::string(e.what()) + "; valid keys: " + detail::join(detail::valid_keys(), ", "));
  }
  cfg.overridden = overridden;
  validate(cfg);
  return cfg;
}

inline RunConfig parse_config(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return parse_config(args);
}

inline json config_json(const RunConfig& c) {
  json j;
  j["command"] = c.command;
  j["L"] = c.L;
  j["T"] = c.T;
  j["n"] = c.n;
  j["m"] = c.m;
  j["alpha"] = c.alpha;
  j["alphas"] = c.alphas;
  j["alpha_ref"] = c.alpha_ref;
  j["eta"] = c.eta;
  j["margin"] = c.margin;
  j["tau"] = c.tau_or_default();
  j["N"] = c.N;
  j["profile"] = c.profile;
  j["target"] = c.target;
  j["out"] = c.out;
  j["stride"] = c.stride;
  j["tolerance_factor"] = c.tolerance_factor;
  j["picard_tol"] = c.picard_tol;
  j["picard_max_iter"] = c.picard_max_iter;
  j["epsilon"] = c.epsilon;
  j["cg_tol"] = c.cg_tol;
  j["delta_hat"] = c.delta_hat;
  j["delta_hat2"] = c.delta_hat2;
  j["delta_hat_v"] = c.delta_hat_v;
  j["theta"] = c.theta;
  j["rannacher"] = c.rannacher;
  j["max_halvings"] = c.max_halvings;
  j["tau_halvings"] = c.tau_halvings;
  j["sweep"] = c.sweep;
  j["sweep_command"] = c.sweep_command;
  j["taus"] = c.taus;
  j["ns"] = c.ns;
  j["threads"] = c.threads;
  j["config_file"] = c.config_file;
  j["overridden_by_flag"] = c.overridden;
  j["version"] = BURGERS_VERSION;
  return j;
}

inline fs::path output_dir(const RunConfig& c) {
  if (!c.out.empty()) return fs::path(c.out);
  const char* root = std::getenv(output_root_env());
  return fs::path(root && *root ? root : "out") / c.command;
}

inline void write_text(const fs::path& p, const std::string& s) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw SolverError("cannot write " + p.string());
  f << s;
}

inline void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

/// What a command leaves behind besides its files.
struct CommandOutcome {
  Verdict verdict;
  json report;
  std::vector<ControlTriple> controls;
  double terminal_error = 0.0;
  double metric = 0.0;  // command-specific headline number used by sweeps
  int code = exit_pass; // worst exit code of failed sweep cells
};

namespace detail {

inline ViscousOptions viscous_options(const RunConfig& c) {
  ViscousOptions v;
  v.step.theta = c.theta;
  v.step.max_halvings = c.max_halvings;
  v.rannacher = c.rannacher;
  return v;
}

inline NullControlOptions picard_options(const RunConfig& c) {
  NullControlOptions o;
  o.tol = c.picard_tol;
  o.max_iter = c.picard_max_iter;
  return o;
}

inline LocalExactOptions local_options(const RunConfig& c) {
  LocalExactOptions o;
  o.eta = c.eta;
  o.epsilon = c.epsilon;
  o.cg_tol = c.cg_tol;
  if (c.delta_hat_v > 0.0) o.delta_hat_v = c.delta_hat_v;
  return o;
}

inline double terminal_sup(const SpaceTimeField& y, const Field& target) {
  double e = 0.0;
  const std::size_t k = y.frames() - 1;
  for (std::size_t i = 0; i < target.size(); ++i) e = std::max(e, std::abs(y(k, i) - target[i]));
  return e;
}

inline CommandOutcome run_simulate(const RunConfig& c, const Grid1D& g, const fs::path& dir) {
  CommandOutcome o;
  const Field y0 = make_profile(c.profile, g);
  const TimeGrid tg = make_time_grid(0.0, c.T, c.m);
  const auto ctl = ControlTriple::zeros(tg);
  const auto run = simulate_viscous(y0, ctl, c.alpha, viscous_options(c));
  write_text(dir / "trajectory.csv", trajectory_csv(run.y, c.stride));
  write_text(dir / "controls.csv", ctl.csv());
  write_text(dir / "final.csv", field_csv(run.y.field(tg.m)));
  o.report = {{"run", to_json(run)}, {"final", to_json(norms(run.y.field(tg.m)))}};
  o.verdict.check("max_principle", run.max_principle_ok, run.max_sup, run.M_T);
  if (run.energy_checked) o.verdict.check("energy", run.energy_ok, run.max_energy_ratio, 1.01);
  o.verdict.check("filter_residual", run.max_filter_residual <= 1e-8, run.max_filter_residual, 1e-8);
  o.controls = {ctl};
  o.metric = norms(run.y.field(tg.m)).c0;
  return o;
}

inline CommandOutcome run_control_inviscid(const RunConfig& c, const Grid1D& g, const fs::path& dir) {
  CommandOutcome o;
  const Field y0 = make_profile(c.profile, g);
  const Field yT = make_profile(c.target, g);
  GlobalInviscidOptions opt;
  opt.eta = c.eta;
  opt.margin = c.margin;
  if (c.delta_hat > 0.0) opt.delta_hat = c.delta_hat;
  opt.picard = picard_options(c);
  const auto res = global_inviscid_control(y0, yT, c.alpha, c.T, c.m, opt);
  const auto replay = replay_inviscid(y0, res.controls, c.alpha);
  const double err = terminal_sup(replay, yT);
  const double dt = c.T / static_cast<double>(c.m);
  const double tol = c.tolerance_factor * (g.dx + dt);
  write_text(dir / "trajectory.csv", trajectory_csv(res.Y, c.stride));
  write_text(dir / "controls.csv", res.controls.csv());
  write_text(dir / "final.csv", field_csv(replay.field(replay.frames() - 1)));
  o.report = to_json(res);
  o.report["terminal_c0"] = num(err);
  o.report["replay_gap"] = num(sup_gap(res.Y, replay));
  o.report["tolerance"] = num(tol);
  o.verdict.check("flow_deviation_first", res.first.flow_deviation <= res.eta, res.first.flow_deviation, res.eta);
  o.verdict.check("flow_deviation_last", res.last.flow_deviation <= res.eta, res.last.flow_deviation, res.eta);
  o.verdict.check("terminal_c0", err <= tol, err, tol);
  o.controls = {res.controls};
  o.terminal_error = err;
  o.metric = err;
  return o;
}

inline PipelineOptions pipeline_options(const RunConfig& c) {
  PipelineOptions p;
  p.m = c.m;
  p.eta = c.eta;
  p.margin = c.margin;
  if (c.tau > 0.0) p.tau = c.tau;
  p.max_halvings = c.tau_halvings;
  if (c.delta_hat2 > 0.0) p.delta_hat2 = c.delta_hat2;
  if (c.delta_hat_v > 0.0) p.delta_hat_v = c.delta_hat_v;
  p.local = local_options(c);
  p.viscous = viscous_options(c);
  return p;
}

inline CommandOutcome run_control_viscous(const RunConfig& c, const Grid1D& g, const fs::path& dir, double alpha) {
  CommandOutcome o;
  const Field y0 = make_profile(c.profile, g);
  const auto res = global_viscous_control(y0, c.N, c.T, alpha, pipeline_options(c));
  write_text(dir / "trajectory.csv", res.trajectory_csv(c.stride));
  write_text(dir / "controls.csv", res.controls_csv());
  const auto& last = res.stages.back().replay;
  write_text(dir / "final.csv", field_csv(last.field(last.frames() - 1)));
  o.report = to_json(res);
  o.report["alpha"] = num(alpha);
  o.verdict.check("monitors", res.monitors_ok);
  o.verdict.check("terminal_sup", res.replay_terminal_sup <= res.tolerance, res.replay_terminal_sup, res.tolerance);
  if (!res.trivial)
    o.verdict.check("stage3_smallness", res.local_data_h1 <= res.delta_hat_v, res.local_data_h1, res.delta_hat_v);
  o.controls = stage_controls(res);
  o.terminal_error = res.replay_terminal_sup;
  o.metric = res.replay_terminal_sup;
  return o;
}

inline CommandOutcome run_pipeline(const RunConfig& c, const Grid1D& g, const fs::path& dir) {
  CommandOutcome o;
  const auto alphas = c.alpha_list();
  std::vector<UniformityRun> rows;
  std::vector<std::vector<double>> ps;
  json per = json::array();
  for (std::size_t j = 0; j < alphas.size(); ++j) {
    const fs::path sub = dir / ("alpha_" + std::to_string(j));
    fs::create_directories(sub);
    auto cell = run_control_viscous(c, g, sub, alphas[j]);
    write_json(sub / "report.json", cell.report);
    write_json(sub / "verdict.json", cell.verdict.to_json());
    for (const auto& name : cell.verdict.failed()) o.verdict.check("alpha_" + std::to_string(j) + "." + name, false);
    rows.push_back(UniformityRun::from(alphas[j], cell.controls, cell.terminal_error));
    std::vector<double> p;
    for (std::size_t s = 0; s < cell.controls.size(); ++s)
      for (std::size_t k = s == 0 ? 0 : 1; k < cell.controls[s].p.size(); ++k) p.push_back(cell.controls[s].p[k]);
    ps.push_back(std::move(p));
    per.push_back(cell.report);
    o.terminal_error = std::max(o.terminal_error, cell.terminal_error);
  }
  const auto u = uniformity_report(rows);
  write_text(dir / "uniformity.csv", u.csv());
  bool same_p = true;
  for (std::size_t j = 1; j < ps.size(); ++j) same_p = same_p && ps[j] == ps[0];
  o.verdict.check("p_identical_across_alpha", same_p);
  o.verdict.check("uniformity_spread", !u.flagged, std::max({u.p_spread, u.v_spread, u.trace_spread}), 3.0);
  o.report = {{"runs", per}, {"uniformity", to_json(u)}, {"p_identical", same_p}};
  o.metric = o.terminal_error;
  return o;
}

inline CommandOutcome run_smooth(const RunConfig& c, const Grid1D& g, const fs::path& dir) {
  CommandOutcome o;
  const Field y0 = make_profile(c.profile, g);
  const TimeGrid tg = make_time_grid(0.0, c.T, c.m);
  CsvWriter w({"alpha", "t", "h1", "h2", "h3"});
  json reps = json::array();
  std::vector<double> c2;
  for (double a : c.alpha_list()) {
    const auto r = smoothing_monitor(y0, a, tg, viscous_options(c));
    for (std::size_t k = 0; k < r.times.size(); ++k)
      w.row({a, r.times[k], r.h1_history[k], r.h2_history[k], r.h3_history[k]});
    reps.push_back(to_json(r));
    c2.push_back(r.c2_at_Tstar);
    o.verdict.check("T_star_before_half_T[" + fmt_double(a) + "]", r.T_star < 0.5 * c.T, r.T_star, 0.5 * c.T);
  }
  const double sp = spread(c2);
  write_text(dir / "smoothing.csv", w.str());
  o.report = {{"runs", reps}, {"c2_spread", num(sp)}};
  write_json(dir / "smoothing.json", o.report);
  o.verdict.check("c2_spread", sp <= 3.0, sp, 3.0);
  o.metric = sp;
  return o;
}

inline CommandOutcome run_approx(const RunConfig& c, const Grid1D& g, const fs::path& dir, double alpha,
                                 double tau) {
  CommandOutcome o;
  const Field y0 = make_profile(c.profile, g);
  const Field yf = make_profile(c.target, g);
  BridgeOptions b;
  b.eta = c.eta;
  b.margin = c.margin;
  if (c.delta_hat2 > 0.0) b.delta_hat2 = c.delta_hat2;
  b.picard = picard_options(c);
  const auto a = approx_control_stage(y0, yf, alpha, tau, b);
  const auto run = simulate_viscous(y0, a.controls, alpha, viscous_options(c));
  std::vector<double> d(g.n);
  for (std::size_t i = 0; i < g.n; ++i) d[i] = run.y(a.y.frames() - 1, i) - yf[i];
  const double replay_h1 = norms(d, g.dx).h1;
  write_text(dir / "trajectory.csv", trajectory_csv(a.y, c.stride));
  write_text(dir / "controls.csv", a.controls.csv());
  write_text(dir / "final.csv", field_csv(a.y.field(a.y.frames() - 1)));
  o.report = {{"alpha", num(alpha)},
              {"tau", num(tau)},
              {"tau0", num(a.bridge.tau0)},
              {"delta_hat2", num(a.bridge.delta_hat2)},
              {"M", num(a.bridge.M)},
              {"iterations_forward", a.bridge.iterations_forward},
              {"iterations_backward", a.bridge.iterations_backward},
              {"terminal_h1", num(a.terminal_h1)},
              {"remainder_h1", num(a.remainder_h1)},
              {"replay_terminal_h1", num(replay_h1)},
              {"replay_gap", num(sup_gap(a.y, run.y))},
              {"neumann_residual", num(a.remainder.neumann_residual)},
              {"coupling_residual", num(a.remainder.coupling_residual)},
              {"replay", to_json(run)}};
  o.verdict.check("max_principle", run.max_principle_ok, run.max_sup, run.M_T);
  o.controls = {a.controls};
  o.terminal_error = a.terminal_h1;
  o.metric = a.terminal_h1;
  return o;
}

inline CommandOutcome run_local_exact(const RunConfig& c, const Grid1D& g, const fs::path& dir) {
  CommandOutcome o;
  const Field y0 = make_profile(c.profile, g);
  const TimeGrid tg = make_time_grid(0.0, c.T, c.m);
  const auto r = local_exact_to_constant(y0, ConstantTrajectory::constant(c.N), c.alpha, tg, local_options(c));
  const auto run = simulate_viscous(y0, r.controls, c.alpha, viscous_options(c));
  const double err = terminal_sup(run.y, Field(g, c.N));
  const double tol = c.tolerance_factor * (g.dx + tg.dt);
  write_text(dir / "trajectory.csv", trajectory_csv(r.y, c.stride));
  write_text(dir / "controls.csv", r.controls.csv());
  write_text(dir / "final.csv", field_csv(run.y.field(tg.m)));
  json hum = to_json(r.last_hum);
  hum["objective_history"] = nums(r.last_hum.objective_history);
  hum["residual_history"] = nums(r.last_hum.residual_history);
  write_json(dir / "hum.json", hum);
  o.report = to_json(r);
  o.report["replay_terminal_sup"] = num(err);
  o.report["tolerance"] = num(tol);
  o.report["replay"] = to_json(run);
  o.verdict.check("hum_residual", r.last_hum.residual <= c.cg_tol, r.last_hum.residual, c.cg_tol);
  o.verdict.check("terminal_sup", err <= tol, err, tol);
  o.verdict.check("max_principle", run.max_principle_ok, run.max_sup, run.M_T);
  o.controls = {r.controls};
  o.terminal_error = err;
  o.metric = err;
  return o;
}

inline CommandOutcome run_alpha_limit(const RunConfig& c, const Grid1D& g, const fs::path& dir) {
  CommandOutcome o;
  const Field y0 = make_profile(c.profile, g);
  const TimeGrid tg = make_time_grid(0.0, c.T, c.m);
  const auto alphas = c.alphas.empty() ? std::vector<double>{0.4, 0.2, 0.1, 0.05} : c.alphas;
  const auto t = alpha_limit_study(y0, ControlTriple::zeros(tg), alphas, c.alpha_ref, viscous_options(c));
  write_text(dir / "alpha_limit.csv", t.csv());
  json fit = t.rate ? to_json(*t.rate) : json(nullptr);
  write_json(dir / "alpha_limit.fit.json", {{"x", "alpha"}, {"y", "distance"}, {"fit", fit}});
  o.report = to_json(t);
  o.verdict.check("strictly_decreasing", t.strictly_decreasing);
  o.metric = t.rate ? t.rate->slope : 0.0;
  return o;
}

} // namespace detail

inline CommandOutcome run_command(const RunConfig& c, const fs::path& dir);

namespace detail {

struct SweepCell {
  RunConfig cfg;
  std::string name;
  double key = 0.0;  // alpha, tau or n
  double alpha = 0.0;
};

inline CommandOutcome run_sweep(const RunConfig& c, const fs::path& dir) {
  std::vector<SweepCell> cells;
  auto base = c;
  base.command = c.sweep_command;
  base.alphas.clear();
  if (c.sweep == "alpha") {
    for (double a : c.alpha_list()) {
      SweepCell s{base, "alpha_" + std::to_string(cells.size()), a, a};
      s.cfg.alpha = a;
      cells.push_back(s);
    }
  } else if (c.sweep == "tau") {
    for (double a : c.alpha_list())
      for (double t : c.taus) {
        SweepCell s{base, "cell_" + std::to_string(cells.size()), t, a};
        s.cfg.command = "approx";
        s.cfg.alpha = a;
        s.cfg.tau = t;
        cells.push_back(s);
      }
  } else {
    for (std::size_t k : c.ns) {
      SweepCell s{base, "n_" + std::to_string(k), static_cast<double>(k), c.alpha};
      s.cfg.command = "control-inviscid";
      s.cfg.n = k;
      s.cfg.m = std::max<std::size_t>(
          4, static_cast<std::size_t>(std::llround(static_cast<double>(c.m) * static_cast<double>(k - 1) /
                                                   static_cast<double>(c.n - 1))));
      cells.push_back(s);
    }
  }

  struct CellResult {
    bool ok = false;
    int code = exit_pass;
    std::string error;
    CommandOutcome outcome;
  };
  std::vector<CellResult> results(cells.size());
  std::atomic<std::size_t> next{0};
  std::size_t workers = c.threads ? c.threads : std::max<std::size_t>(1, std::thread::hardware_concurrency());
  workers = std::min(workers, cells.size());
  auto work = [&] {
    for (std::size_t j = next++; j < cells.size(); j = next++) {
      auto& r = results[j];
      const fs::path sub = dir / cells[j].name;
      try {
        fs::create_directories(sub);
        write_json(sub / "config.resolved.json", config_json(cells[j].cfg));
        r.outcome = run_command(cells[j].cfg, sub);
        write_json(sub / "report.json", r.outcome.report);
        write_json(sub / "verdict.json", r.outcome.verdict.to_json());
        r.ok = true;
      } catch (const ConfigError& e) {
        r.code = exit_config;
        r.error = e.what();
      } catch (const ConvergenceError& e) {
        r.code = exit_convergence;
        r.error = e.what();
      } catch (const MonitorViolation& e) {
        r.code = exit_monitor;
        r.error = e.what();
      } catch (const std::exception& e) {
        r.code = exit_solver;
        r.error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();

  CommandOutcome o;
  json cj = json::array();
  for (std::size_t j = 0; j < cells.size(); ++j) {
    const auto& r = results[j];
    cj.push_back({{"name", cells[j].name}, {"ok", r.ok}, {"error", r.error}, {"metric", num(r.outcome.metric)}});
    if (!r.ok) o.verdict.check(cells[j].name + ".error", false);
    for (const auto& f : r.outcome.verdict.failed()) o.verdict.check(cells[j].name + "." + f, false);
  }
  o.report["cells"] = cj;

  if (c.sweep == "alpha") {
    std::vector<UniformityRun> rows;
    for (std::size_t j = 0; j < cells.size(); ++j)
      if (results[j].ok)
        rows.push_back(UniformityRun::from(cells[j].alpha, results[j].outcome.controls, results[j].outcome.terminal_error));
    const auto u = uniformity_report(rows);
    write_text(dir / "uniformity.csv", u.csv());
    o.report["uniformity"] = to_json(u);
    o.verdict.check("uniformity_spread", !u.flagged, std::max({u.p_spread, u.v_spread, u.trace_spread}), 3.0);
  } else if (c.sweep == "tau") {
    CsvWriter w({"tau", "alpha", "h1_terminal"});
    std::map<double, std::pair<std::vector<double>, std::vector<double>>> by_alpha;
    std::map<double, std::vector<double>> by_tau;
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (!results[j].ok) continue;
      const double h = results[j].outcome.metric;
      w.row({cells[j].key, cells[j].alpha, h});
      by_alpha[cells[j].alpha].first.push_back(cells[j].key);
      by_alpha[cells[j].alpha].second.push_back(h);
      by_tau[cells[j].key].push_back(h);
    }
    write_text(dir / "tau_law.csv", w.str());
    json fits = json::array();
    for (const auto& [a, xy] : by_alpha) {
      if (xy.first.size() < 2) continue;
      const auto f = fit_loglog(xy.first, xy.second);
      json fj = to_json(f);
      fj["alpha"] = a;
      fits.push_back(fj);
      o.verdict.check("tau_exponent[" + fmt_double(a) + "]", f.slope >= 0.45, f.slope, 0.45);
    }
    json spreads = json::array();
    for (const auto& [t, hs] : by_tau) {
      const double sp = spread(hs);
      spreads.push_back({{"tau", t}, {"alpha_spread", num(sp)}});
      o.verdict.check("alpha_spread[tau=" + fmt_double(t) + "]", sp <= 3.0, sp, 3.0);
    }
    write_json(dir / "tau_law.fit.json", {{"x", "tau"}, {"y", "h1_terminal"}, {"fits", fits}, {"alpha_spreads", spreads}});
    o.report["fits"] = fits;
  } else {
    CsvWriter w({"n", "dx", "dt", "error"});
    std::vector<double> dx, err;
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (!results[j].ok) continue;
      const auto& cc = cells[j].cfg;
      const double h = cc.L / static_cast<double>(cc.n - 1), dt = cc.T / static_cast<double>(cc.m);
      w.row({static_cast<double>(cc.n), h, dt, results[j].outcome.metric});
      dx.push_back(h);
      err.push_back(results[j].outcome.metric);
    }
    write_text(dir / "refinement.csv", w.str());
    if (dx.size() >= 2) {
      const auto f = fit_loglog(dx, err);
      write_json(dir / "refinement.fit.json", {{"x", "dx"}, {"y", "error"}, {"fit", to_json(f)}});
      o.report["fit"] = to_json(f);
      o.verdict.check("refinement_order", f.slope >= 0.8, f.slope, 0.8);
    }
  }
  for (const auto& r : results)
    if (!r.ok) o.code = std::max(o.code, r.code);
  return o;
}

} // namespace detail

inline CommandOutcome run_command(const RunConfig& c, const fs::path& dir) {
  const Grid1D g = make_grid(0.0, c.L, c.n);
  if (c.command == "simulate") return detail::run_simulate(c, g, dir);
  if (c.command == "control-inviscid") return detail::run_control_inviscid(c, g, dir);
  if (c.command == "control-viscous") return detail::run_control_viscous(c, g, dir, c.alpha);
  if (c.command == "pipeline") return detail::run_pipeline(c, g, dir);
  if (c.command == "smooth") return detail::run_smooth(c, g, dir);
  if (c.command == "approx") return detail::run_approx(c, g, dir, c.alpha, c.tau_or_default());
  if (c.command == "local-exact") return detail::run_local_exact(c, g, dir);
  if (c.command == "alpha-limit") return detail::run_alpha_limit(c, g, dir);
  if (c.command == "sweep") return detail::run_sweep(c, dir);
  throw ConfigError("unknown command '" + c.command + "'; valid: " + detail::join(command_names(), ", "));
}

/// Runs a validated config, writes config.resolved.json, report.json and
/// verdict.json, and returns the exit code.
inline int run(const RunConfig& c, std::ostream& log = std::cerr) {
  const fs::path dir = output_dir(c);
  auto fail = [&](int code, const char* type, const std::string& msg) {
    log << "burgers_cli: " << type << ": " << msg << "\n";
    write_json(dir / "verdict.json", {{"all_pass", false}, {"error", {{"type", type}, {"message", msg}}}});
    return code;
  };
  try {
    fs::create_directories(dir);
    write_json(dir / "config.resolved.json", config_json(c));
  } catch (const std::exception& e) {
    log << "burgers_cli: cannot prepare " << dir.string() << ": " << e.what() << "\n";
    return exit_solver;
  }
  try {
    const auto o = run_command(c, dir);
    write_json(dir / "report.json", o.report);
    write_json(dir / "verdict.json", o.verdict.to_json());
    if (o.code != exit_pass) return o.code;
    if (!o.verdict.all_pass()) {
      log << "burgers_cli: failed checks: " << detail::join(o.verdict.failed(), ", ") << "\n";
      return exit_monitor;
    }
    return exit_pass;
  } catch (const ConfigError& e) {
    return fail(exit_config, "config", e.what());
  } catch (const ConvergenceError& e) {
    return fail(exit_convergence, "convergence", e.what());
  } catch (const MonitorViolation& e) {
    return fail(exit_monitor, "monitor", e.what());
  } catch (const SolverError& e) {
    return fail(exit_solver, "solver", e.what());
  } catch (const std::exception& e) {
    return fail(exit_solver, "solver", e.what());
  }
}

inline int cli_main(int argc, const char* const* argv) {
  RunConfig c;
  try {
    c = parse_config(argc, argv);
  } catch (const CLI::CallForHelp&) {
    RunConfig d;
    std::cout << detail::make_app(d)->help();
    return exit_pass;
  } catch (const Error& e) {
    std::cerr << "burgers_cli: config: " << e.what() << "\n";
    return exit_config;
  }
  return run(c);
}

} // namespace burgers
