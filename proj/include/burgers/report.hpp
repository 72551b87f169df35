#pragma once

// JSON views of the solver results and the pass/fail verdict.

#include <cmath>
#include <string>
#include <vector>

#include "json.hpp"

#include "burgers/fit.hpp"
#include "burgers/global_inviscid.hpp"
#include "burgers/hum.hpp"
#include "burgers/local_exact.hpp"
#include "burgers/pipeline.hpp"
#include "burgers/smoothing.hpp"
#include "burgers/viscous.hpp"

namespace burgers {

using json = nlohmann::ordered_json;

/// Non-finite numbers become strings so the documents stay valid JSON.
inline json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

inline json nums(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

inline json to_json(const LineFit& f) {
  return {{"slope", num(f.slope)},         {"intercept", num(f.intercept)}, {"slope_stderr", num(f.slope_stderr)},
          {"ci95_low", num(f.ci95_low)},   {"ci95_high", num(f.ci95_high)}, {"points", f.points}};
}

inline json to_json(const NormReport& r) {
  return {{"c0", num(r.c0)}, {"c1", num(r.c1)}, {"c2", num(r.c2)},
          {"l2", num(r.l2)}, {"h1", num(r.h1)}, {"h2", num(r.h2)}};
}

inline json to_json(const StepStats& s) {
  return {{"max_residual", num(s.max_residual)}, {"rejected", s.rejected}, {"unresolved", s.unresolved}};
}

inline json to_json(const ViscousRun& r) {
  return {{"M_T", num(r.M_T)},
          {"max_sup", num(r.max_sup)},
          {"max_principle_ok", r.max_principle_ok},
          {"max_filter_residual", num(r.max_filter_residual)},
          {"energy_checked", r.energy_checked},
          {"energy_ok", r.energy_ok},
          {"max_energy_ratio", num(r.max_energy_ratio)},
          {"steps", to_json(r.stats)}};
}

inline json to_json(const SmoothingReport& r) {
  return {{"alpha", num(r.alpha)},   {"t1", num(r.t1)},
          {"t2", num(r.t2)},         {"T_star", num(r.T_star)},
          {"c2_at_Tstar", num(r.c2_at_Tstar)}, {"lambda1", num(r.lambda1)},
          {"lambda2", num(r.lambda2)}};
}

inline json to_json(const HumResult& h) {
  return {{"iterations", h.iterations},
          {"epsilon", num(h.epsilon)},
          {"terminal_l2", num(h.terminal_l2)},
          {"free_terminal_l2", num(h.free_terminal_l2)},
          {"cost", num(h.cost)},
          {"control_l2", num(h.control_l2)},
          {"residual", num(h.residual)},
          {"duality_defect", num(h.duality_defect)},
          {"window_nodes", h.window.size()}};
}

inline json to_json(const ArcReport& a) {
  return {{"scale", num(a.scale)},       {"frames", a.frames},          {"refine", a.refine},
          {"iterations", a.iterations},  {"gaps", nums(a.gaps)},       {"zstar_sup", num(a.zstar_sup)},
          {"flow_deviation", num(a.flow_deviation)}};
}

inline json to_json(const GlobalInviscidResult& r) {
  return {{"delta_hat", num(r.delta_hat)},
          {"gamma0", num(r.gamma0)},
          {"gammaT", num(r.gammaT)},
          {"eta", num(r.eta)},
          {"lambda_amplitude", num(r.lambda.amplitude)},
          {"first_arc", to_json(r.first)},
          {"last_arc", to_json(r.last)},
          {"controls", {{"p_sup", num(r.controls.p_sup())}, {"v_sup", num(r.controls.v_sup())}}}};
}

inline json to_json(const LocalExactResult& r) {
  return {{"outer_iterations", r.outer_iterations},
          {"cg_iterations", r.cg_iterations},
          {"gaps", nums(r.gaps)},
          {"damped", r.damped},
          {"smallness_warning", r.smallness_warning},
          {"data_h1", num(r.data_h1)},
          {"terminal_sup", num(r.terminal_sup)},
          {"hum", to_json(r.last_hum)}};
}

inline json to_json(const UniformityReport& u) {
  return {{"alphas", nums(u.alphas)},
          {"p_sup", nums(u.p_sup)},
          {"v_sup", nums(u.v_sup)},
          {"trace_c1", nums(u.trace_c1)},
          {"terminal", nums(u.terminal)},
          {"p_spread", num(u.p_spread)},
          {"v_spread", num(u.v_spread)},
          {"trace_spread", num(u.trace_spread)},
          {"terminal_spread", num(u.terminal_spread)},
          {"control_spread", num(u.control_spread)},
          {"flagged", u.flagged}};
}

inline json to_json(const AlphaLimitTable& t) {
  json j{{"alpha_ref", num(t.alpha_ref)},
         {"alphas", nums(t.alphas)},
         {"distances", nums(t.distances)},
         {"strictly_decreasing", t.strictly_decreasing},
         {"nonincreasing", t.nonincreasing}};
  j["rate"] = t.rate ? to_json(*t.rate) : json(nullptr);
  return j;
}

inline json to_json(const PipelineResult& r) {
  json stages = json::array();
  for (const auto& s : r.stages)
    stages.push_back({{"name", s.name},
                      {"t0", num(s.controls.tgrid.t0)},
                      {"t1", num(s.controls.tgrid.t1)},
                      {"steps", s.controls.tgrid.m},
                      {"seconds", num(s.seconds)},
                      {"p_sup", num(s.controls.p_sup())},
                      {"v_sup", num(s.controls.v_sup())},
                      {"max_principle_ok", s.max_principle_ok},
                      {"energy_ok", s.energy_ok},
                      {"replay_gap", num(s.replay_gap)}});
  return {{"plan",
           {{"T", num(r.plan.T)}, {"T_star", num(r.plan.T_star)}, {"tau", num(r.plan.tau)}, {"N", num(r.plan.N)}}},
          {"trivial", r.trivial},
          {"tapered", r.tapered},
          {"tau_halvings", r.tau_halvings},
          {"thresholds", {{"delta_hat2", num(r.delta_hat2)}, {"delta_hat_v", num(r.delta_hat_v)}, {"eta", num(r.eta)}}},
          {"smoothing", to_json(r.smoothing)},
          {"stages", stages},
          {"approx_terminal_h1", num(r.approx_terminal_h1)},
          {"local_data_h1", num(r.local_data_h1)},
          {"local_outer_iterations", r.local_outer_iterations},
          {"local_cg_iterations", r.local_cg_iterations},
          {"terminal_sup", num(r.terminal_sup)},
          {"replay_terminal_sup", num(r.replay_terminal_sup)},
          {"tolerance", num(r.tolerance)},
          {"v_l_h34", num(r.v_l_h34)},
          {"v_r_h34", num(r.v_r_h34)},
          {"monitors_ok", r.monitors_ok}};
}

/// Named pass/fail checks; a run passes when every check does.
class Verdict {
public:
  void check(const std::string& name, bool pass, double value, double threshold) {
    checks_.push_back({name, pass, value, threshold});
  }
  void check(const std::string& name, bool pass) { check(name, pass, pass ? 1.0 : 0.0, 1.0); }

  bool all_pass() const {
    for (const auto& c : checks_)
      if (!c.pass) return false;
    return true;
  }

  std::vector<std::string> failed() const {
    std::vector<std::string> f;
    for (const auto& c : checks_)
      if (!c.pass) f.push_back(c.name);
    return f;
  }

  json to_json() const {
    json a = json::array();
    for (const auto& c : checks_)
      a.push_back({{"name", c.name}, {"pass", c.pass}, {"value", num(c.value)}, {"threshold", num(c.threshold)}});
    return {{"all_pass", all_pass()}, {"checks", a}};
  }

private:
  struct Check {
    std::string name;
    bool pass;
    double value;
    double threshold;
  };
  std::vector<Check> checks_;
};

} // namespace burgers
