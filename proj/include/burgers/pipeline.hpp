#pragma once

// End-to-end viscous control to a constant (free run, approximate control,
// local exact control) and the alpha studies built on top of the solvers.

#include <algorithm>
#include <chrono>
#include <functional>
#include <cmath>
#include <future>
#include <optional>
#include <string>
#include <vector>

#include "burgers/approx.hpp"
#include "burgers/controls.hpp"
#include "burgers/csv.hpp"
#include "burgers/errors.hpp"
#include "burgers/fit.hpp"
#include "burgers/grid.hpp"
#include "burgers/local_exact.hpp"
#include "burgers/smoothing.hpp"
#include "burgers/viscous.hpp"

namespace burgers {

struct StagePlan {
  double T = 1.0;
  double T_star = 0.0;
  double tau = 0.05;
  double N = 0.0;

  double free_end() const { return 0.5 * T - tau; }
  double approx_end() const { return 0.5 * T; }

  void validate() const {
    if (!(T > 0.0)) throw ConfigError("stage plan needs T > 0");
    if (!(tau > 0.0) || !(tau < 0.5 * T)) throw ConfigError("stage plan needs 0 < tau < T/2");
    if (!(T_star < free_end()))
      throw ConfigError("stage plan violates T* < T/2 - tau: T* = " + fmt_double(T_star) +
                        ", T/2 - tau = " + fmt_double(free_end()));
  }
};

struct PipelineOptions {
  std::size_t m = 400;  // steps over [0, T] for the free run and the smoothing monitor
  double eta = 0.25;
  double margin = 0.1;
  std::optional<double> tau;  // default T/20
  int max_halvings = 6;
  std::optional<double> delta_hat2;
  std::optional<double> delta_hat_v;
  LocalExactOptions local;
  ViscousOptions viscous;
  bool replay = true;
};

struct StageRecord {
  std::string name;
  SpaceTimeField y;
  ControlTriple controls;
  double seconds = 0.0;
  SpaceTimeField replay;  // viscous solver driven by the stage controls, chained from the previous replay
  bool max_principle_ok = true;
  bool energy_ok = true;
  double replay_gap = 0.0;  // sup |y - replay|
};

struct PipelineResult {
  StagePlan plan;
  bool trivial = false;
  bool tapered = false;
  int tau_halvings = 0;
  double delta_hat2 = 0.0;
  double delta_hat_v = 0.0;
  double eta = 0.0;
  SmoothingReport smoothing;
  std::vector<StageRecord> stages;
  double approx_terminal_h1 = 0.0;  // |y2(tau) - N|_{H1}
  double local_data_h1 = 0.0;
  int local_outer_iterations = 0;
  int local_cg_iterations = 0;
  double terminal_sup = 0.0;         // constructed state
  double replay_terminal_sup = 0.0;  // chained replay
  double tolerance = 0.0;            // 20 (dx + dt) of the last stage
  double v_l_h34 = 0.0;
  double v_r_h34 = 0.0;
  bool monitors_ok = true;

  /// Concatenated control samples; each joint appears once.
  std::string controls_csv() const {
    CsvWriter w({"t", "p", "v_l", "v_r"});
    for (std::size_t s = 0; s < stages.size(); ++s) {
      const auto& c = stages[s].controls;
      for (std::size_t k = s == 0 ? 0 : 1; k <= c.tgrid.m; ++k)
        w.row({c.tgrid.t(k), c.p[k], c.v_l[k], c.v_r[k]});
    }
    return w.str();
  }

  std::string trajectory_csv(std::size_t stride = 1) const {
    CsvWriter w({"stage", "t", "x", "value"});
    if (stride == 0) stride = 1;
    for (std::size_t s = 0; s < stages.size(); ++s) {
      const auto& y = stages[s].y;
      const std::size_t F = y.frames();
      for (std::size_t k = s == 0 ? 0 : 1; k < F; ++k) {
        if (k % stride != 0 && k + 1 != F) continue;
        for (std::size_t i = 0; i < y.grid().n; ++i)
          w.row({static_cast<double>(s + 1), y.tgrid().t(k), y.grid().x(i), y(k, i)});
      }
    }
    return w.str();
  }
};

namespace detail {

inline TimeGrid shifted(const TimeGrid& tg, double t0) { return make_time_grid(t0, t0 + (tg.t1 - tg.t0), tg.m); }

inline SpaceTimeField shifted(const SpaceTimeField& F, double t0) {
  SpaceTimeField out(shifted(F.tgrid(), t0), F.grid());
  for (std::size_t k = 0; k < F.frames(); ++k) out.set_frame(k, F.frame(k));
  return out;
}

inline ControlTriple shifted(const ControlTriple& c, double t0) {
  ControlTriple out = c;
  out.tgrid = shifted(c.tgrid, t0);
  return out;
}

template <class F>
auto in_stage(const std::string& name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConvergenceError& e) {
    throw ConvergenceError(name + ": " + e.what(), e.history());
  } catch (const ConfigError& e) {
    throw ConfigError(name + ": " + e.what());
  } catch (const MonitorViolation& e) {
    throw MonitorViolation(name + ": " + e.what());
  } catch (const SolverError& e) {
    throw SolverError(name + ": " + e.what());
  }
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace detail

/// Steers y0 to the constant N at time T.
inline PipelineResult global_viscous_control(const Field& y0_in, double N, double T, double alpha,
                                             const PipelineOptions& opt = {}) {
  if (!(alpha >= 0.0)) throw ConfigError("alpha must be >= 0");
  if (!(T > 0.0)) throw ConfigError("T must be positive");
  if (opt.m < 4) throw ConfigError("pipeline needs at least 4 time steps");
  const Grid1D& g = y0_in.grid();
  const std::size_t n = g.n;
  PipelineResult res;
  res.eta = opt.eta;
  res.plan.T = T;
  res.plan.N = N;
  res.plan.tau = opt.tau.value_or(T / 20.0);
  const double dt = T / static_cast<double>(opt.m);
  const std::size_t m3 = std::max<std::size_t>(opt.m / 2, 2);
  const TimeGrid tg3 = make_time_grid(0.0, 0.5 * T, m3);
  res.tolerance = 20.0 * (g.dx + tg3.dt);

  double dev = 0.0;
  for (std::size_t i = 0; i < n; ++i) dev = std::max(dev, std::abs(y0_in[i] - N));
  if (dev == 0.0) {
    res.trivial = true;
    const std::vector<double> t_ends{0.0, res.plan.free_end(), res.plan.approx_end(), T};
    const char* names[] = {"free", "approx", "local-exact"};
    for (int s = 0; s < 3; ++s) {
      StageRecord r;
      r.name = names[s];
      const TimeGrid tg = make_time_grid(t_ends[s], t_ends[s + 1], 1);
      r.y = SpaceTimeField(tg, g);
      for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t i = 0; i < n; ++i) r.y(k, i) = N;
      r.controls = ControlTriple::constant(tg, 0.0, N, N);
      r.replay = r.y;
      res.stages.push_back(std::move(r));
    }
    return res;
  }

  Field y0 = y0_in;
  if (y0[0] != 0.0 || y0[n - 1] != 0.0) {
    y0[0] = 0.0;
    y0[n - 1] = 0.0;
    res.tapered = true;
  }

  res.smoothing = detail::in_stage("stage 1 (free run)", [&] {
    return smoothing_monitor(y0, alpha, make_time_grid(0.0, T, opt.m), opt.viscous);
  });
  res.plan.T_star = res.smoothing.T_star;
  res.plan.validate();

  BridgeOptions bopt;
  bopt.eta = opt.eta;
  bopt.margin = opt.margin;
  bopt.delta_hat2 = opt.delta_hat2;
  res.delta_hat2 = detail::in_stage("stage 2 (approximate control)", [&] { return bridge_threshold(g, bopt); });
  bopt.delta_hat2 = res.delta_hat2;
  res.delta_hat_v = opt.delta_hat_v ? *opt.delta_hat_v : detail::in_stage("stage 3 (local exact control)", [&] {
    return calibrate_delta_hat_v(g, tg3, opt.eta);
  });

  const Field target(g, N);
  ViscousRun free_run;
  ApproxResult ap;
  double t_free = 0.0, t_approx = 0.0;
  for (;;) {
    const double t1 = res.plan.free_end();
    const auto m1 = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(t1 / dt)));
    auto clock = std::chrono::steady_clock::now();
    free_run = detail::in_stage("stage 1 (free run)", [&] {
      return simulate_viscous(y0, ControlTriple::zeros(make_time_grid(0.0, t1, m1)), alpha, opt.viscous);
    });
    t_free = detail::seconds_since(clock);
    clock = std::chrono::steady_clock::now();
    const Field y20 = free_run.y.field(m1);
    bool ok = false;
    try {
      ap = detail::in_stage("stage 2 (approximate control)",
                            [&] { return approx_control_stage(y20, target, alpha, res.plan.tau, bopt); });
      ok = ap.terminal_h1 <= res.delta_hat_v;
    } catch (const ConfigError&) {
      ok = false;  // tau above tau0
    }
    t_approx = detail::seconds_since(clock);
    if (ok) break;
    if (res.tau_halvings >= opt.max_halvings)
      throw ConvergenceError("stage 2 (approximate control): |y(T/2) - N|_H1 stayed above delta_v = " +
                                 fmt_double(res.delta_hat_v) + " after " + std::to_string(opt.max_halvings) +
                                 " halvings of tau",
                             {ap.terminal_h1});
    res.plan.tau *= 0.5;
    ++res.tau_halvings;
    res.plan.validate();
  }
  res.approx_terminal_h1 = ap.terminal_h1;

  auto clock = std::chrono::steady_clock::now();
  const Field y30 = ap.y.field(ap.y.frames() - 1);
  LocalExactOptions lopt = opt.local;
  lopt.eta = opt.eta;
  lopt.delta_hat_v = res.delta_hat_v;
  const auto loc = detail::in_stage("stage 3 (local exact control)", [&] {
    return local_exact_to_constant(y30, ConstantTrajectory::constant(N), alpha, tg3, lopt);
  });
  const double t_local = detail::seconds_since(clock);
  res.local_data_h1 = loc.data_h1;
  res.local_outer_iterations = loc.outer_iterations;
  res.local_cg_iterations = loc.cg_iterations;

  StageRecord s1{"free", free_run.y, ControlTriple::zeros(free_run.y.tgrid()), t_free};
  StageRecord s2{"approx", detail::shifted(ap.y, res.plan.free_end()),
                 detail::shifted(ap.controls, res.plan.free_end()), t_approx};
  StageRecord s3{"local-exact", detail::shifted(loc.y, res.plan.approx_end()),
                 detail::shifted(loc.controls, res.plan.approx_end()), t_local};
  s1.replay = s1.y;
  s1.max_principle_ok = free_run.max_principle_ok;
  s1.energy_ok = free_run.energy_ok;
  res.stages = {std::move(s1), std::move(s2), std::move(s3)};

  for (std::size_t i = 0; i < n; ++i)
    res.terminal_sup = std::max(res.terminal_sup, std::abs(res.stages[2].y(m3, i) - N));

  if (opt.replay) {
    for (std::size_t s = 1; s < 3; ++s) {
      auto& st = res.stages[s];
      const auto& prev = res.stages[s - 1].replay;
      const Field start = prev.field(prev.frames() - 1);
      const auto run = detail::in_stage("replay of " + st.name, [&] {
        return simulate_viscous(start, st.controls, alpha, opt.viscous);
      });
      st.replay = run.y;
      st.max_principle_ok = run.max_principle_ok;
      st.energy_ok = run.energy_ok;
      st.replay_gap = sup_gap(st.y, st.replay);
    }
    for (std::size_t i = 0; i < n; ++i)
      res.replay_terminal_sup = std::max(res.replay_terminal_sup, std::abs(res.stages[2].replay(m3, i) - N));
  } else {
    res.replay_terminal_sup = res.terminal_sup;
  }
  for (const auto& st : res.stages) res.monitors_ok = res.monitors_ok && st.max_principle_ok && st.energy_ok;

  // traces resampled on 1024 uniform intervals of [0, T]
  const std::size_t M = 1024;
  std::vector<double> vl(M + 1), vr(M + 1);
  for (std::size_t j = 0; j <= M; ++j) {
    const double t = T * static_cast<double>(j) / static_cast<double>(M);
    const auto& c = t < res.plan.free_end() ? res.stages[0].controls
                    : t < res.plan.approx_end() ? res.stages[1].controls
                                                : res.stages[2].controls;
    vl[j] = c.v_l_at(t);
    vr[j] = c.v_r_at(t);
  }
  res.v_l_h34 = fractional_seminorm(vl, T, 0.75);
  res.v_r_h34 = fractional_seminorm(vr, T, 0.75);
  return res;
}

inline std::vector<ControlTriple> stage_controls(const PipelineResult& r) {
  std::vector<ControlTriple> c;
  for (const auto& s : r.stages) c.push_back(s.controls);
  return c;
}

/// All p samples of the concatenated controls.
inline std::vector<double> emitted_p(const PipelineResult& r) {
  std::vector<double> p;
  for (std::size_t s = 0; s < r.stages.size(); ++s) {
    const auto& c = r.stages[s].controls;
    for (std::size_t k = s == 0 ? 0 : 1; k <= c.tgrid.m; ++k) p.push_back(c.p[k]);
  }
  return p;
}

struct AlphaLimitTable {
  double alpha_ref = 1e-3;
  std::vector<double> alphas;     // descending
  std::vector<double> distances;  // |y^alpha - y^ref|_{L-inf(L2)}
  bool strictly_decreasing = false;
  bool nonincreasing = true;
  std::optional<LineFit> rate;

  std::string csv() const {
    CsvWriter w({"alpha", "alpha_ref", "distance"});
    for (std::size_t j = 0; j < alphas.size(); ++j) w.row({alphas[j], alpha_ref, distances[j]});
    return w.str();
  }
};

/// Sup over frames of the L2 distance between two runs on the same grids.
inline double linf_l2_distance(const SpaceTimeField& a, const SpaceTimeField& b) {
  const auto d = difference(a, b);
  return trajectory_norm(d, SpaceNorm::l2, TimeNorm::sup);
}

/// Viscous runs with fixed data and controls for each alpha and for alpha_ref,
/// one task per alpha.
inline AlphaLimitTable alpha_limit_study(const Field& y0, const ControlTriple& controls, std::vector<double> alphas,
                                         double alpha_ref = 1e-3, const ViscousOptions& vopt = {}) {
  if (alphas.empty()) throw ConfigError("alpha list is empty");
  for (double a : alphas)
    if (!(a > 0.0)) throw ConfigError("alpha values must be positive");
  std::sort(alphas.begin(), alphas.end(), std::greater<>());
  AlphaLimitTable t;
  t.alpha_ref = alpha_ref;
  t.alphas = alphas;
  auto ref = std::async(std::launch::async, [&] { return simulate_viscous(y0, controls, alpha_ref, vopt).y; });
  std::vector<std::future<SpaceTimeField>> runs;
  for (double a : alphas)
    runs.push_back(std::async(std::launch::async, [&, a] { return simulate_viscous(y0, controls, a, vopt).y; }));
  const SpaceTimeField yref = ref.get();
  for (auto& f : runs) t.distances.push_back(linf_l2_distance(f.get(), yref));
  t.strictly_decreasing = t.distances.size() > 1;
  for (std::size_t j = 1; j < t.distances.size(); ++j) {
    if (!(t.distances[j] < t.distances[j - 1])) t.strictly_decreasing = false;
    if (t.distances[j] > t.distances[j - 1]) t.nonincreasing = false;
  }
  bool positive = t.distances.size() >= 2;
  for (double d : t.distances) positive = positive && d > 0.0;
  if (positive) t.rate = fit_loglog(t.alphas, t.distances);
  return t;
}

struct UniformityRun {
  double alpha = 0.0;
  double p_sup = 0.0;
  double v_sup = 0.0;
  double trace_c1 = 0.0;
  double terminal_error = 0.0;

  static UniformityRun from(double alpha, const ControlTriple& c, double terminal_error) {
    return {alpha, c.p_sup(), c.v_sup(), c.trace_c1(), terminal_error};
  }

  /// Norms over consecutive pieces (e.g. the stages of a pipeline run).
  static UniformityRun from(double alpha, const std::vector<ControlTriple>& pieces, double terminal_error) {
    UniformityRun r{alpha, 0.0, 0.0, 0.0, terminal_error};
    for (const auto& c : pieces) {
      r.p_sup = std::max(r.p_sup, c.p_sup());
      r.v_sup = std::max(r.v_sup, c.v_sup());
      r.trace_c1 = std::max(r.trace_c1, c.trace_c1());
    }
    return r;
  }
};

struct UniformityReport {
  std::vector<double> alphas;
  std::vector<double> p_sup;
  std::vector<double> v_sup;
  std::vector<double> trace_c1;
  std::vector<double> terminal;
  double p_spread = 1.0;
  double v_spread = 1.0;
  double trace_spread = 1.0;
  double terminal_spread = 1.0;
  double control_spread = 1.0;  // p_sup + v_sup
  bool flagged = false;          // some control spread above 3

  std::string csv() const {
    CsvWriter w({"alpha", "p_sup", "v_sup", "trace_c1", "terminal_error"});
    for (std::size_t j = 0; j < alphas.size(); ++j) w.row({alphas[j], p_sup[j], v_sup[j], trace_c1[j], terminal[j]});
    return w.str();
  }
};

inline UniformityReport uniformity_report(const std::vector<UniformityRun>& runs) {
  UniformityReport r;
  std::vector<double> total;
  for (const auto& u : runs) {
    r.alphas.push_back(u.alpha);
    r.p_sup.push_back(u.p_sup);
    r.v_sup.push_back(u.v_sup);
    r.trace_c1.push_back(u.trace_c1);
    r.terminal.push_back(u.terminal_error);
    total.push_back(u.p_sup + u.v_sup);
  }
  r.p_spread = spread(r.p_sup);
  r.v_spread = spread(r.v_sup);
  r.trace_spread = spread(r.trace_c1);
  r.terminal_spread = spread(r.terminal);
  r.control_spread = spread(total);
  r.flagged = r.p_spread > 3.0 || r.v_spread > 3.0 || r.trace_spread > 3.0;
  return r;
}

} // namespace burgers
