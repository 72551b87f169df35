#pragma once

// Crank-Nicolson time stepping of y_t - y_xx + z y_x = p(t), z the filtered y,
// with Dirichlet boundary controls and runtime monitors.

#include <cmath>
#include <vector>

#include "burgers/controls.hpp"
#include "burgers/errors.hpp"
#include "burgers/filter.hpp"
#include "burgers/grid.hpp"

namespace burgers {

struct ViscousState {
  double t = 0.0;
  Field y;
  Field z;
  double alpha = 0.0;
};

struct StepOptions {
  double theta = 0.5;       // 0.5 Crank-Nicolson, 1 backward Euler
  int passes = 2;           // filter updates inside the step
  double residual_rel = 1e-8;
  int max_halvings = 5;
};

struct StepStats {
  double max_residual = 0.0;
  std::size_t rejected = 0;
  std::size_t unresolved = 0;
};

namespace detail {

/// Solves the theta-scheme for interior nodes given a frozen velocity zc.
inline void theta_solve(std::span<const double> y, std::span<const double> z_old,
                        std::span<const double> zc, double dx, double dt, double theta,
                        double p_mid, double vl1, double vr1, std::span<double> out) {
  const std::size_t n = y.size();
  const double r = 1.0 / (dx * dx), c = 1.0 / (2.0 * dx);
  const std::size_t m = n - 2;
  std::vector<double> a(m), b(m), cc(m), d(m), scratch;
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t i = j + 1;
    const double explicit_part = (1.0 - theta) * dt *
                                 ((y[i - 1] - 2.0 * y[i] + y[i + 1]) * r - z_old[i] * (y[i + 1] - y[i - 1]) * c);
    d[j] = y[i] + explicit_part + dt * p_mid;
    a[j] = -theta * dt * (r + zc[i] * c);
    b[j] = 1.0 + 2.0 * theta * dt * r;
    cc[j] = -theta * dt * (r - zc[i] * c);
  }
  d[0] -= a[0] * vl1;
  d[m - 1] -= cc[m - 1] * vr1;
  thomas_solve(a, b, cc, d, scratch);
  out[0] = vl1;
  out[n - 1] = vr1;
  for (std::size_t j = 0; j < m; ++j) out[j + 1] = d[j];
}

/// Max-norm defect of the theta-scheme, in units of y, with the given z's.
inline double theta_defect(std::span<const double> y0, std::span<const double> y1,
                           std::span<const double> z0, std::span<const double> z1, double dx,
                           double dt, double theta, double p_mid) {
  const double r = 1.0 / (dx * dx), c = 1.0 / (2.0 * dx);
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < y0.size(); ++i) {
    const double f1 = (y1[i - 1] - 2.0 * y1[i] + y1[i + 1]) * r - z1[i] * (y1[i + 1] - y1[i - 1]) * c;
    const double f0 = (y0[i - 1] - 2.0 * y0[i] + y0[i + 1]) * r - z0[i] * (y0[i + 1] - y0[i - 1]) * c;
    const double res = y1[i] - y0[i] - dt * (theta * f1 + (1.0 - theta) * f0 + p_mid);
    worst = std::max(worst, std::abs(res));
  }
  return worst;
}

} // namespace detail

/// One step from state.t to state.t + dt with controls evaluated at both ends.
/// `z_pred` is the predicted filter at the new level (empty: use the current z).
/// Returns the step defect; the step is never rejected here.
inline double theta_step(ViscousState& s, const ControlTriple& c, double dt, const StepOptions& opt,
                         std::span<const double> z_pred = {}) {
  const Grid1D& g = s.y.grid();
  const double t1 = s.t + dt;
  const double vl1 = c.v_l_at(t1), vr1 = c.v_r_at(t1);
  const double p_mid = c.p_integral(s.t, t1) / dt;
  std::vector<double> zc = z_pred.empty() ? s.z.values() : std::vector<double>(z_pred.begin(), z_pred.end());
  std::vector<double> y1(g.n), z1(g.n);
  for (int pass = 0; pass < opt.passes; ++pass) {
    detail::theta_solve(s.y.view(), s.z.view(), zc, g.dx, dt, opt.theta, p_mid, vl1, vr1, y1);
    filter_solve_into(y1, g.dx, vl1, vr1, s.alpha, z1);
    zc = z1;
  }
  const double defect = detail::theta_defect(s.y.view(), y1, s.z.view(), z1, g.dx, dt, opt.theta, p_mid);
  for (double v : y1)
    if (!std::isfinite(v)) throw SolverError("viscous step produced a non-finite value");
  s.y.values() = std::move(y1);
  s.z.values() = std::move(z1);
  s.t = t1;
  return defect;
}

/// Crank-Nicolson step with rejection: a step whose defect exceeds
/// residual_rel * max(|y|) is split in two halves, recursively.
inline ViscousState step_viscous(const ViscousState& s, const ControlTriple& c, double dt,
                                 const StepOptions& opt, StepStats& stats, int depth = 0,
                                 std::span<const double> z_pred = {}) {
  ViscousState trial = s;
  const double defect = theta_step(trial, c, dt, opt, z_pred);
  const double scale = std::max(sup_abs(trial.y.view()), sup_abs(s.y.view()));
  const double tol = opt.residual_rel * scale + 1e-14;
  if (defect <= tol) {
    stats.max_residual = std::max(stats.max_residual, defect);
    return trial;
  }
  if (depth >= opt.max_halvings) {
    ++stats.unresolved;
    stats.max_residual = std::max(stats.max_residual, defect);
    return trial;
  }
  ++stats.rejected;
  ViscousState half = step_viscous(s, c, 0.5 * dt, opt, stats, depth + 1);
  return step_viscous(half, c, 0.5 * dt, opt, stats, depth + 1);
}

struct ViscousOptions {
  StepOptions step;
  bool rannacher = true;      // first step as four backward-Euler quarter steps
  double monitor_tol = 1e-8;
  bool energy_monitor = true;
};

struct ViscousRun {
  SpaceTimeField y;
  SpaceTimeField z;
  double M_T = 0.0;
  double max_sup = 0.0;
  bool max_principle_ok = true;
  double max_filter_residual = 0.0;
  bool energy_checked = false;
  bool energy_ok = true;
  double max_energy_ratio = 0.0;
  StepStats stats;
};

/// M_T = |y0| + |v_l| + |v_r| + T |p|, all sup norms.
inline double max_principle_bound(const Field& y0, const ControlTriple& c) {
  const double T = c.tgrid.t1 - c.tgrid.t0;
  return sup_abs(y0.view()) + sup_abs(c.v_l) + sup_abs(c.v_r) + T * sup_abs(c.p);
}

inline ViscousRun simulate_viscous(const Field& y0, const ControlTriple& c, double alpha,
                                   const ViscousOptions& opt = {}) {
  c.validate();
  if (!(alpha >= 0.0)) throw ConfigError("alpha must be >= 0");
  const Grid1D& g = y0.grid();
  const TimeGrid& tg = c.tgrid;
  ViscousRun run;
  run.y = SpaceTimeField(tg, g);
  run.z = SpaceTimeField(tg, g);
  run.M_T = max_principle_bound(y0, c);

  ViscousState s{tg.t0, y0, solve_filter(y0, c.v_l[0], c.v_r[0], alpha), alpha};
  s.y[0] = c.v_l[0];
  s.y[g.n - 1] = c.v_r[0];
  run.y.set_frame(0, s.y);
  run.z.set_frame(0, s.z);

  const bool homogeneous = sup_abs(c.v_l) == 0.0 && sup_abs(c.v_r) == 0.0;
  run.energy_checked = opt.energy_monitor && homogeneous;
  const double sqrtL = std::sqrt(g.length());
  const double e0 = l2_trapz(s.y.view(), g.dx);
  double int_zx = 0.0, int_p = 0.0, dissipation = 0.0;

  std::vector<double> z_prev;
  double dt_prev = 0.0;
  for (std::size_t k = 0; k < tg.m; ++k) {
    const double dt = tg.dt;
    const ViscousState before = s;
    if (k == 0 && opt.rannacher) {
      StepOptions be = opt.step;
      be.theta = 1.0;
      for (int q = 0; q < 4; ++q) s = step_viscous(s, c, 0.25 * dt, be, run.stats);
    } else {
      std::vector<double> pred;
      if (!z_prev.empty()) {
        pred.resize(g.n);
        const double w = dt / dt_prev;
        for (std::size_t i = 0; i < g.n; ++i) pred[i] = s.z[i] + w * (s.z[i] - z_prev[i]);
      }
      s = step_viscous(s, c, dt, opt.step, run.stats, 0, pred);
    }
    s.t = tg.t(k + 1);
    z_prev = before.z.values();
    dt_prev = dt;
    run.y.set_frame(k + 1, s.y);
    run.z.set_frame(k + 1, s.z);

    run.max_filter_residual =
        std::max(run.max_filter_residual, filter_residual(s.y.view(), s.z.view(), g.dx, alpha) /
                                              std::max(1.0, sup_abs(s.y.view())));
    const double sup = sup_abs(s.y.view());
    run.max_sup = std::max(run.max_sup, sup);
    if (sup > run.M_T + opt.monitor_tol) run.max_principle_ok = false;

    if (run.energy_checked) {
      const auto zx = diff1(s.z.view(), g.dx);
      // dissipation weighted like the scheme: theta blend, end value for the backward-Euler start
      const double th = (k == 0 && opt.rannacher) ? 1.0 : opt.step.theta;
      std::vector<double> yb(g.n);
      for (std::size_t i = 0; i < g.n; ++i) yb[i] = th * s.y[i] + (1.0 - th) * before.y[i];
      const double a = l2_trapz(diff1(yb, g.dx), g.dx);
      int_zx += dt * sup_abs(zx);
      int_p += dt * std::abs(c.p_integral(before.t, s.t) / dt) * sqrtL;
      dissipation += 2.0 * dt * a * a;
      const double e = l2_trapz(s.y.view(), g.dx);
      const double lhs = e * e + dissipation;
      const double rhs = std::exp(int_zx) * (e0 + int_p) * (e0 + int_p);
      if (rhs > 0.0) run.max_energy_ratio = std::max(run.max_energy_ratio, lhs / rhs);
      if (lhs > rhs * (1.0 + 1e-2) + 1e-14) run.energy_ok = false;
    }
  }
  return run;
}

} // namespace burgers
