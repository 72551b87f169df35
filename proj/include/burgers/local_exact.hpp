#pragma once

// Local exact control of the viscous system to a trajectory of constants m(t):
// a fixed-point loop around the HUM solver on the extended interval.

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <tuple>
#include <vector>

#include "burgers/controls.hpp"
#include "burgers/errors.hpp"
#include "burgers/filter.hpp"
#include "burgers/grid.hpp"
#include "burgers/hum.hpp"

namespace burgers {

struct ConstantTrajectory {
  std::function<double(double)> value;
  std::function<double(double)> derivative;

  static ConstantTrajectory constant(double N) {
    return {[N](double) { return N; }, [](double) { return 0.0; }};
  }
};

struct LocalExactOptions {
  double eta = 0.25;
  double tol = 1e-9;
  int max_outer = 50;
  double epsilon = 1e-8;
  double epsilon_start = 1e-4;
  double cg_tol = 1e-12;
  std::optional<double> delta_hat_v;
};

struct LocalExactResult {
  Extension ext;
  SpaceTimeField y;  // m + u on [0, L]
  SpaceTimeField z;  // m + w
  SpaceTimeField u_ext;
  ControlTriple controls;  // p = m', v = m + h
  std::vector<double> h_l, h_r;
  std::vector<double> gaps;
  int outer_iterations = 0;
  int cg_iterations = 0;
  bool damped = false;
  bool smallness_warning = false;
  double data_h1 = 0.0;
  double terminal_sup = 0.0; // sup |y(T) - m(T)|
  HumResult last_hum;
};

/// w = filter(u on [0, L]) with the traces of u, extended to the whole interval.
inline SpaceTimeField filtered_extension(const SpaceTimeField& u_ext, const Extension& e, double alpha) {
  SpaceTimeField ws(u_ext.tgrid(), e.ext);
  std::vector<double> w(e.base.n);
  for (std::size_t k = 0; k < u_ext.frames(); ++k) {
    const auto base = restrict_to_base(u_ext.frame(k), e);
    filter_solve_into(base, e.base.dx, base.front(), base.back(), alpha, w);
    ws.set_frame(k, extend_even_c2(w, e));
  }
  return ws;
}

inline LocalExactResult local_exact_to_constant(const Field& y0, const ConstantTrajectory& mhat, double alpha,
                                                const TimeGrid& tg, const LocalExactOptions& opt = {}) {
  if (!(alpha >= 0.0)) throw ConfigError("alpha must be >= 0");
  const Grid1D& g = y0.grid();
  LocalExactResult res;
  res.ext = make_extension(g, opt.eta);
  const Extension& e = res.ext;
  std::vector<double> u0(g.n);
  for (std::size_t i = 0; i < g.n; ++i) u0[i] = y0[i] - mhat.value(tg.t0);
  res.data_h1 = norms(u0, g.dx).h1;
  if (opt.delta_hat_v && res.data_h1 > *opt.delta_hat_v) res.smallness_warning = true;
  auto u0s = extend_odd_c1(u0, e);
  apply_cutoff_inplace(u0s, make_cutoff(e));

  HumProblem hp;
  hp.grid = e.ext;
  hp.tgrid = tg;
  hp.a = g.x_right + 0.25 * e.eta;
  hp.b = g.x_right + 0.75 * e.eta;
  hp.u0 = u0s;
  hp.epsilon = opt.epsilon;
  hp.epsilon_start = opt.epsilon_start;
  hp.cg_tol = opt.cg_tol;

  SpaceTimeField ubar(tg, e.ext); // starting guess 0
  double relax = 1.0;
  for (int it = 1; it <= opt.max_outer; ++it) {
    SpaceTimeField adv = filtered_extension(ubar, e, alpha);
    for (std::size_t k = 0; k < adv.frames(); ++k) {
      const double mk = mhat.value(tg.t(k));
      for (double& x : adv.frame(k)) x += mk;
    }
    hp.advection = std::move(adv);
    res.last_hum = hum_null_control(hp);
    hp.warm_start = res.last_hum.v;
    res.cg_iterations += res.last_hum.iterations;
    const double gap = sup_gap(res.last_hum.u, ubar);
    res.gaps.push_back(gap);
    res.outer_iterations = it;
    if (gap <= opt.tol) {
      ubar = res.last_hum.u;
      break;
    }
    if (res.gaps.size() >= 2 && gap > res.gaps[res.gaps.size() - 2] && relax == 1.0) {
      relax = 0.5;
      res.damped = true;
    }
    if (!std::isfinite(gap) || gap > 1e6)
      throw ConvergenceError("local exact control loop diverged", res.gaps);
    auto& ub = ubar;
    const auto& un = res.last_hum.u;
    for (std::size_t k = 0; k < ub.frames(); ++k)
      for (std::size_t i = 0; i < e.ext.n; ++i) ub(k, i) += relax * (un(k, i) - ub(k, i));
    if (it == opt.max_outer) throw ConvergenceError("local exact control loop did not converge", res.gaps);
  }
  res.u_ext = ubar;

  res.y = SpaceTimeField(tg, g);
  res.z = SpaceTimeField(tg, g);
  res.controls = ControlTriple::zeros(tg);
  res.h_l.resize(tg.m + 1);
  res.h_r.resize(tg.m + 1);
  std::vector<double> w(g.n);
  for (std::size_t k = 0; k <= tg.m; ++k) {
    const double mk = mhat.value(tg.t(k));
    const auto base = restrict_to_base(res.u_ext.frame(k), e);
    filter_solve_into(base, g.dx, base.front(), base.back(), alpha, w);
    for (std::size_t i = 0; i < g.n; ++i) {
      res.y(k, i) = mk + base[i];
      res.z(k, i) = mk + w[i];
    }
    res.h_l[k] = base.front();
    res.h_r[k] = base.back();
    res.controls.p[k] = mhat.derivative(tg.t(k));
    res.controls.v_l[k] = mk + base.front();
    res.controls.v_r[k] = mk + base.back();
  }
  const double mT = mhat.value(tg.t1);
  for (std::size_t i = 0; i < g.n; ++i) res.terminal_sup = std::max(res.terminal_sup, std::abs(res.y(tg.m, i) - mT));
  return res;
}

struct ViscousCalibrationKey {
  double L, T, eta;
  std::size_t n, m;
  auto tie() const { return std::tie(L, T, eta, n, m); }
  bool operator<(const ViscousCalibrationKey& o) const { return tie() < o.tie(); }
};

/// Largest H1 size of u0 = amplitude * sin(pi x / L) for which the loop converges
/// for every alpha in the ladder. Cached per configuration.
inline double calibrate_delta_hat_v(const Grid1D& g, const TimeGrid& tg, double eta, double cap = 1.0,
                                    int steps = 6) {
  static std::mutex mu;
  static std::map<ViscousCalibrationKey, double> cache;
  const ViscousCalibrationKey key{g.length(), tg.t1 - tg.t0, eta, g.n, tg.m};
  {
    std::lock_guard lock(mu);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  const double L = g.length();
  const auto shape = Field::sample(g, [&](double x) { return std::sin(std::numbers::pi * (x - g.x_left) / L); });
  const double sn = norms(shape).h1;
  LocalExactOptions opt;
  opt.eta = eta;
  opt.tol = 1e-8;
  opt.max_outer = 50;
  auto ok = [&](double amp, double alpha) {
    std::vector<double> v = shape.values();
    for (double& x : v) x *= amp;
    try {
      local_exact_to_constant(Field(g, std::move(v)), ConstantTrajectory::constant(0.0), alpha, tg, opt);
      return true;
    } catch (const Error&) {
      return false;
    }
  };
  double a = cap / sn;
  for (double alpha : {0.0, 0.05, 0.5, 5.0}) {
    if (ok(a, alpha)) continue;
    double lo = 0.0, hi = a;
    for (int j = 0; j < steps; ++j) {
      const double mid = 0.5 * (lo + hi);
      if (ok(mid, alpha)) lo = mid;
      else hi = mid;
    }
    a = lo;
  }
  const double d = a * sn;
  std::lock_guard lock(mu);
  cache.emplace(key, d);
  return d;
}

} // namespace burgers
