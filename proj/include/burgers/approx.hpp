#pragma once

// Approximate control on a short window [0, tau]: an inviscid bridge between
// two profiles plus the parabolic remainder that accounts for viscosity.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "burgers/controls.hpp"
#include "burgers/errors.hpp"
#include "burgers/filter.hpp"
#include "burgers/grid.hpp"
#include "burgers/lambda.hpp"
#include "burgers/null_control.hpp"

namespace burgers {

struct BridgeOptions {
  double eta = 0.25;
  double margin = 0.1;
  std::optional<double> delta_hat2; // skip calibration
  NullControlOptions picard;
};

struct BridgeResult {
  double tau = 0.0;
  double tau0 = 0.0;
  double delta_hat2 = 0.0;
  double M = 0.0;
  TimeGrid tgrid;           // [0, tau]
  SpaceTimeField u;
  SpaceTimeField w;
  LambdaProfile lambda_tau; // lambda(t / tau) / tau
  int iterations_forward = 0;
  int iterations_backward = 0;
};

/// Unit-horizon step count: Courant number one for the peak of the unit profile.
inline std::size_t bridge_steps(const Grid1D& g, const LambdaProfile& unit) {
  auto m = static_cast<std::size_t>(std::ceil(unit.peak() / g.dx));
  m = std::max<std::size_t>(m, 8);
  return m + (m % 2);
}

inline double bridge_threshold(const Grid1D& g, const BridgeOptions& opt) {
  if (opt.delta_hat2) return *opt.delta_hat2;
  const LambdaProfile unit = make_lambda(g.length(), 1.0, opt.eta, opt.margin, true);
  const std::size_t m = bridge_steps(g, unit);
  const TimeGrid half = make_time_grid(0.0, 0.5, m / 2);
  return calibrate_delta_hat(g, unit, opt.eta, half, Regularity::c2).delta_hat;
}

/// u(0) = u0, u(tau) = uf; u_t + (lambda_tau + w) u_x = 0 with w the filtered u.
inline BridgeResult inviscid_bridge(const Field& u0, const Field& uf, double alpha, double tau,
                                    const BridgeOptions& opt = {}) {
  if (!(u0.grid() == uf.grid())) throw ConfigError("bridge endpoints must share a grid");
  if (!(tau > 0.0)) throw ConfigError("tau must be positive");
  const Grid1D& g = u0.grid();
  const double L = g.length();
  const LambdaProfile unit = make_lambda(L, 1.0, opt.eta, opt.margin, true);
  const std::size_t m = bridge_steps(g, unit);
  const TimeGrid half = make_time_grid(0.0, 0.5, m / 2);

  BridgeResult b;
  b.tau = tau;
  b.delta_hat2 = bridge_threshold(g, opt);
  b.M = std::max(norms(u0).c2, norms(uf).c2);
  b.tau0 = b.M > 0.0 ? b.delta_hat2 / b.M : std::numeric_limits<double>::infinity();
  if (tau > b.tau0 * (1.0 + 1e-12))
    throw ConfigError("tau = " + fmt_double(tau) + " exceeds the calibrated tau0 = " + fmt_double(b.tau0));
  b.tgrid = make_time_grid(0.0, tau, m);
  b.lambda_tau = make_lambda(L, tau, opt.eta, opt.margin, true);

  NullControlOptions popt = opt.picard;
  popt.regularity = Regularity::c2;
  popt.delta_hat = b.delta_hat2;
  auto scaled = [&](const Field& f, bool reflect) {
    std::vector<double> v(g.n);
    for (std::size_t i = 0; i < g.n; ++i) v[i] = tau * f[reflect ? g.n - 1 - i : i];
    return Field(g, std::move(v));
  };
  const auto fwd = picard_null_control(scaled(u0, false), unit, alpha, opt.eta, half, popt);
  const auto bwd = picard_null_control(scaled(uf, true), unit, alpha, opt.eta, half, popt);
  b.iterations_forward = fwd.iterations;
  b.iterations_backward = bwd.iterations;

  b.u = SpaceTimeField(b.tgrid, g);
  b.w = SpaceTimeField(b.tgrid, g);
  const std::size_t mh = m / 2;
  for (std::size_t j = 0; j <= m; ++j) {
    for (std::size_t i = 0; i < g.n; ++i) {
      if (j <= mh) {
        b.u(j, i) = fwd.y(j, i) / tau;
        b.w(j, i) = fwd.z(j, i) / tau;
      } else {
        b.u(j, i) = bwd.y(m - j, g.n - 1 - i) / tau;
        b.w(j, i) = bwd.z(m - j, g.n - 1 - i) / tau;
      }
    }
  }
  return b;
}

struct RemainderState {
  SpaceTimeField r;
  SpaceTimeField q;
  double neumann_residual = 0.0; // largest one-sided |r_x(L)|
  double coupling_residual = 0.0; // largest |q(L) - r(L)|
};

namespace detail {

/// Values of a trajectory at time t by linear interpolation between frames.
inline std::vector<double> frame_at(const SpaceTimeField& F, double t) {
  const TimeGrid& tg = F.tgrid();
  double s = std::clamp((t - tg.t0) / tg.dt, 0.0, static_cast<double>(tg.m));
  auto k = static_cast<std::size_t>(s);
  if (k >= tg.m) k = tg.m - 1;
  const double w = s - static_cast<double>(k);
  std::vector<double> v(F.grid().n);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = (1.0 - w) * F(k, i) + w * F(k + 1, i);
  return v;
}

/// Explicit operator A(r) = -V r_x + r_xx - q u_x + u_xx with the ghost node
/// r_n = r_{n-2} at the right end. Entry 0 is unused.
inline std::vector<double> remainder_rhs(std::span<const double> r, std::span<const double> q,
                                         std::span<const double> V, std::span<const double> u,
                                         double dx) {
  const std::size_t n = r.size();
  const auto ux = diff1(u, dx);
  const auto uxx = diff2(u, dx);
  std::vector<double> a(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    const double rr = i + 1 < n ? r[i + 1] : r[i - 1];
    const double rx = (rr - r[i - 1]) / (2.0 * dx);
    const double rxx = (r[i - 1] - 2.0 * r[i] + rr) / (dx * dx);
    a[i] = -V[i] * rx + rxx - q[i] * ux[i] + uxx[i];
  }
  return a;
}

} // namespace detail

/// r_t + (q + w + lambda_tau) r_x - r_xx + q u_x - u_xx = 0 on [0, tau],
/// r(0) = 0, r(., 0) = 0, r_x(., L) = 0, q the filter of r with q(0) = 0, q(L) = r(L).
/// Crank-Nicolson after four backward-Euler quarter steps; q is lagged and
/// corrected once per step.
inline RemainderState solve_remainder(const BridgeResult& b, double alpha) {
  const Grid1D& g = b.u.grid();
  const TimeGrid& tg = b.tgrid;
  const std::size_t n = g.n;
  const double dx = g.dx;
  RemainderState st;
  st.r = SpaceTimeField(tg, g);
  st.q = SpaceTimeField(tg, g);

  std::vector<double> r(n, 0.0), q(n, 0.0), scratch;
  auto velocity = [&](double t, std::span<const double> qv) {
    auto w = detail::frame_at(b.w, t);
    const double l = b.lambda_tau.value(t);
    for (std::size_t i = 0; i < n; ++i) w[i] += qv[i] + l;
    return w;
  };

  auto step = [&](double t0, double t1, double theta) {
    const double dt = t1 - t0;
    const auto u0 = detail::frame_at(b.u, t0);
    const auto u1 = detail::frame_at(b.u, t1);
    const auto V0 = velocity(t0, q);
    const auto A0 = detail::remainder_rhs(r, q, V0, u0, dx);
    const auto ux1 = diff1(u1, dx);
    const auto uxx1 = diff2(u1, dx);
    std::vector<double> qn = q, rn(n);
    for (int pass = 0; pass < 2; ++pass) {
      const auto V1 = velocity(t1, qn);
      const std::size_t m = n - 1; // unknowns r_1 .. r_{n-1}
      std::vector<double> a(m), bd(m), c(m), d(m);
      for (std::size_t j = 0; j < m; ++j) {
        const std::size_t i = j + 1;
        const double kd = theta * dt / (dx * dx), ka = theta * dt * V1[i] / (2.0 * dx);
        a[j] = -kd - ka;
        bd[j] = 1.0 + 2.0 * kd;
        c[j] = -kd + ka;
        if (i == n - 1) { // ghost node folds into the left neighbour
          a[j] = -2.0 * kd;
          c[j] = 0.0;
        }
        d[j] = r[i] + (1.0 - theta) * dt * A0[i] + theta * dt * (-qn[i] * ux1[i] + uxx1[i]);
      }
      thomas_solve(a, bd, c, d, scratch);
      rn[0] = 0.0;
      for (std::size_t j = 0; j < m; ++j) rn[j + 1] = d[j];
      filter_solve_into(rn, dx, 0.0, rn[n - 1], alpha, qn);
    }
    for (double v : rn)
      if (!std::isfinite(v)) throw SolverError("remainder solve produced a non-finite value");
    r = rn;
    q = qn;
  };

  st.r.set_frame(0, r);
  st.q.set_frame(0, q);
  for (std::size_t k = 0; k < tg.m; ++k) {
    const double t0 = tg.t(k), t1 = tg.t(k + 1);
    if (k == 0) {
      for (int s = 0; s < 4; ++s) step(t0 + 0.25 * s * tg.dt, t0 + 0.25 * (s + 1) * tg.dt, 1.0);
    } else {
      step(t0, t1, 0.5);
    }
    st.r.set_frame(k + 1, r);
    st.q.set_frame(k + 1, q);
    st.neumann_residual = std::max(st.neumann_residual, std::abs(diff1(r, dx)[n - 1]));
    st.coupling_residual = std::max(st.coupling_residual, std::abs(q[n - 1] - r[n - 1]));
  }
  return st;
}

struct ApproxResult {
  BridgeResult bridge;
  RemainderState remainder;
  SpaceTimeField y;
  SpaceTimeField z;
  ControlTriple controls;
  double terminal_h1 = 0.0; // |y(tau) - y_f|_{H1}
  double remainder_h1 = 0.0;
};

/// y = u + r + lambda_tau, z = w + q + lambda_tau, p = lambda_tau',
/// v_l = u(., 0) + lambda_tau, v_r = u(., L) + r(., L) + lambda_tau.
inline ApproxResult approx_control_stage(const Field& y0, const Field& yf, double alpha, double tau,
                                         const BridgeOptions& opt = {}) {
  ApproxResult a;
  a.bridge = inviscid_bridge(y0, yf, alpha, tau, opt);
  a.remainder = solve_remainder(a.bridge, alpha);
  const TimeGrid& tg = a.bridge.tgrid;
  const Grid1D& g = y0.grid();
  const std::size_t n = g.n;
  a.y = SpaceTimeField(tg, g);
  a.z = SpaceTimeField(tg, g);
  a.controls = ControlTriple::zeros(tg);
  for (std::size_t k = 0; k <= tg.m; ++k) {
    const double t = tg.t(k);
    const double l = a.bridge.lambda_tau.value(t);
    for (std::size_t i = 0; i < n; ++i) {
      a.y(k, i) = a.bridge.u(k, i) + a.remainder.r(k, i) + l;
      a.z(k, i) = a.bridge.w(k, i) + a.remainder.q(k, i) + l;
    }
    a.controls.p[k] = a.bridge.lambda_tau.derivative(t);
    a.controls.v_l[k] = a.bridge.u(k, 0) + l;
    a.controls.v_r[k] = a.bridge.u(k, n - 1) + a.remainder.r(k, n - 1) + l;
  }
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a.y(tg.m, i) - yf[i];
  a.terminal_h1 = norms(d, g.dx).h1;
  a.remainder_h1 = norms(a.remainder.r.frame(tg.m), g.dx).h1;
  return a;
}

} // namespace burgers
