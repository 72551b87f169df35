#pragma once

// Forward semi-Lagrangian solvers for the inviscid system, used to replay
// emitted controls independently of the construction that produced them.

#include <cmath>
#include <functional>
#include <vector>

#include "burgers/controls.hpp"
#include "burgers/errors.hpp"
#include "burgers/filter.hpp"
#include "burgers/grid.hpp"

namespace burgers {

/// y_t + v(t,x) y_x = g(t,x) on the grid of y0 with inflow values b_l(t), b_r(t).
/// The velocity and source are callables; characteristics are traced back
/// with the midpoint rule and y is interpolated cubically.
struct LinearTransportProblem {
  std::function<double(double, double)> velocity;
  std::function<double(double, double)> source;
  std::function<double(double)> inflow_left;
  std::function<double(double)> inflow_right;
};

namespace detail {

/// Backtracks one step from (t1, x); returns the foot and, if the path left
/// [xl, xr], the exit side (-1 / +1) and the fraction of the step spent inside.
struct Foot {
  double x;
  int side;
  double inside_fraction;
};

inline Foot backtrack(const std::function<double(double, double)>& v, double t0, double t1, double x,
                      double xl, double xr) {
  const double h = t1 - t0;
  const double xm = x - 0.5 * h * v(t1, x);
  const double xf = x - h * v(0.5 * (t0 + t1), xm);
  if (xf < xl || xf > xr) {
    const double edge = xf < xl ? xl : xr;
    const double frac = std::abs(x - xf) > 0.0 ? std::abs(x - edge) / std::abs(x - xf) : 1.0;
    return {edge, xf < xl ? -1 : 1, std::clamp(frac, 0.0, 1.0)};
  }
  return {xf, 0, 1.0};
}

} // namespace detail

inline SpaceTimeField solve_linear_transport(const Field& y0, const LinearTransportProblem& pb,
                                             const TimeGrid& tg) {
  const Grid1D& g = y0.grid();
  SpaceTimeField y(tg, g);
  y.set_frame(0, y0);
  for (std::size_t k = 0; k < tg.m; ++k) {
    const double t0 = tg.t(k), t1 = tg.t(k + 1);
    auto prev = y.frame(k);
    auto next = y.frame(k + 1);
    for (std::size_t i = 0; i < g.n; ++i) {
      const double x = g.x(i);
      const auto f = detail::backtrack(pb.velocity, t0, t1, x, g.x_left, g.x_right);
      if (f.side == 0) {
        const double src = 0.5 * (t1 - t0) * (pb.source(t0, f.x) + pb.source(t1, x));
        next[i] = interp_cubic(prev, g, f.x) + src;
      } else {
        const double tc = t1 - f.inside_fraction * (t1 - t0);
        const double b = f.side < 0 ? pb.inflow_left(tc) : pb.inflow_right(tc);
        next[i] = b + 0.5 * (t1 - tc) * (pb.source(tc, f.x) + pb.source(t1, x));
      }
    }
  }
  return y;
}

/// Replays y_t + z y_x = p(t), z - alpha^2 z_xx = y, z = y = v_l / v_r on the
/// boundary, from y0 under the given controls. z at the new time level is
/// obtained by a predictor and one corrector pass.
inline SpaceTimeField replay_inviscid(const Field& y0, const ControlTriple& c, double alpha) {
  c.validate();
  const Grid1D& g = y0.grid();
  const TimeGrid& tg = c.tgrid;
  SpaceTimeField y(tg, g);
  y.set_frame(0, y0);
  y(0, 0) = c.v_l[0];
  y(0, g.n - 1) = c.v_r[0];
  std::vector<double> z0(g.n), z1(g.n), zprev(g.n), ynew(g.n);
  filter_solve_into(y.frame(0), g.dx, c.v_l[0], c.v_r[0], alpha, z0);
  zprev = z0;
  for (std::size_t k = 0; k < tg.m; ++k) {
    const double t0 = tg.t(k), t1 = tg.t(k + 1);
    auto prev = y.frame(k);
    // predictor: linear extrapolation of z in time
    for (std::size_t i = 0; i < g.n; ++i) z1[i] = k == 0 ? z0[i] : 2.0 * z0[i] - zprev[i];
    for (int pass = 0; pass < 2; ++pass) {
      auto vel = [&](double t, double x) {
        const double w = (t - t0) / (t1 - t0);
        return (1.0 - w) * interp_cubic(z0, g, x) + w * interp_cubic(z1, g, x);
      };
      for (std::size_t i = 1; i + 1 < g.n; ++i) {
        const double x = g.x(i);
        const auto f = detail::backtrack(vel, t0, t1, x, g.x_left, g.x_right);
        if (f.side == 0) {
          ynew[i] = interp_cubic(prev, g, f.x) + c.p_integral(t0, t1);
        } else {
          const double tc = t1 - f.inside_fraction * (t1 - t0);
          const double b = f.side < 0 ? c.v_l_at(tc) : c.v_r_at(tc);
          ynew[i] = b + c.p_integral(tc, t1);
        }
      }
      ynew[0] = c.v_l[k + 1];
      ynew[g.n - 1] = c.v_r[k + 1];
      filter_solve_into(ynew, g.dx, c.v_l[k + 1], c.v_r[k + 1], alpha, z1);
    }
    for (double v : ynew)
      if (!std::isfinite(v)) throw SolverError("inviscid replay produced a non-finite value");
    y.set_frame(k + 1, ynew);
    zprev = z0;
    z0 = z1;
  }
  return y;
}

} // namespace burgers
