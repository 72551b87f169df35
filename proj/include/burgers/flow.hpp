#pragma once

// Characteristic flows of x' = lambda(t) + z*(t, x).

#include <cmath>
#include <vector>

#include "burgers/errors.hpp"
#include "burgers/grid.hpp"
#include "burgers/lambda.hpp"

namespace burgers {

/// lambda(t) plus a bilinear interpolant of z* (zero off its grid, or absent).
class Velocity {
public:
  Velocity(const LambdaProfile& lambda, const SpaceTimeField* zstar) : lambda_(lambda), z_(zstar) {}

  double operator()(double t, double x) const { return lambda_.value(t) + perturbation(t, x); }

  double perturbation(double t, double x) const {
    if (z_ == nullptr) return 0.0;
    const Grid1D& g = z_->grid();
    const TimeGrid& tg = z_->tgrid();
    const double sx = (x - g.x_left) / g.dx;
    if (sx < 0.0 || sx > static_cast<double>(g.n - 1)) return 0.0;
    auto i = static_cast<std::size_t>(sx);
    if (i >= g.n - 1) i = g.n - 2;
    const double wx = sx - static_cast<double>(i);
    double st = (t - tg.t0) / tg.dt;
    st = std::clamp(st, 0.0, static_cast<double>(tg.m));
    auto k = static_cast<std::size_t>(st);
    if (k >= tg.m) k = tg.m - 1;
    const double wt = st - static_cast<double>(k);
    const double* a = z_->frame(k).data();
    const double* b = z_->frame(k + 1).data();
    const double za = (1.0 - wx) * a[i] + wx * a[i + 1];
    const double zb = (1.0 - wx) * b[i] + wx * b[i + 1];
    return (1.0 - wt) * za + wt * zb;
  }

  const LambdaProfile& lambda() const { return lambda_; }

private:
  const LambdaProfile& lambda_;
  const SpaceTimeField* z_;
};

/// One classical RK4 step of size h (negative h integrates backward).
inline double rk4_step(const Velocity& v, double t, double x, double h) {
  const double k1 = v(t, x);
  const double k2 = v(t + 0.5 * h, x + 0.5 * h * k1);
  const double k3 = v(t + 0.5 * h, x + 0.5 * h * k2);
  const double k4 = v(t + h, x + h * k3);
  return x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Position at time t of the characteristic through x at time s, using
/// `steps` equal RK4 steps. Throws when one step would move farther than
/// `max_disp` (pass a non-positive value to disable the guard).
inline double integrate_characteristic(const Velocity& v, double s, double t, double x,
                                       std::size_t steps, double max_disp) {
  if (steps == 0) steps = 1;
  const double h = (t - s) / static_cast<double>(steps);
  double xc = x;
  for (std::size_t j = 0; j < steps; ++j) {
    const double tj = s + static_cast<double>(j) * h;
    const double xn = rk4_step(v, tj, xc, h);
    if (max_disp > 0.0 && std::abs(xn - xc) > max_disp)
      throw SolverError("characteristic step displacement exceeds eta; refine the time grid");
    xc = xn;
  }
  return xc;
}

/// Arrival positions Phi(s; t_j, x_i) for a set of query times and starting points.
struct FlowMap {
  double s = 0.0;
  std::vector<double> times;
  std::vector<double> xs;
  std::vector<std::vector<double>> arrival; // [time index][point index]

  /// Strictly increasing arrival positions for every query time.
  bool monotone() const {
    for (const auto& row : arrival)
      for (std::size_t i = 1; i < row.size(); ++i)
        if (!(row[i] > row[i - 1])) return false;
    return true;
  }
};

/// RK4 with step at most dt_flow; the step count per query is ceil(|t - s| / dt_flow).
inline FlowMap integrate_flow(const LambdaProfile& lambda, const SpaceTimeField* zstar, double s,
                              const std::vector<double>& targets, const std::vector<double>& xs,
                              double dt_flow, double max_disp = -1.0) {
  if (!(dt_flow > 0.0)) throw ConfigError("flow step must be positive");
  Velocity v(lambda, zstar);
  FlowMap f;
  f.s = s;
  f.times = targets;
  f.xs = xs;
  f.arrival.resize(targets.size());
  for (std::size_t j = 0; j < targets.size(); ++j) {
    const auto steps = static_cast<std::size_t>(std::ceil(std::abs(targets[j] - s) / dt_flow - 1e-9));
    f.arrival[j].resize(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i)
      f.arrival[j][i] = integrate_characteristic(v, s, targets[j], xs[i], steps, max_disp);
  }
  return f;
}

/// Largest |Phi(t; s, Phi(s; t, x)) - x| over the given points.
inline double flow_group_defect(const LambdaProfile& lambda, const SpaceTimeField* zstar, double s,
                                double t, const std::vector<double>& xs, double dt_flow) {
  Velocity v(lambda, zstar);
  const auto steps = static_cast<std::size_t>(std::ceil(std::abs(t - s) / dt_flow - 1e-9));
  double worst = 0.0;
  for (double x : xs) {
    const double y = integrate_characteristic(v, s, t, x, steps, -1.0);
    const double back = integrate_characteristic(v, t, s, y, steps, -1.0);
    worst = std::max(worst, std::abs(back - x));
  }
  return worst;
}

/// Departure points D_k(x_i) = Phi(t_k; 0, x_i) on every node of `zstar`'s grid,
/// built one time step at a time. Left of the grid z* vanishes, so the
/// departure point is x minus the lambda mass.
inline SpaceTimeField departure_maps(const LambdaProfile& lambda, const SpaceTimeField& zstar,
                                     std::size_t substeps, double max_disp) {
  const Grid1D& g = zstar.grid();
  const TimeGrid& tg = zstar.tgrid();
  SpaceTimeField D(tg, g);
  for (std::size_t i = 0; i < g.n; ++i) D(0, i) = g.x(i);
  const double x_hi = g.x_right;
  if (substeps == 0) substeps = 1;
  // Within one time step the velocity is lambda(t) plus a linear blend of two
  // frames, so lambda and the blend weight are tabulated per RK stage time.
  const std::size_t ns = 2 * substeps + 1;
  std::vector<double> lam(ns), wt(ns);
  const double inv_dx = 1.0 / g.dx;
  const double smax = static_cast<double>(g.n - 1);
  for (std::size_t k = 0; k < tg.m; ++k) {
    const double t0 = tg.t(k), t1 = tg.t(k + 1);
    const double h = (t0 - t1) / static_cast<double>(substeps);
    for (std::size_t j = 0; j < ns; ++j) {
      const double t = t1 + 0.5 * h * static_cast<double>(j);
      lam[j] = lambda.value(t);
      wt[j] = std::clamp((t - t0) / (t1 - t0), 0.0, 1.0);
    }
    const double* za = zstar.frame(k).data();
    const double* zb = zstar.frame(k + 1).data();
    auto vel = [&](std::size_t j, double x) {
      const double sx = (x - g.x_left) * inv_dx;
      if (!(sx >= 0.0 && sx <= smax)) return lam[j];
      auto i = static_cast<std::size_t>(sx);
      if (i >= g.n - 1) i = g.n - 2;
      const double w = sx - static_cast<double>(i);
      const double a = za[i] + w * (za[i + 1] - za[i]);
      const double b = zb[i] + w * (zb[i + 1] - zb[i]);
      return lam[j] + a + wt[j] * (b - a);
    };
    const double shift = lambda.primitive(t0) - lambda.primitive(tg.t0);
    auto prev = D.frame(k);
    auto next = D.frame(k + 1);
    for (std::size_t i = 0; i < g.n; ++i) {
      double xi = g.x(i);
      for (std::size_t s = 0; s < substeps; ++s) {
        const std::size_t j = 2 * s;
        const double k1 = vel(j, xi);
        const double k2 = vel(j + 1, xi + 0.5 * h * k1);
        const double k3 = vel(j + 1, xi + 0.5 * h * k2);
        const double k4 = vel(j + 2, xi + h * k3);
        const double xn = xi + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (max_disp > 0.0 && std::abs(xn - xi) > max_disp)
          throw SolverError("characteristic step displacement exceeds eta; refine the time grid");
        xi = xn;
      }
      if (xi < g.x_left) {
        next[i] = xi - shift;
      } else {
        next[i] = interp_cubic(prev, g, std::min(xi, x_hi));
      }
    }
  }
  return D;
}

} // namespace burgers
