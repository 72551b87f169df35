#pragma once

#include <cmath>
#include <vector>

#include "burgers/controls.hpp"
#include "burgers/errors.hpp"
#include "burgers/grid.hpp"
#include "burgers/viscous.hpp"

namespace burgers {

struct SmoothingReport {
  double alpha = 0.0;
  double t1 = 0.0;
  double t2 = 0.0;
  double T_star = 0.0;
  double c2_at_Tstar = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  std::vector<double> times;
  std::vector<double> h1_history;
  std::vector<double> h2_history;
  std::vector<double> h3_history;
};

/// sqrt(h2^2 + |third difference|_2^2), the H^3 surrogate.
inline double h3_surrogate(std::span<const double> f, double dx) {
  const auto r = norms(f, dx);
  const auto d3 = diff1(diff2(f, dx), dx);
  const double s3 = l2_trapz(d3, dx);
  return std::sqrt(r.h2 * r.h2 + s3 * s3);
}

inline double h4_surrogate(std::span<const double> f, double dx) {
  const auto d2 = diff2(f, dx);
  const auto d4 = diff2(d2, dx);
  const double s4 = l2_trapz(d4, dx);
  const double h3 = h3_surrogate(f, dx);
  return std::sqrt(h3 * h3 + s4 * s4);
}

/// Runs the free system on tg (homogeneous boundary values, p = 0) and
/// locates the smoothing times by "first frame below the running mean".
inline SmoothingReport smoothing_monitor(const Field& y0, double alpha, const TimeGrid& tg,
                                         const ViscousOptions& vopt = {}) {
  const double T = tg.t1 - tg.t0;
  const auto run = simulate_viscous(y0, ControlTriple::zeros(tg), alpha, vopt);
  const Grid1D& g = y0.grid();
  SmoothingReport rep;
  rep.alpha = alpha;
  const std::size_t F = run.y.frames();
  rep.times.resize(F);
  rep.h1_history.resize(F);
  rep.h2_history.resize(F);
  rep.h3_history.resize(F);
  std::vector<double> c2(F);
  for (std::size_t k = 0; k < F; ++k) {
    const auto f = run.y.frame(k);
    const auto r = norms(f, g.dx);
    rep.times[k] = tg.t(k);
    rep.h1_history[k] = r.h1;
    rep.h2_history[k] = r.h2;
    rep.h3_history[k] = h3_surrogate(f, g.dx);
    c2[k] = r.c2;
  }
  const double half = tg.t0 + 0.5 * T;
  auto mean_over = [&](const std::vector<double>& h, double a, double b) {
    double s = 0.0;
    std::size_t cnt = 0;
    for (std::size_t k = 0; k < F; ++k)
      if (rep.times[k] > a && rep.times[k] < b) {
        s += h[k];
        ++cnt;
      }
    return cnt ? s / static_cast<double>(cnt) : 0.0;
  };
  const double m2 = mean_over(rep.h2_history, tg.t0, half);
  std::size_t k1 = 0;
  for (std::size_t k = 1; k < F && rep.times[k] < half; ++k)
    if (rep.h2_history[k] <= m2) {
      k1 = k;
      break;
    }
  if (k1 == 0) throw SolverError("smoothing monitor could not locate t1 before T/2");
  rep.t1 = rep.times[k1];
  const double m3 = mean_over(rep.h3_history, rep.t1, half);
  std::size_t k2 = 0;
  for (std::size_t k = k1 + 1; k < F && rep.times[k] < half; ++k)
    if (rep.h3_history[k] <= m3) {
      k2 = k;
      break;
    }
  if (k2 == 0) throw SolverError("horizon too short to locate t2 < T/2; increase T or m");
  rep.t2 = rep.times[k2];
  rep.T_star = rep.t2;
  for (std::size_t k = k2; k < F; ++k) rep.c2_at_Tstar = std::max(rep.c2_at_Tstar, c2[k]);
  for (std::size_t k = k1; k < F; ++k) rep.lambda1 = std::max(rep.lambda1, 2.0 * rep.h2_history[k]);

  // L2(t2,T; H4) + L2(t2,T; y_t in H2) + L2(t2,T; y_tt in L2), trapezoidal in time
  double a = 0.0, b = 0.0, c = 0.0;
  const double dt = tg.dt;
  std::vector<double> yt(g.n), ytt(g.n);
  for (std::size_t k = k2; k < F; ++k) {
    const double w = (k == k2 || k + 1 == F) ? 0.5 * dt : dt;
    const auto f = run.y.frame(k);
    const double h4 = h4_surrogate(f, g.dx);
    a += w * h4 * h4;
    const std::size_t kp = std::min(k + 1, F - 1), km = k > 0 ? k - 1 : 0;
    for (std::size_t i = 0; i < g.n; ++i) {
      yt[i] = (run.y(kp, i) - run.y(km, i)) / (static_cast<double>(kp - km) * dt);
      ytt[i] = (kp - km == 2) ? (run.y(kp, i) - 2.0 * run.y(k, i) + run.y(km, i)) / (dt * dt) : 0.0;
    }
    const double ht = norms(yt, g.dx).h2;
    b += w * ht * ht;
    const double lt = l2_trapz(ytt, g.dx);
    c += w * lt * lt;
  }
  rep.lambda2 = std::sqrt(a) + std::sqrt(b) + std::sqrt(c);
  return rep;
}

} // namespace burgers
