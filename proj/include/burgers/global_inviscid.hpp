#pragma once

// Large-data exact control of the inviscid system by gluing a scaled forward
// null-control arc from y0, a dead zone, and a scaled time-reversed arc from yT.

#include <algorithm>
#include <cmath>
#include <optional>

#include "burgers/controls.hpp"
#include "burgers/errors.hpp"
#include "burgers/grid.hpp"
#include "burgers/lambda.hpp"
#include "burgers/null_control.hpp"

namespace burgers {

struct GlobalInviscidOptions {
  double eta = 0.25;
  double margin = 0.1;
  double gamma_cap = 0.4;
  std::optional<double> delta_hat;  // skip calibration
  std::optional<double> gamma0;     // override the selection rule
  std::optional<double> one_minus_gammaT;
  NullControlOptions picard;
};

struct ArcReport {
  double scale = 0.0;      // gamma0 or 1 - gammaT
  std::size_t frames = 0;  // global steps covered by the arc
  std::size_t refine = 1;  // arc steps per global step
  int iterations = 0;
  std::vector<double> gaps;
  double zstar_sup = 0.0;
  double flow_deviation = 0.0;
};

struct GlobalInviscidResult {
  SpaceTimeField Y;
  SpaceTimeField Z;
  ControlTriple controls;
  double delta_hat = 0.0;
  double gamma0 = 0.0;
  double gammaT = 0.0;
  double eta = 0.0;
  ArcReport first;
  ArcReport last;
  NullControlResult first_arc;
  NullControlResult last_arc;
  LambdaProfile lambda;
};

/// Largest |D_k(x) - (x - int_0^{t_k} lambda)| over the extended grid.
inline double departure_deviation(const NullControlResult& r, const LambdaProfile& lambda) {
  const auto& D = r.departure;
  const Grid1D& g = D.grid();
  double dev = 0.0;
  for (std::size_t k = 0; k < D.frames(); ++k) {
    const double shift = lambda.primitive(D.tgrid().t(k)) - lambda.primitive(D.tgrid().t0);
    for (std::size_t i = 0; i < g.n; ++i) dev = std::max(dev, std::abs(D(k, i) - (g.x(i) - shift)));
  }
  return dev;
}

inline double select_scale(double cap, double delta_hat, double data_c1) {
  return std::min(cap, delta_hat / (2.0 * std::max(1.0, data_c1)));
}

/// Y(0) = y0 and Y(T) = yT on a global time grid with m steps.
inline GlobalInviscidResult global_inviscid_control(const Field& y0, const Field& yT, double alpha,
                                                    double T, std::size_t m,
                                                    const GlobalInviscidOptions& opt = {}) {
  if (!(y0.grid() == yT.grid())) throw ConfigError("y0 and yT must share a grid");
  if (!(T > 0.0) || m < 4) throw ConfigError("global control needs T > 0 and at least 4 steps");
  const Grid1D& g = y0.grid();
  const double L = g.length();
  const TimeGrid tg = make_time_grid(0.0, T, m);
  GlobalInviscidResult out;
  out.lambda = make_lambda(L, T, opt.eta, opt.margin);
  out.eta = make_extension(g, opt.eta).eta;

  if (opt.delta_hat) {
    out.delta_hat = *opt.delta_hat;
  } else {
    const TimeGrid tc = make_time_grid(0.0, T, g.n - 1);
    out.delta_hat = calibrate_delta_hat(g, out.lambda, opt.eta, tc, Regularity::c1).delta_hat;
  }
  if (!(out.delta_hat > 0.0)) throw SolverError("calibrated smallness threshold is zero");

  const double n0 = norms(y0).c1, nT = norms(yT).c1;
  const double s0 = opt.gamma0.value_or(select_scale(opt.gamma_cap, out.delta_hat, n0));
  const double sT = opt.one_minus_gammaT.value_or(select_scale(opt.gamma_cap, out.delta_hat, nT));
  // snap both arcs down to whole global steps
  const auto k0 = static_cast<std::size_t>(std::floor(s0 * static_cast<double>(m) + 1e-9));
  const auto kT = static_cast<std::size_t>(std::floor(sT * static_cast<double>(m) + 1e-9));
  if (k0 < 1 || kT < 1) throw ConfigError("time grid too coarse for the arc lengths; increase m");
  if (k0 + kT > m) throw ConfigError("arcs overlap; gamma0 + (1 - gammaT) must not exceed 1");
  const double c0 = static_cast<double>(k0) / static_cast<double>(m);
  const double cT = static_cast<double>(kT) / static_cast<double>(m);
  out.gamma0 = c0;
  out.gammaT = 1.0 - cT;

  NullControlOptions popt = opt.picard;
  popt.delta_hat = out.delta_hat;

  auto run_arc = [&](const Field& data, std::size_t k, double scale, ArcReport& rep) {
    rep.scale = scale;
    rep.frames = k;
    rep.refine = std::max<std::size_t>(1, (m + k - 1) / k);
    const TimeGrid ta = make_time_grid(0.0, T, k * rep.refine);
    std::vector<double> v = data.values();
    for (double& x : v) x *= scale;
    auto r = picard_null_control(Field(g, std::move(v)), out.lambda, alpha, opt.eta, ta, popt);
    rep.iterations = r.iterations;
    rep.gaps = r.gaps;
    rep.zstar_sup = r.zstar_sup;
    rep.flow_deviation = departure_deviation(r, out.lambda);
    return r;
  };

  out.first_arc = run_arc(y0, k0, c0, out.first);
  std::vector<double> yT_ref(g.n);
  for (std::size_t i = 0; i < g.n; ++i) yT_ref[i] = yT[g.n - 1 - i];
  out.last_arc = run_arc(Field(g, yT_ref), kT, cT, out.last);

  const LiftedState A = lift_to_full_state(out.first_arc.y, out.first_arc.z, out.lambda);
  const LiftedState B = lift_to_full_state(out.last_arc.y, out.last_arc.z, out.lambda);

  out.Y = SpaceTimeField(tg, g);
  out.Z = SpaceTimeField(tg, g);
  out.controls = ControlTriple::zeros(tg);
  const std::size_t n = g.n;
  for (std::size_t k = 0; k <= k0; ++k) {
    const std::size_t j = k * out.first.refine;
    for (std::size_t i = 0; i < n; ++i) {
      out.Y(k, i) = A.Y(j, i) / c0;
      out.Z(k, i) = A.Z(j, i) / c0;
    }
    out.controls.p[k] = A.controls.p[j] / (c0 * c0);
    out.controls.v_l[k] = A.controls.v_l[j] / c0;
    out.controls.v_r[k] = A.controls.v_r[j] / c0;
  }
  for (std::size_t k = m - kT; k <= m; ++k) {
    const std::size_t j = (m - k) * out.last.refine;
    for (std::size_t i = 0; i < n; ++i) {
      out.Y(k, i) = B.Y(j, n - 1 - i) / cT;
      out.Z(k, i) = B.Z(j, n - 1 - i) / cT;
    }
    out.controls.p[k] = -B.controls.p[j] / (cT * cT);
    out.controls.v_l[k] = B.controls.v_r[j] / cT;
    out.controls.v_r[k] = B.controls.v_l[j] / cT;
  }
  return out;
}

} // namespace burgers
