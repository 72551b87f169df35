#pragma once

// Fixed-point null controller for y_t + (lambda + z) y_x = 0, z the filtered y,
// with the amplitude-threshold calibration that stands in for the smallness
// constant of the local result.

#include <cmath>
#include <map>
#include <limits>
#include <mutex>
#include <numbers>
#include <optional>
#include <tuple>
#include <vector>

#include "burgers/controls.hpp"
#include "burgers/errors.hpp"
#include "burgers/filter.hpp"
#include "burgers/flow.hpp"
#include "burgers/grid.hpp"
#include "burgers/lambda.hpp"

namespace burgers {

enum class Regularity { c1, c2 };

struct NullControlOptions {
  double tol = 1e-11;
  int max_iter = 30;
  std::size_t flow_substeps = 4;
  /// c2 extends the initial datum with the second-order even reflection.
  Regularity regularity = Regularity::c1;
  /// Abort as soon as an iterate's |z*| exceeds this value (<= 0 disables).
  double zstar_cap = -1.0;
  /// Gap above which the iteration is declared divergent.
  double divergence_gap = 1e3;
  bool throw_on_failure = true;
  /// Smallness threshold in the matching C^k norm, if known. Only used for the warning.
  std::optional<double> delta_hat;
};

struct NullControlResult {
  Extension ext;
  SpaceTimeField y;         // perturbation state on [0, L]
  SpaceTimeField z;         // its filter
  SpaceTimeField z_star;    // extended, cut-off velocity perturbation of the last iterate
  SpaceTimeField departure; // D_k(x) = phi*(t_k; 0, x) on the extended grid
  ControlTriple controls;   // p = 0, traces of y
  std::vector<double> gaps;
  int iterations = 0;
  bool converged = false;
  bool smallness_warning = false;
  double zstar_sup = 0.0;
  double data_norm = 0.0;
};

/// z* = chi * extend_even_c2(filter(h)) for every frame of h.
inline SpaceTimeField extended_velocity(const SpaceTimeField& h, const Extension& e,
                                        const CutoffProfile& chi, double alpha) {
  SpaceTimeField zs(h.tgrid(), e.ext);
  std::vector<double> z(e.base.n);
  for (std::size_t k = 0; k < h.frames(); ++k) {
    auto hk = h.frame(k);
    filter_solve_into(hk, e.base.dx, hk.front(), hk.back(), alpha, z);
    auto ze = extend_even_c2(z, e);
    apply_cutoff_inplace(ze, chi);
    zs.set_frame(k, ze);
  }
  return zs;
}

/// Extended, cut-off initial datum.
inline std::vector<double> extended_datum(std::span<const double> y0, const Extension& e,
                                          const CutoffProfile& chi, Regularity reg) {
  auto v = reg == Regularity::c2 ? extend_even_c2(y0, e) : extend_odd_c1(y0, e);
  apply_cutoff_inplace(v, chi);
  return v;
}

/// Evaluates y(t_k, x_i) = y0*(D_k(x_i)) on the base nodes. y0* vanishes off its grid.
inline void compose_with_departure(std::span<const double> y0s, const Extension& e,
                                   const SpaceTimeField& D, SpaceTimeField& y) {
  const Grid1D& ge = e.ext;
  for (std::size_t k = 0; k < D.frames(); ++k) {
    auto dk = D.frame(k);
    auto yk = y.frame(k);
    for (std::size_t i = 0; i < e.base.n; ++i) {
      const double xd = dk[e.first() + i];
      yk[i] = (xd < ge.x_left || xd > ge.x_right) ? 0.0 : interp_cubic(y0s, ge, xd);
    }
  }
}

inline double data_norm(const Field& y0, Regularity reg) {
  const auto r = norms(y0);
  return reg == Regularity::c2 ? r.c2 : r.c1;
}

/// Picard iteration h -> y on the time grid `tg` (which may end before lambda.T).
inline NullControlResult picard_null_control(const Field& y0, const LambdaProfile& lambda, double alpha,
                                             double eta, const TimeGrid& tg,
                                             const NullControlOptions& opt = {}) {
  if (!(alpha >= 0.0)) throw ConfigError("alpha must be >= 0");
  if (tg.t1 > lambda.T + 1e-12) throw ConfigError("time grid extends beyond the lambda horizon");
  NullControlResult res;
  res.ext = make_extension(y0.grid(), eta);
  const Extension& e = res.ext;
  const CutoffProfile chi = make_cutoff(e);
  const auto y0s = extended_datum(y0.view(), e, chi, opt.regularity);
  res.data_norm = data_norm(y0, opt.regularity);
  if (opt.delta_hat && res.data_norm > *opt.delta_hat) res.smallness_warning = true;

  const double max_disp = e.eta;
  SpaceTimeField h(tg, e.base); // h^0 = 0
  SpaceTimeField y(tg, e.base);
  SpaceTimeField zs;
  SpaceTimeField D;
  for (int it = 1; it <= opt.max_iter; ++it) {
    zs = extended_velocity(h, e, chi, alpha);
    res.zstar_sup = sup_abs(zs.data());
    if (opt.zstar_cap > 0.0 && res.zstar_sup > opt.zstar_cap) {
      res.iterations = it;
      break;
    }
    D = departure_maps(lambda, zs, opt.flow_substeps, max_disp);
    compose_with_departure(y0s, e, D, y);
    const double gap = sup_gap(y, h);
    res.gaps.push_back(gap);
    res.iterations = it;
    std::swap(h, y);
    if (!std::isfinite(gap) || gap > opt.divergence_gap) break;
    if (gap <= opt.tol) {
      res.converged = true;
      break;
    }
  }
  res.y = std::move(h);
  if (res.converged) {
    res.z_star = std::move(zs);
    res.departure = std::move(D);
  }
  if (!res.converged) {
    if (opt.throw_on_failure)
      throw ConvergenceError("null-control fixed point did not converge", res.gaps);
    return res;
  }
  res.z = SpaceTimeField(tg, e.base);
  std::vector<double> z(e.base.n);
  for (std::size_t k = 0; k < res.y.frames(); ++k) {
    auto yk = res.y.frame(k);
    filter_solve_into(yk, e.base.dx, yk.front(), yk.back(), alpha, z);
    res.z.set_frame(k, z);
  }
  res.controls = ControlTriple::zeros(tg);
  for (std::size_t k = 0; k < res.y.frames(); ++k) {
    res.controls.v_l[k] = res.y(k, 0);
    res.controls.v_r[k] = res.y(k, e.base.n - 1);
  }
  return res;
}

/// Adds the reference trajectory: Y = y + lambda, Z = z + lambda, p = lambda',
/// traces shifted by lambda.
struct LiftedState {
  SpaceTimeField Y;
  SpaceTimeField Z;
  ControlTriple controls;
};

inline LiftedState lift_to_full_state(const SpaceTimeField& y, const SpaceTimeField& z,
                                      const LambdaProfile& lambda) {
  LiftedState s{y, z, ControlTriple::zeros(y.tgrid())};
  const TimeGrid& tg = y.tgrid();
  for (std::size_t k = 0; k < y.frames(); ++k) {
    const double l = lambda.value(tg.t(k));
    for (std::size_t i = 0; i < y.grid().n; ++i) {
      s.Y(k, i) += l;
      s.Z(k, i) += l;
    }
    s.controls.p[k] = lambda.derivative(tg.t(k));
    s.controls.v_l[k] = s.Y(k, 0);
    s.controls.v_r[k] = s.Y(k, y.grid().n - 1);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Threshold calibration.

struct CalibrationKey {
  double L, T_run, eta;
  std::size_t n, m;
  int regularity;
  double margin;
  bool symmetric;
  double lambda_T;
  auto tie() const { return std::tie(L, T_run, eta, n, m, regularity, margin, symmetric, lambda_T); }
  bool operator<(const CalibrationKey& o) const { return tie() < o.tie(); }
};

struct CalibrationResult {
  double delta_hat = 0.0;
  std::vector<double> alphas;
  int bisection_steps = 0;
};

inline const std::vector<double>& calibration_alphas() {
  static const std::vector<double> a{0.0, 0.05, 0.5, 5.0};
  return a;
}

/// Largest data norm (C^1 or C^2) for which the fixed point converges within
/// max_iter and |z*| stays below eta / T_run, minimized over two probe shapes
/// and the alpha ladder. Results are cached per configuration.
inline CalibrationResult calibrate_delta_hat(const Grid1D& grid, const LambdaProfile& lambda, double eta,
                                             const TimeGrid& tg, Regularity reg, int steps = 10) {
  static std::mutex mu;
  static std::map<CalibrationKey, CalibrationResult> cache;
  const CalibrationKey key{grid.length(), tg.t1 - tg.t0, eta, grid.n, tg.m, static_cast<int>(reg),
                           lambda.margin, lambda.symmetric, lambda.T};
  {
    std::lock_guard lock(mu);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  const double L = grid.length();
  const double cap = make_extension(grid, eta).eta / (tg.t1 - tg.t0);
  NullControlOptions opt;
  opt.regularity = reg;
  opt.zstar_cap = cap;
  opt.throw_on_failure = false;
  opt.divergence_gap = 10.0;
  opt.tol = 1e-11;

  auto ok = [&](const Field& f, double alpha) {
    try {
      auto r = picard_null_control(f, lambda, alpha, eta, tg, opt);
      return r.converged && r.zstar_sup <= cap;
    } catch (const SolverError&) {
      return false;
    }
  };

  const double pi = std::numbers::pi;
  const std::vector<Field> shapes{
      Field::sample(grid, [&](double x) { return std::sin(pi * (x - grid.x_left) / L); }),
      Field::sample(grid, [&](double x) { return std::cos(pi * (x - grid.x_left) / L); })};

  CalibrationResult out;
  out.alphas = calibration_alphas();
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : shapes) {
    const double sn = data_norm(s, reg);
    auto scaled = [&](double a) {
      std::vector<double> v = s.values();
      for (double& x : v) x *= a;
      return Field(grid, std::move(v));
    };
    double a = 0.0;
    if (std::isfinite(best)) {
      a = best / sn;
    } else {
      a = cap / sup_abs(s.view());
      for (int j = 0; j < 12 && ok(scaled(a), out.alphas.front()); ++j) a *= 2.0;
    }
    for (double alpha : out.alphas) {
      if (ok(scaled(a), alpha)) continue;
      double lo = 0.0, hi = a;
      for (int j = 0; j < steps; ++j) {
        const double mid = 0.5 * (lo + hi);
        if (ok(scaled(mid), alpha)) lo = mid;
        else hi = mid;
        ++out.bisection_steps;
      }
      a = lo;
    }
    best = std::min(best, a * sn);
  }
  out.delta_hat = best;
  std::lock_guard lock(mu);
  cache.emplace(key, out);
  return out;
}

} // namespace burgers
