#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "burgers/csv.hpp"
#include "burgers/errors.hpp"
#include "burgers/grid.hpp"

namespace burgers {

/// Time samples of the distributed control p and the two boundary traces.
struct ControlTriple {
  TimeGrid tgrid;
  std::vector<double> p;
  std::vector<double> v_l;
  std::vector<double> v_r;

  static ControlTriple zeros(const TimeGrid& tg) {
    const std::size_t m = tg.m + 1;
    return ControlTriple{tg, std::vector<double>(m, 0.0), std::vector<double>(m, 0.0),
                         std::vector<double>(m, 0.0)};
  }

  static ControlTriple constant(const TimeGrid& tg, double p, double v_l, double v_r) {
    const std::size_t m = tg.m + 1;
    return ControlTriple{tg, std::vector<double>(m, p), std::vector<double>(m, v_l),
                         std::vector<double>(m, v_r)};
  }

  void validate() const {
    const std::size_t m = tgrid.m + 1;
    if (p.size() != m || v_l.size() != m || v_r.size() != m)
      throw ConfigError("control sample counts do not match the time grid");
  }

  /// Piecewise-linear interpolation of a sampled signal.
  static double at(const std::vector<double>& s, const TimeGrid& tg, double t) {
    double u = (t - tg.t0) / tg.dt;
    u = std::clamp(u, 0.0, static_cast<double>(tg.m));
    auto k = static_cast<std::size_t>(u);
    if (k >= tg.m) return s[tg.m];
    const double w = u - static_cast<double>(k);
    return (1.0 - w) * s[k] + w * s[k + 1];
  }

  double p_at(double t) const { return at(p, tgrid, t); }
  double v_l_at(double t) const { return at(v_l, tgrid, t); }
  double v_r_at(double t) const { return at(v_r, tgrid, t); }

  /// Exact integral of the piecewise-linear interpolant of p over [a, b].
  double p_integral(double a, double b) const {
    if (b <= a) return 0.0;
    double s = 0.0;
    double lo = a;
    while (lo < b) {
      const double u = (lo - tgrid.t0) / tgrid.dt;
      const double knot = tgrid.t0 + (std::floor(u + 1e-12) + 1.0) * tgrid.dt;
      const double hi = std::min(b, knot);
      s += 0.5 * (hi - lo) * (p_at(lo) + p_at(hi));
      lo = hi;
    }
    return s;
  }

  double p_sup() const { return sup_abs(p); }
  double v_sup() const { return std::max(sup_abs(v_l), sup_abs(v_r)); }

  /// Sup of the traces plus sup of their first time differences.
  double trace_c1() const {
    auto c1 = [&](const std::vector<double>& v) {
      double d = 0.0;
      for (std::size_t k = 0; k + 1 < v.size(); ++k) d = std::max(d, std::abs(v[k + 1] - v[k]) / tgrid.dt);
      return sup_abs(v) + d;
    };
    return std::max(c1(v_l), c1(v_r));
  }

  std::string csv() const {
    CsvWriter w({"t", "p", "v_l", "v_r"});
    for (std::size_t k = 0; k <= tgrid.m; ++k) w.row({tgrid.t(k), p[k], v_l[k], v_r[k]});
    return w.str();
  }
};

} // namespace burgers
