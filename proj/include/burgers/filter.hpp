#pragma once

// Helmholtz filter z - alpha^2 z_xx = y with Dirichlet data, reflection
// extensions to [x_left - eta, x_right + eta] and the smooth cutoff.

#include <cmath>
#include <span>
#include <vector>

#include "burgers/errors.hpp"
#include "burgers/grid.hpp"

namespace burgers {

/// Solves a[i] x[i-1] + b[i] x[i] + c[i] x[i+1] = d[i] in place of d.
/// a[0] and c[n-1] are ignored. Requires a diagonally dominant system.
inline void thomas_solve(std::span<const double> a, std::span<const double> b,
                         std::span<const double> c, std::span<double> d,
                         std::vector<double>& scratch) {
  const std::size_t n = d.size();
  scratch.resize(n);
  double denom = b[0];
  scratch[0] = c[0] / denom;
  d[0] /= denom;
  for (std::size_t i = 1; i < n; ++i) {
    denom = b[i] - a[i] * scratch[i - 1];
    scratch[i] = (i + 1 < n) ? c[i] / denom : 0.0;
    d[i] = (d[i] - a[i] * d[i - 1]) / denom;
  }
  for (std::size_t i = n - 1; i-- > 0;) d[i] -= scratch[i] * d[i + 1];
}

/// Constant-coefficient variant for the filter operator.
inline void filter_solve_into(std::span<const double> y, double dx, double v_l, double v_r,
                              double alpha, std::span<double> z) {
  const std::size_t n = y.size();
  z[0] = v_l;
  z[n - 1] = v_r;
  if (alpha == 0.0) {
    for (std::size_t i = 1; i + 1 < n; ++i) z[i] = y[i];
    return;
  }
  const double s = alpha * alpha / (dx * dx);
  const double diag = 1.0 + 2.0 * s;
  const std::size_t m = n - 2;
  std::vector<double> cp(m);
  double* d = z.data() + 1;
  for (std::size_t j = 0; j < m; ++j) d[j] = y[j + 1];
  d[0] += s * v_l;
  d[m - 1] += s * v_r;
  double denom = diag;
  cp[0] = -s / denom;
  d[0] /= denom;
  for (std::size_t j = 1; j < m; ++j) {
    denom = diag + s * cp[j - 1];
    cp[j] = -s / denom;
    d[j] = (d[j] + s * d[j - 1]) / denom;
  }
  for (std::size_t j = m - 1; j-- > 0;) d[j] -= cp[j] * d[j + 1];
}

/// z - alpha^2 z_xx = y on the interior, z = v_l, v_r at the ends.
inline Field solve_filter(const Field& y, double v_l, double v_r, double alpha) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be finite and >= 0");
  std::vector<double> z(y.size());
  filter_solve_into(y.view(), y.grid().dx, v_l, v_r, alpha, z);
  return Field(y.grid(), std::move(z));
}

/// Max-norm residual of the discrete filter equation on the interior nodes.
inline double filter_residual(std::span<const double> y, std::span<const double> z, double dx,
                              double alpha) {
  const double s = alpha * alpha / (dx * dx);
  double r = 0.0;
  for (std::size_t i = 1; i + 1 < y.size(); ++i)
    r = std::max(r, std::abs(z[i] - s * (z[i - 1] - 2.0 * z[i] + z[i + 1]) - y[i]));
  return r;
}

/// A base grid and its symmetric extension by k cells on each side.
struct Extension {
  Grid1D base;
  Grid1D ext;
  std::size_t k = 0;
  double eta = 0.0; // k * dx, the width actually used

  std::size_t first() const { return k; }
  std::size_t last() const { return k + base.n - 1; }
};

/// eta is rounded to the nearest whole number of cells (at least two).
inline Extension make_extension(const Grid1D& base, double eta) {
  const double L = base.length();
  if (!(eta > 0.0) || !(eta < 0.5 * L))
    throw ConfigError("extension width eta must lie in (0, L/2)");
  auto k = static_cast<std::size_t>(std::lround(eta / base.dx));
  k = std::max<std::size_t>(k, 2);
  const double eta_used = static_cast<double>(k) * base.dx;
  if (!(eta_used < 0.5 * L)) throw ConfigError("extension width eta must lie in (0, L/2) on this mesh");
  Extension e;
  e.base = base;
  e.k = k;
  e.eta = eta_used;
  e.ext = Grid1D{base.x_left - eta_used, base.x_right + eta_used, base.n + 2 * k, base.dx};
  return e;
}

/// Even extension continuous through second derivatives:
/// 5z(-x) - 20z(-x/2) + 16z(-x/4) on the left, mirrored on the right.
inline std::vector<double> extend_even_c2(std::span<const double> z, const Extension& e) {
  const Grid1D& g = e.base;
  const double x0 = g.x_left, x1 = g.x_right;
  std::vector<double> out(e.ext.n);
  for (std::size_t i = 0; i < g.n; ++i) out[e.k + i] = z[i];
  for (std::size_t j = 0; j < e.k; ++j) {
    const double s = static_cast<double>(e.k - j) * g.dx; // distance outside
    out[j] = 5.0 * z[e.k - j] - 20.0 * interp_cubic(z, g, x0 + 0.5 * s) +
             16.0 * interp_cubic(z, g, x0 + 0.25 * s);
    const std::size_t r = e.last() + (e.k - j);
    out[r] = 5.0 * z[g.n - 1 - (e.k - j)] - 20.0 * interp_cubic(z, g, x1 - 0.5 * s) +
             16.0 * interp_cubic(z, g, x1 - 0.25 * s);
  }
  return out;
}

inline Field extend_even_c2(const Field& z, const Extension& e) {
  if (!(z.grid() == e.base)) throw ConfigError("field is not on the extension's base grid");
  return Field(e.ext, extend_even_c2(z.view(), e));
}

/// Odd extension about the boundary value: -y(-x) + 2y(0), mirrored on the right.
inline std::vector<double> extend_odd_c1(std::span<const double> y, const Extension& e) {
  const std::size_t n = e.base.n;
  std::vector<double> out(e.ext.n);
  for (std::size_t i = 0; i < n; ++i) out[e.k + i] = y[i];
  for (std::size_t j = 1; j <= e.k; ++j) {
    out[e.k - j] = -y[j] + 2.0 * y[0];
    out[e.last() + j] = -y[n - 1 - j] + 2.0 * y[n - 1];
  }
  return out;
}

inline Field extend_odd_c1(const Field& y, const Extension& e) {
  if (!(y.grid() == e.base)) throw ConfigError("field is not on the extension's base grid");
  return Field(e.ext, extend_odd_c1(y.view(), e));
}

inline std::vector<double> restrict_to_base(std::span<const double> f, const Extension& e) {
  return std::vector<double>(f.begin() + static_cast<std::ptrdiff_t>(e.first()),
                             f.begin() + static_cast<std::ptrdiff_t>(e.last() + 1));
}

inline double smoothstep5(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  return s * s * s * (s * (6.0 * s - 15.0) + 10.0);
}

struct CutoffProfile {
  double eta = 0.0;
  Field samples;
};

/// chi = 1 on the base interval, 0 outside (x_left - eta/2, x_right + eta/2),
/// quintic smoothstep in between.
inline CutoffProfile make_cutoff(const Extension& e) {
  const double x0 = e.base.x_left, x1 = e.base.x_right, h = 0.5 * e.eta;
  auto chi = [&](double x) {
    if (x < x0) return smoothstep5((x - (x0 - h)) / h);
    if (x > x1) return smoothstep5(((x1 + h) - x) / h);
    return 1.0;
  };
  std::vector<double> v(e.ext.n);
  for (std::size_t i = 0; i < e.ext.n; ++i) v[i] = chi(e.ext.x(i));
  for (std::size_t i = e.first(); i <= e.last(); ++i) v[i] = 1.0;
  return CutoffProfile{e.eta, Field(e.ext, std::move(v))};
}

inline void apply_cutoff_inplace(std::span<double> f, const CutoffProfile& chi) {
  if (f.size() != chi.samples.size()) throw ConfigError("cutoff grid mismatch");
  for (std::size_t i = 0; i < f.size(); ++i) f[i] *= chi.samples[i];
}

inline Field apply_cutoff(const Field& f, const CutoffProfile& chi) {
  if (!(f.grid() == chi.samples.grid())) throw ConfigError("cutoff grid mismatch");
  std::vector<double> v = f.values();
  apply_cutoff_inplace(v, chi);
  return Field(f.grid(), std::move(v));
}

} // namespace burgers
