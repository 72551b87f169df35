#pragma once

// Uniform 1-D grids, nodal fields, finite-difference stencils and the
// discrete norms every other module measures with.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "burgers/errors.hpp"

namespace burgers {

struct Grid1D {
  double x_left = 0.0;
  double x_right = 1.0;
  std::size_t n = 3;
  double dx = 0.5;

  double x(std::size_t i) const { return x_left + static_cast<double>(i) * dx; }
  double length() const { return x_right - x_left; }

  friend bool operator==(const Grid1D&, const Grid1D&) = default;
};

inline Grid1D make_grid(double x_left, double x_right, std::size_t n) {
  if (!(x_left < x_right) || !std::isfinite(x_left) || !std::isfinite(x_right))
    throw ConfigError("grid interval must satisfy x_left < x_right");
  if (n < 3)
    throw ConfigError("grid needs at least 3 nodes, got " + std::to_string(n));
  return Grid1D{x_left, x_right, n, (x_right - x_left) / static_cast<double>(n - 1)};
}

struct TimeGrid {
  double t0 = 0.0;
  double t1 = 1.0;
  std::size_t m = 1;
  double dt = 1.0;

  double t(std::size_t k) const { return k == m ? t1 : t0 + static_cast<double>(k) * dt; }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;
};

inline TimeGrid make_time_grid(double t0, double t1, std::size_t m) {
  if (!(t0 < t1)) throw ConfigError("time grid must satisfy t0 < t1");
  if (m < 1) throw ConfigError("time grid needs at least one step");
  return TimeGrid{t0, t1, m, (t1 - t0) / static_cast<double>(m)};
}

/// Nodal samples of a scalar function on a Grid1D.
class Field {
public:
  Field() = default;

  explicit Field(const Grid1D& grid, double value = 0.0) : grid_(grid), values_(grid.n, value) {}

  Field(const Grid1D& grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.n)
      throw ConfigError("field length " + std::to_string(values_.size()) +
                        " does not match grid size " + std::to_string(grid_.n));
    for (double v : values_)
      if (!std::isfinite(v)) throw SolverError("field contains a non-finite value");
  }

  template <class F>
  static Field sample(const Grid1D& grid, F&& f) {
    std::vector<double> v(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i) v[i] = f(grid.x(i));
    return Field(grid, std::move(v));
  }

  const Grid1D& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }
  std::span<const double> view() const { return values_; }

  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  double front() const { return values_.front(); }
  double back() const { return values_.back(); }

private:
  Grid1D grid_{};
  std::vector<double> values_;
};

/// Frames of a field over a TimeGrid, stored row-major with time outermost.
class SpaceTimeField {
public:
  SpaceTimeField() = default;

  SpaceTimeField(const TimeGrid& tgrid, const Grid1D& grid)
      : tgrid_(tgrid), grid_(grid), data_((tgrid.m + 1) * grid.n, 0.0) {}

  const TimeGrid& tgrid() const { return tgrid_; }
  const Grid1D& grid() const { return grid_; }
  std::size_t frames() const { return data_.empty() ? 0 : tgrid_.m + 1; }
  bool empty() const { return data_.empty(); }

  std::span<const double> frame(std::size_t k) const { return {data_.data() + k * grid_.n, grid_.n}; }
  std::span<double> frame(std::size_t k) { return {data_.data() + k * grid_.n, grid_.n}; }

  Field field(std::size_t k) const {
    auto f = frame(k);
    return Field(grid_, std::vector<double>(f.begin(), f.end()));
  }

  void set_frame(std::size_t k, std::span<const double> values) {
    if (values.size() != grid_.n) throw ConfigError("frame length mismatch");
    std::copy(values.begin(), values.end(), frame(k).begin());
  }
  void set_frame(std::size_t k, const Field& f) { set_frame(k, f.view()); }

  double operator()(std::size_t k, std::size_t i) const { return data_[k * grid_.n + i]; }
  double& operator()(std::size_t k, std::size_t i) { return data_[k * grid_.n + i]; }

  const std::vector<double>& data() const { return data_; }

private:
  TimeGrid tgrid_{};
  Grid1D grid_{};
  std::vector<double> data_;
};

// ---------------------------------------------------------------------------
// Interpolation on uniform grids.

/// Piecewise-linear interpolation; `outside` is returned off the grid.
inline double interp_linear(std::span<const double> v, const Grid1D& g, double x, double outside) {
  const double s = (x - g.x_left) / g.dx;
  if (s < 0.0 || s > static_cast<double>(g.n - 1)) return outside;
  auto i = static_cast<std::size_t>(s);
  if (i >= g.n - 1) i = g.n - 2;
  const double w = s - static_cast<double>(i);
  return (1.0 - w) * v[i] + w * v[i + 1];
}

/// Four-point Lagrange interpolation, stencil shifted inward near the ends.
/// Exact for cubics. Arguments outside the grid are clamped.
inline double interp_cubic(std::span<const double> v, const Grid1D& g, double x) {
  if (g.n < 4) return interp_linear(v, g, std::clamp(x, g.x_left, g.x_right), 0.0);
  double s = (x - g.x_left) / g.dx;
  s = std::clamp(s, 0.0, static_cast<double>(g.n - 1));
  auto i = static_cast<std::ptrdiff_t>(std::floor(s)) - 1;
  i = std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(g.n) - 4);
  const double u = s - static_cast<double>(i); // position relative to node i, in cells
  const double l0 = -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0;
  const double l1 = u * (u - 2.0) * (u - 3.0) / 2.0;
  const double l2 = -u * (u - 1.0) * (u - 3.0) / 2.0;
  const double l3 = u * (u - 1.0) * (u - 2.0) / 6.0;
  const auto j = static_cast<std::size_t>(i);
  return l0 * v[j] + l1 * v[j + 1] + l2 * v[j + 2] + l3 * v[j + 3];
}

// ---------------------------------------------------------------------------
// Stencils.

/// First derivative: centered inside, one-sided second order at both ends.
inline std::vector<double> diff1(std::span<const double> f, double dx) {
  const std::size_t n = f.size();
  std::vector<double> d(n);
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) / (2.0 * dx);
  d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dx);
  d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dx);
  return d;
}

/// Second derivative: 3-point inside, 4-point one-sided at the ends (n >= 4).
inline std::vector<double> diff2(std::span<const double> f, double dx) {
  const std::size_t n = f.size();
  const double h2 = dx * dx;
  std::vector<double> d(n);
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i - 1] - 2.0 * f[i] + f[i + 1]) / h2;
  if (n >= 4) {
    d[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h2;
    d[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / h2;
  } else {
    d[0] = d[1];
    d[n - 1] = d[1];
  }
  return d;
}

inline Field diff1(const Field& f) { return Field(f.grid(), diff1(f.view(), f.grid().dx)); }
inline Field diff2(const Field& f) { return Field(f.grid(), diff2(f.view(), f.grid().dx)); }

// ---------------------------------------------------------------------------
// Norms.

inline double sup_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

/// Trapezoidal L2 norm, so constants are measured exactly.
inline double l2_trapz(std::span<const double> v, double dx) {
  const std::size_t n = v.size();
  double s = 0.5 * (v[0] * v[0] + v[n - 1] * v[n - 1]);
  for (std::size_t i = 1; i + 1 < n; ++i) s += v[i] * v[i];
  return std::sqrt(s * dx);
}

struct NormReport {
  double c0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double l2 = 0.0;
  double h1 = 0.0;
  double h2 = 0.0;
};

inline NormReport norms(std::span<const double> f, double dx) {
  const auto d1 = diff1(f, dx);
  const auto d2 = diff2(f, dx);
  NormReport r;
  r.c0 = sup_abs(f);
  r.c1 = r.c0 + sup_abs(d1);
  r.c2 = r.c1 + sup_abs(d2);
  r.l2 = l2_trapz(f, dx);
  const double s1 = l2_trapz(d1, dx);
  const double s2 = l2_trapz(d2, dx);
  r.h1 = std::sqrt(r.l2 * r.l2 + s1 * s1);
  r.h2 = std::sqrt(r.h1 * r.h1 + s2 * s2);
  return r;
}

inline NormReport norms(const Field& f) { return norms(f.view(), f.grid().dx); }

enum class SpaceNorm { c0, c1, c2, l2, h1, h2 };
enum class TimeNorm { sup, l2 };

inline double pick(const NormReport& r, SpaceNorm k) {
  switch (k) {
  case SpaceNorm::c0: return r.c0;
  case SpaceNorm::c1: return r.c1;
  case SpaceNorm::c2: return r.c2;
  case SpaceNorm::l2: return r.l2;
  case SpaceNorm::h1: return r.h1;
  case SpaceNorm::h2: return r.h2;
  }
  return 0.0;
}

/// Spatial norm per frame, then sup over frames or trapezoidal L2 in time.
inline double trajectory_norm(const SpaceTimeField& F, SpaceNorm space, TimeNorm time) {
  const std::size_t nf = F.frames();
  std::vector<double> per(nf);
  for (std::size_t k = 0; k < nf; ++k) per[k] = pick(norms(F.frame(k), F.grid().dx), space);
  if (time == TimeNorm::sup) return sup_abs(per);
  if (nf == 1) return 0.0;
  return l2_trapz(per, F.tgrid().dt);
}

/// Largest nodal difference between two trajectories of equal shape.
inline double sup_gap(const SpaceTimeField& a, const SpaceTimeField& b) {
  double g = 0.0;
  const auto& da = a.data();
  const auto& db = b.data();
  for (std::size_t j = 0; j < da.size(); ++j) g = std::max(g, std::abs(da[j] - db[j]));
  return g;
}

/// Frame-wise difference of two trajectories on identical grids.
inline SpaceTimeField difference(const SpaceTimeField& a, const SpaceTimeField& b) {
  if (!(a.grid() == b.grid()) || !(a.tgrid() == b.tgrid()))
    throw ConfigError("trajectory grids differ");
  SpaceTimeField d(a.tgrid(), a.grid());
  for (std::size_t k = 0; k < a.frames(); ++k)
    for (std::size_t i = 0; i < a.grid().n; ++i) d(k, i) = a(k, i) - b(k, i);
  return d;
}

} // namespace burgers
