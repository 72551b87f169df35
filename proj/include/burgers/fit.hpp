#pragma once

// Least-squares line fits and small statistics helpers for the studies.

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "burgers/errors.hpp"

namespace burgers {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double ci95_low = 0.0;
  double ci95_high = 0.0;
  std::size_t points = 0;
};

/// Two-sided 97.5% Student t quantile.
inline double student_t975(std::size_t dof) {
  static const double tab[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
                               2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086};
  if (dof == 0) return std::numeric_limits<double>::infinity();
  if (dof <= 20) return tab[dof - 1];
  return 1.96 + 2.4 / static_cast<double>(dof);
}

inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ConfigError("line fit needs at least two paired points");
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw ConfigError("line fit abscissae are all equal");
  LineFit f;
  f.points = x.size();
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double rss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    rss += r * r;
  }
  const std::size_t dof = x.size() - 2;
  f.slope_stderr = dof > 0 ? std::sqrt(rss / static_cast<double>(dof) / sxx) : 0.0;
  const double t = dof > 0 ? student_t975(dof) : 0.0;
  f.ci95_low = f.slope - t * f.slope_stderr;
  f.ci95_high = f.slope + t * f.slope_stderr;
  return f;
}

/// Slope of log y against log x. Non-positive entries are rejected.
inline LineFit fit_loglog(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw ConfigError("log-log fit needs positive data");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  return fit_line(lx, ly);
}

/// max/min of |values|; 1 when all vanish, infinity when only some do.
inline double spread(std::span<const double> v) {
  if (v.empty()) return 1.0;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (double a : v) {
    lo = std::min(lo, std::abs(a));
    hi = std::max(hi, std::abs(a));
  }
  if (hi == 0.0) return 1.0;
  if (lo == 0.0) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

/// Discrete H^s seminorm of equally spaced samples on a window of length T:
/// sqrt(T * sum_k |2 pi k / T|^{2s} |c_k|^2) over the DFT of the samples after
/// removing the chord between the end values (no wrap-around jump).
inline double fractional_seminorm(std::span<const double> raw, double T, double order) {
  const std::size_t N = raw.size();
  if (N < 2 || !(T > 0.0)) return 0.0;
  std::vector<double> s(N);
  for (std::size_t j = 0; j < N; ++j)
    s[j] = raw[j] - raw.front() - (raw.back() - raw.front()) * static_cast<double>(j) / static_cast<double>(N - 1);
  double mean = 0.0;
  for (double v : s) mean += v;
  mean /= static_cast<double>(N);
  double acc = 0.0;
  for (std::size_t k = 1; k <= N / 2; ++k) {
    std::complex<double> c = 0.0;
    for (std::size_t j = 0; j < N; ++j) {
      const double ph = -2.0 * std::numbers::pi * static_cast<double>(k * j) / static_cast<double>(N);
      c += (s[j] - mean) * std::polar(1.0, ph);
    }
    c /= static_cast<double>(N);
    const double w = std::pow(2.0 * std::numbers::pi * static_cast<double>(k) / T, 2.0 * order);
    acc += (2 * k == N ? 1.0 : 2.0) * w * std::norm(c);
  }
  return std::sqrt(T * acc);
}

} // namespace burgers
