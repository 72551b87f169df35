#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "burgers/errors.hpp"
#include "burgers/grid.hpp"

namespace burgers {

/// Reference velocity for the return method: A sin^2(pi t / T) on [0, T].
/// A `constant` profile (value A everywhere) exists for testing only.
struct LambdaProfile {
  enum class Kind { sin2, constant };

  Kind kind = Kind::sin2;
  double T = 1.0;
  double amplitude = 0.0;
  double margin = 0.0;
  bool symmetric = false;
  int regularity_class = 1;

  double value(double t) const {
    if (kind == Kind::constant) return amplitude;
    if (t <= 0.0 || t >= T) return 0.0;
    const double s = std::sin(std::numbers::pi * t / T);
    return amplitude * s * s;
  }

  double derivative(double t) const {
    if (kind == Kind::constant) return 0.0;
    if (t <= 0.0 || t >= T) return 0.0;
    return amplitude * std::numbers::pi / T * std::sin(2.0 * std::numbers::pi * t / T);
  }

  /// Antiderivative vanishing at t = 0.
  double primitive(double t) const {
    if (kind == Kind::constant) return amplitude * t;
    const double tc = std::clamp(t, 0.0, T);
    return amplitude * (0.5 * tc - T * std::sin(2.0 * std::numbers::pi * tc / T) / (4.0 * std::numbers::pi));
  }

  double integral(double t0, double t1) const { return primitive(t1) - primitive(t0); }
  double mass() const { return primitive(T); }
  double peak() const { return amplitude; }

  std::vector<double> sample(const TimeGrid& tg) const {
    std::vector<double> v(tg.m + 1);
    for (std::size_t k = 0; k <= tg.m; ++k) v[k] = value(tg.t(k));
    return v;
  }

  std::vector<double> sample_derivative(const TimeGrid& tg) const {
    std::vector<double> v(tg.m + 1);
    for (std::size_t k = 0; k <= tg.m; ++k) v[k] = derivative(tg.t(k));
    return v;
  }
};

/// Mass over [0, T] is 2(L + 2 eta)(1 + margin)/T * T/2 = (L + 2 eta)(1 + margin).
/// The symmetric variant doubles the amplitude so the same bound holds on [0, T/2].
inline LambdaProfile make_lambda(double L, double T, double eta, double margin, bool symmetric = false) {
  if (!(margin > 0.0)) throw ConfigError("lambda margin must be positive");
  if (!(L > 0.0) || !(T > 0.0) || !(eta > 0.0)) throw ConfigError("lambda needs L, T, eta > 0");
  LambdaProfile p;
  p.T = T;
  p.margin = margin;
  p.symmetric = symmetric;
  p.amplitude = 2.0 * (L + 2.0 * eta) * (1.0 + margin) / T;
  if (symmetric) p.amplitude *= 2.0;
  return p;
}

inline LambdaProfile make_constant_lambda(double c, double T) {
  LambdaProfile p;
  p.kind = LambdaProfile::Kind::constant;
  p.T = T;
  p.amplitude = c;
  p.regularity_class = 0;
  return p;
}

} // namespace burgers
