#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "burgers/fit.hpp"
#include "burgers/smoothing.hpp"

using namespace burgers;
constexpr double pi = std::numbers::pi;

static Field tent(const Grid1D& g, double amp) {
  return Field::sample(g, [&](double x) { return amp * (0.5 - std::abs(x - 0.5)) + 0.2 * amp * std::sin(5 * pi * x); });
}

TEST(Smoothing, TimesAreOrdered) {
  auto g = make_grid(0, 1, 101);
  auto tg = make_time_grid(0, 1, 200);
  auto r = smoothing_monitor(tent(g, 1.0), 0.1, tg);
  EXPECT_GT(r.t1, 0.0);
  EXPECT_LT(r.t1, r.t2);
  EXPECT_LT(r.t2, 0.5);
  EXPECT_EQ(r.T_star, r.t2);
  EXPECT_GT(r.c2_at_Tstar, 0.0);
  EXPECT_GT(r.lambda1, 0.0);
  EXPECT_GT(r.lambda2, 0.0);
  EXPECT_EQ(r.times.size(), tg.m + 1);
}

TEST(Smoothing, ZeroDataStaysZero) {
  auto g = make_grid(0, 1, 41);
  auto r = smoothing_monitor(Field(g), 0.1, make_time_grid(0, 1, 40));
  EXPECT_EQ(r.c2_at_Tstar, 0.0);
  EXPECT_EQ(r.lambda1, 0.0);
  EXPECT_EQ(r.lambda2, 0.0);
}

TEST(Smoothing, UniformInAlpha) {
  auto g = make_grid(0, 1, 101);
  auto tg = make_time_grid(0, 1, 200);
  std::vector<double> c2;
  for (double alpha : {0.01, 0.1, 1.0}) c2.push_back(smoothing_monitor(tent(g, 1.0), alpha, tg).c2_at_Tstar);
  EXPECT_LE(spread(c2), 3.0);
}

TEST(Smoothing, MonotoneInAmplitude) {
  auto g = make_grid(0, 1, 101);
  auto tg = make_time_grid(0, 1, 200);
  double prev = INFINITY;
  for (double amp : {1.0, 0.1, 0.01}) {
    const double c2 = smoothing_monitor(tent(g, amp), 0.1, tg).c2_at_Tstar;
    EXPECT_LT(c2, prev) << amp;
    prev = c2;
  }
}

TEST(Smoothing, NormsDecayAfterT1) {
  auto g = make_grid(0, 1, 101);
  auto tg = make_time_grid(0, 1, 200);
  auto r = smoothing_monitor(tent(g, 1.0), 0.1, tg);
  const auto k1 = static_cast<std::size_t>(std::llround(r.t1 / tg.dt));
  EXPECT_LT(r.h2_history.back(), r.h2_history[k1]);
  EXPECT_LT(r.h1_history.back(), r.h1_history.front());
}
