#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "burgers/fit.hpp"
#include "burgers/local_exact.hpp"
#include "burgers/viscous.hpp"

using namespace burgers;
constexpr double pi = std::numbers::pi;

TEST(LocalExact, OnTrajectoryNeedsNoCorrection) {
  auto g = make_grid(0, 1, 41);
  auto tg = make_time_grid(0, 0.5, 20);
  auto r = local_exact_to_constant(Field(g, 0.3), ConstantTrajectory::constant(0.3), 0.1, tg);
  EXPECT_EQ(r.outer_iterations, 1);
  for (std::size_t k = 0; k <= tg.m; ++k) {
    EXPECT_EQ(r.h_l[k], 0.0);
    EXPECT_EQ(r.h_r[k], 0.0);
    EXPECT_EQ(r.controls.v_l[k], 0.3);
    EXPECT_EQ(r.controls.p[k], 0.0);
  }
  EXPECT_EQ(r.terminal_sup, 0.0);
}

static Field near_constant(const Grid1D& g, double N, double amp) {
  return Field::sample(g, [&](double x) { return N + amp * std::sin(pi * x); });
}

TEST(LocalExact, ReachesTheConstant) {
  auto g = make_grid(0, 1, 201);
  auto tg = make_time_grid(0, 0.5, 100);
  auto r = local_exact_to_constant(near_constant(g, 0.3, 0.01), ConstantTrajectory::constant(0.3), 0.1, tg);
  EXPECT_LE(r.terminal_sup, 10 * (g.dx + tg.dt));
  EXPECT_LE(r.gaps.back(), 1e-9);
  EXPECT_FALSE(r.smallness_warning);
  // replaying the controls through the viscous solver lands on the constant as well
  auto run = simulate_viscous(near_constant(g, 0.3, 0.01), r.controls, 0.1);
  double worst = 0;
  for (std::size_t i = 0; i < g.n; ++i) worst = std::max(worst, std::abs(run.y(tg.m, i) - 0.3));
  EXPECT_LE(worst, 10 * (g.dx + tg.dt));
}

TEST(LocalExact, ControlsUniformInAlpha) {
  auto g = make_grid(0, 1, 101);
  auto tg = make_time_grid(0, 0.5, 50);
  std::vector<double> size;
  for (double alpha : {0.05, 0.5, 5.0}) {
    auto r = local_exact_to_constant(near_constant(g, 0.3, 0.02), ConstantTrajectory::constant(0.3), alpha, tg);
    size.push_back(std::max(sup_abs(r.h_l), sup_abs(r.h_r)));
  }
  EXPECT_GT(size.front(), 0.0);
  EXPECT_LE(spread(size), 2.0);
}

TEST(LocalExact, StateIsFilteredConsistently) {
  auto g = make_grid(0, 1, 61);
  auto tg = make_time_grid(0, 0.5, 30);
  auto r = local_exact_to_constant(near_constant(g, -0.2, 0.02), ConstantTrajectory::constant(-0.2), 0.3, tg);
  for (std::size_t k = 0; k <= tg.m; ++k) {
    auto z = solve_filter(r.y.field(k), r.y(k, 0), r.y(k, g.n - 1), 0.3);
    for (std::size_t i = 0; i < g.n; ++i) EXPECT_NEAR(r.z(k, i), z[i], 1e-12);
    EXPECT_EQ(r.controls.v_l[k], r.y(k, 0));
    EXPECT_EQ(r.controls.v_r[k], r.y(k, g.n - 1));
  }
}

TEST(LocalExact, SmallnessWarning) {
  auto g = make_grid(0, 1, 41);
  auto tg = make_time_grid(0, 0.5, 20);
  LocalExactOptions opt;
  opt.delta_hat_v = 1e-3;
  auto r = local_exact_to_constant(near_constant(g, 0.0, 0.01), ConstantTrajectory::constant(0.0), 0.1, tg, opt);
  EXPECT_TRUE(r.smallness_warning);
}

TEST(LocalExact, NegativeAlphaRejected) {
  auto g = make_grid(0, 1, 21);
  EXPECT_THROW(local_exact_to_constant(Field(g), ConstantTrajectory::constant(0), -1, make_time_grid(0, 1, 10)),
               ConfigError);
}
