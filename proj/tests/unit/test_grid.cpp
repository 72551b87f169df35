#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "burgers/csv.hpp"
#include "burgers/grid.hpp"

using namespace burgers;
constexpr double pi = std::numbers::pi;

TEST(Grid, UnitIntervalEleven) {
  auto g = make_grid(0, 1, 11);
  EXPECT_DOUBLE_EQ(g.dx, 0.1);
  EXPECT_DOUBLE_EQ(g.x(5), 0.5);
  EXPECT_DOUBLE_EQ(g.x(10), 1.0);
}

TEST(Grid, ShiftedInterval) {
  auto g = make_grid(-0.25, 1.25, 7);
  EXPECT_DOUBLE_EQ(g.dx, 0.25);
  EXPECT_DOUBLE_EQ(g.length(), 1.5);
}

TEST(Grid, Preconditions) {
  EXPECT_THROW(make_grid(0, 1, 2), ConfigError);
  EXPECT_THROW(make_grid(1, 0, 11), ConfigError);
  EXPECT_THROW(make_grid(0, 0, 11), ConfigError);
  EXPECT_THROW(make_time_grid(1, 1, 4), ConfigError);
  EXPECT_THROW(make_time_grid(0, 1, 0), ConfigError);
}

TEST(Grid, TimeGridEndIsExact) {
  auto tg = make_time_grid(0.1, 0.7, 3);
  EXPECT_DOUBLE_EQ(tg.dt, 0.2);
  EXPECT_EQ(tg.t(3), 0.7);
}

TEST(Field, InvariantsEnforced) {
  auto g = make_grid(0, 1, 5);
  EXPECT_THROW(Field(g, std::vector<double>(4)), ConfigError);
  EXPECT_THROW(Field(g, std::vector<double>{0, 1, NAN, 0, 0}), SolverError);
  SpaceTimeField F(make_time_grid(0, 1, 3), g);
  EXPECT_EQ(F.frames(), 4u);
  EXPECT_THROW(F.set_frame(0, std::vector<double>(3)), ConfigError);
}

TEST(Stencils, AffineExactEverywhere) {
  auto g = make_grid(-0.3, 0.9, 17);
  auto f = Field::sample(g, [](double x) { return 1.5 - 2.25 * x; });
  auto d1 = diff1(f), d2 = diff2(f);
  for (std::size_t i = 0; i < g.n; ++i) {
    EXPECT_NEAR(d1[i], -2.25, 1e-12);
    EXPECT_NEAR(d2[i], 0.0, 1e-10);
  }
}

TEST(Stencils, QuadraticSecondDifferenceIsTwo) {
  auto g = make_grid(0, 1, 11);
  auto d2 = diff2(Field::sample(g, [](double x) { return x * x; }));
  for (std::size_t i = 0; i < g.n; ++i) EXPECT_NEAR(d2[i], 2.0, 1e-10);
  auto d1 = diff1(Field::sample(g, [](double x) { return x * x; }));
  for (std::size_t i = 0; i < g.n; ++i) EXPECT_NEAR(d1[i], 2 * g.x(i), 1e-12);
}

static double sine_d2_error(std::size_t n) {
  auto g = make_grid(0, 1, n);
  auto d2 = diff2(Field::sample(g, [](double x) { return std::sin(pi * x); }));
  double e = 0;
  for (std::size_t i = 0; i < n; ++i) e = std::max(e, std::abs(d2[i] + pi * pi * std::sin(pi * g.x(i))));
  return e;
}

TEST(Stencils, SineSecondDifference) { EXPECT_LE(sine_d2_error(101), 0.01); }

TEST(Stencils, SecondOrderUnderHalving) {
  for (std::size_t n : {41, 81, 161}) {
    const double r = sine_d2_error(n) / sine_d2_error(2 * n - 1);
    EXPECT_NEAR(r, 4.0, 0.8) << "n=" << n;
  }
}

TEST(Norms, Constant) {
  auto r = norms(Field(make_grid(0, 1, 33), 3.0));
  EXPECT_DOUBLE_EQ(r.c0, 3.0);
  EXPECT_NEAR(r.l2, 3.0, 1e-14);
  EXPECT_NEAR(r.h1, 3.0, 1e-12);
}

TEST(Norms, SineL2) {
  auto g = make_grid(0, 1, 201);
  EXPECT_NEAR(norms(Field::sample(g, [](double x) { return std::sin(pi * x); })).l2, 1 / std::sqrt(2.0), 0.01);
}

TEST(Norms, Zero) {
  auto r = norms(Field(make_grid(0, 1, 9)));
  for (double v : {r.c0, r.c1, r.c2, r.l2, r.h1, r.h2}) EXPECT_EQ(v, 0.0);
}

TEST(Norms, OrderingOnRandomFields) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int trial = 0; trial < 50; ++trial) {
    auto g = make_grid(0, 0.5 + 0.1 * trial, 5 + trial);
    auto f = Field::sample(g, [&](double) { return u(rng); });
    auto r = norms(f);
    EXPECT_LE(r.c0, r.c1);
    EXPECT_LE(r.c1, r.c2);
    EXPECT_GE(r.h1, r.l2);
    EXPECT_GE(r.h2, r.h1);
    EXPECT_LE(r.l2, std::sqrt(g.length()) * r.c0 + 1e-12);
  }
}

TEST(Norms, TrajectorySupAndL2) {
  auto g = make_grid(0, 1, 11);
  auto tg = make_time_grid(0, 2, 4);
  SpaceTimeField F(tg, g);
  for (std::size_t k = 0; k < F.frames(); ++k)
    for (auto& v : F.frame(k)) v = 1.0;
  EXPECT_NEAR(trajectory_norm(F, SpaceNorm::c0, TimeNorm::sup), 1.0, 1e-15);
  EXPECT_NEAR(trajectory_norm(F, SpaceNorm::l2, TimeNorm::l2), std::sqrt(2.0), 1e-13);
}

TEST(Interp, CubicExactOnCubics) {
  auto g = make_grid(0, 1, 12);
  auto f = Field::sample(g, [](double x) { return 1 - x + 3 * x * x - 2 * x * x * x; });
  for (double x : {0.0, 0.013, 0.5, 0.77, 0.999, 1.0})
    EXPECT_NEAR(interp_cubic(f.view(), g, x), 1 - x + 3 * x * x - 2 * x * x * x, 1e-13);
}

TEST(Csv, RoundTripsShortestDecimals) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-17, 6.02214076e23}) EXPECT_EQ(std::stod(fmt_double(v)), v);
  auto g = make_grid(0, 1, 5);
  auto f = Field::sample(g, [](double x) { return x / 3; });
  const auto s = field_csv(f);
  EXPECT_EQ(s.substr(0, 8), "x,value\n");
  auto path = std::filesystem::temp_directory_path() / "burgers_grid_roundtrip.csv";
  std::ofstream(path) << s;
  const auto rows = read_xy_csv(path.string());
  ASSERT_EQ(rows.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(rows[i].first, g.x(i));
    EXPECT_EQ(rows[i].second, f[i]);
  }
  std::filesystem::remove(path);
}

TEST(Csv, TrajectoryHeaderAndOrder) {
  auto g = make_grid(0, 1, 3);
  SpaceTimeField F(make_time_grid(0, 1, 2), g);
  F(1, 2) = 7;
  const auto s = trajectory_csv(F);
  EXPECT_EQ(s.substr(0, 10), "t,x,value\n");
  EXPECT_NE(s.find("0.5,1,7\n"), std::string::npos);
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 10);
}
