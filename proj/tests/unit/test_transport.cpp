#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "burgers/fit.hpp"
#include "burgers/transport.hpp"

using namespace burgers;
constexpr double pi = std::numbers::pi;

// y = sin(2(x - t)) + t^2/2 solves y_t + y_x = t; inflow from the exact solution
static double exact(double t, double x) { return std::sin(2 * (x - t)) + 0.5 * t * t; }

static LinearTransportProblem manufactured() {
  LinearTransportProblem pb;
  pb.velocity = [](double, double) { return 1.0; };
  pb.source = [](double t, double) { return t; };
  pb.inflow_left = [](double t) { return exact(t, 0.0); };
  pb.inflow_right = [](double t) { return exact(t, 1.0); };
  return pb;
}

static double manufactured_error(std::size_t n) {
  auto g = make_grid(0, 1, n);
  auto tg = make_time_grid(0, 0.8, (n - 1) / 2);
  auto y = solve_linear_transport(Field::sample(g, [](double x) { return exact(0, x); }), manufactured(), tg);
  double e = 0;
  for (std::size_t i = 0; i < n; ++i) e = std::max(e, std::abs(y(tg.m, i) - exact(0.8, g.x(i))));
  return e;
}

TEST(Transport, ManufacturedConvergence) {
  std::vector<double> h, e;
  for (std::size_t n : {41, 81, 161}) {
    h.push_back(1.0 / static_cast<double>(n - 1));
    e.push_back(manufactured_error(n));
  }
  EXPECT_LE(e.back(), 1e-3);
  EXPECT_GE(fit_loglog(h, e).slope, 0.9);
}

TEST(Transport, ConstantsAreTransported) {
  auto g = make_grid(0, 1, 51);
  auto tg = make_time_grid(0, 1, 40);
  LinearTransportProblem pb;
  pb.velocity = [](double t, double x) { return std::sin(5 * x) + t; };
  pb.source = [](double, double) { return 0.0; };
  pb.inflow_left = [](double) { return 2.5; };
  pb.inflow_right = [](double) { return 2.5; };
  auto y = solve_linear_transport(Field(g, 2.5), pb, tg);
  for (double v : y.data()) EXPECT_NEAR(v, 2.5, 1e-13);
}

TEST(Transport, SupNonExpansionWithoutSource) {
  auto g = make_grid(0, 1, 101);
  auto tg = make_time_grid(0, 1, 80);
  LinearTransportProblem pb;
  pb.velocity = [](double t, double x) { return 0.5 + 0.3 * std::cos(2 * pi * (x + t)); };
  pb.source = [](double, double) { return 0.0; };
  pb.inflow_left = [](double) { return 0.0; };
  pb.inflow_right = [](double) { return 0.0; };
  auto y0 = Field::sample(g, [](double x) { return std::exp(-60 * (x - 0.4) * (x - 0.4)); });
  auto y = solve_linear_transport(y0, pb, tg);
  const double s0 = sup_abs(y0.view());
  for (std::size_t k = 0; k <= tg.m; ++k) EXPECT_LE(sup_abs(y.frame(k)), s0 + 1e-3) << k;
}

TEST(Transport, SupGrowthBoundedBySource) {
  auto g = make_grid(0, 1, 201);
  auto tg = make_time_grid(0, 1, 100);
  LinearTransportProblem pb;
  pb.velocity = [](double, double x) { return 0.4 + 0.2 * x; };
  pb.source = [](double t, double x) { return std::cos(3 * t) * std::sin(pi * x); };
  pb.inflow_left = [](double) { return 0.0; };
  pb.inflow_right = [](double) { return 0.0; };
  auto y = solve_linear_transport(Field::sample(g, [](double x) { return std::sin(pi * x); }), pb, tg);
  const double slack = 5 * (g.dx + tg.dt);
  for (std::size_t k = 0; k < tg.m; ++k) {
    const double t = tg.t(k);
    const double rate = (sup_abs(y.frame(k + 1)) - sup_abs(y.frame(k))) / tg.dt;
    const double g_sup = std::max(std::abs(std::cos(3 * t)), std::abs(std::cos(3 * (t + tg.dt))));
    EXPECT_LE(rate, g_sup + slack) << "t=" << t;
  }
}

TEST(Replay, ConstantStateUnderConstantControls) {
  auto g = make_grid(0, 1, 41);
  auto c = ControlTriple::constant(make_time_grid(0, 1, 30), 0.0, 0.7, 0.7);
  auto y = replay_inviscid(Field(g, 0.7), c, 0.3);
  for (double v : y.data()) EXPECT_NEAR(v, 0.7, 1e-13);
}

TEST(Replay, SpatiallyConstantStateFollowsP) {
  // y = m(t) with m' = p and traces m(t) is an exact solution
  auto g = make_grid(0, 1, 41);
  auto tg = make_time_grid(0, 1, 50);
  auto c = ControlTriple::zeros(tg);
  for (std::size_t k = 0; k <= tg.m; ++k) {
    const double t = tg.t(k);
    c.p[k] = 1 - 2 * t;
    c.v_l[k] = c.v_r[k] = t - t * t;
  }
  auto y = replay_inviscid(Field(g, 0.0), c, 0.1);
  for (std::size_t i = 0; i < g.n; ++i) EXPECT_NEAR(y(tg.m, i), 0.0, 1e-12);
  for (std::size_t i = 0; i < g.n; ++i) EXPECT_NEAR(y(25, i), 0.25, 1e-12);
}
