#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "burgers/pipeline.hpp"

using namespace burgers;
constexpr double pi = std::numbers::pi;

static PipelineOptions fixed_options(std::size_t m) {
  PipelineOptions o;
  o.m = m;
  o.delta_hat2 = 5.2;
  o.delta_hat_v = 1.0;
  return o;
}

static Field wave(const Grid1D& g) {
  return Field::sample(g, [](double x) { return std::sin(2 * pi * x); });
}

TEST(Pipeline, TrivialWhenAlreadyThere) {
  auto g = make_grid(0, 1, 41);
  auto r = global_viscous_control(Field(g, 0.3), 0.3, 1.0, 0.1, fixed_options(40));
  EXPECT_TRUE(r.trivial);
  ASSERT_EQ(r.stages.size(), 3u);
  for (const auto& s : r.stages) {
    EXPECT_EQ(s.controls.p_sup(), 0.0);
    EXPECT_EQ(s.controls.v_l[0], 0.3);
  }
  EXPECT_EQ(r.terminal_sup, 0.0);
}

TEST(Pipeline, ReachesTheConstant) {
  auto g = make_grid(0, 1, 101);
  auto r = global_viscous_control(wave(g), 0.3, 1.0, 0.1, fixed_options(200));
  EXPECT_FALSE(r.trivial);
  EXPECT_LE(r.terminal_sup, r.tolerance);
  EXPECT_LE(r.replay_terminal_sup, r.tolerance);
  EXPECT_TRUE(r.monitors_ok);
  EXPECT_LT(r.plan.T_star, r.plan.free_end());
  EXPECT_LE(r.approx_terminal_h1, r.delta_hat_v);
  EXPECT_NEAR(r.tolerance, 20 * (g.dx + 0.5 / 100), 1e-15);
  EXPECT_GT(r.v_l_h34, 0.0);
}

TEST(Pipeline, StagesJoinUp) {
  auto g = make_grid(0, 1, 61);
  auto r = global_viscous_control(wave(g), -0.2, 1.0, 0.5, fixed_options(100));
  ASSERT_EQ(r.stages.size(), 3u);
  EXPECT_NEAR(r.stages[0].y.tgrid().t1, r.plan.free_end(), 1e-12);
  EXPECT_NEAR(r.stages[1].y.tgrid().t0, r.plan.free_end(), 1e-12);
  EXPECT_NEAR(r.stages[2].y.tgrid().t1, 1.0, 1e-12);
  for (std::size_t s = 0; s + 1 < 3; ++s) {
    const auto& a = r.stages[s].y;
    const auto& b = r.stages[s + 1].y;
    for (std::size_t i = 0; i < g.n; ++i) EXPECT_NEAR(a(a.frames() - 1, i), b(0, i), 1e-10) << s;
  }
  // stage 3 starts with p = m' = 0 and the controls are the traces
  EXPECT_EQ(r.stages[2].controls.p_sup(), 0.0);
  const auto csv = r.controls_csv();
  EXPECT_EQ(csv.substr(0, 12), "t,p,v_l,v_r\n");
}

TEST(Pipeline, EmittedPIsIndependentOfAlpha) {
  auto g = make_grid(0, 1, 61);
  auto a = global_viscous_control(wave(g), 0.3, 1.0, 0.05, fixed_options(100));
  auto b = global_viscous_control(wave(g), 0.3, 1.0, 0.5, fixed_options(100));
  ASSERT_EQ(a.plan.tau, b.plan.tau);
  EXPECT_EQ(emitted_p(a), emitted_p(b));
}

TEST(Pipeline, NonzeroEndsAreTapered) {
  auto g = make_grid(0, 1, 61);
  auto y0 = Field::sample(g, [](double x) { return 0.2 + std::sin(2 * pi * x); });
  auto r = global_viscous_control(y0, 0.3, 1.0, 0.1, fixed_options(100));
  EXPECT_TRUE(r.tapered);
  EXPECT_LE(r.terminal_sup, r.tolerance);
}

TEST(Pipeline, PlanValidation) {
  StagePlan p;
  p.T = 1;
  p.tau = 0.05;
  p.T_star = 0.2;
  EXPECT_NO_THROW(p.validate());
  p.T_star = 0.46;
  EXPECT_THROW(p.validate(), ConfigError);
  p.T_star = 0.1;
  p.tau = 0.6;
  EXPECT_THROW(p.validate(), ConfigError);
  auto g = make_grid(0, 1, 21);
  EXPECT_THROW(global_viscous_control(Field(g), 0, 1, -1, fixed_options(40)), ConfigError);
  EXPECT_THROW(global_viscous_control(Field(g), 0, 1, 0.1, fixed_options(2)), ConfigError);
}

TEST(AlphaLimit, ZeroDataHasZeroDistances) {
  auto g = make_grid(0, 1, 41);
  auto t = alpha_limit_study(Field(g), ControlTriple::zeros(make_time_grid(0, 1, 40)), {0.1, 0.4});
  EXPECT_EQ(t.alphas.front(), 0.4);
  for (double d : t.distances) EXPECT_EQ(d, 0.0);
  EXPECT_FALSE(t.rate.has_value());
  EXPECT_FALSE(t.strictly_decreasing);
}

TEST(AlphaLimit, DistancesShrink) {
  auto g = make_grid(0, 1, 101);
  auto y0 = Field::sample(g, [](double x) { return std::sin(pi * x); });
  auto t = alpha_limit_study(y0, ControlTriple::zeros(make_time_grid(0, 1, 100)), {0.05, 0.4, 0.1, 0.2});
  EXPECT_TRUE(t.strictly_decreasing);
  ASSERT_TRUE(t.rate.has_value());
  EXPECT_GT(t.rate->slope, 0.0);
  EXPECT_EQ(t.csv().substr(0, 25), "alpha,alpha_ref,distance\n");
  EXPECT_THROW(alpha_limit_study(y0, ControlTriple::zeros(make_time_grid(0, 1, 10)), {}), ConfigError);
}

TEST(Uniformity, Report) {
  auto tg = make_time_grid(0, 1, 4);
  std::vector<UniformityRun> runs{UniformityRun::from(0.1, ControlTriple::constant(tg, 1, 2, 2), 0.01),
                                  UniformityRun::from(1.0, ControlTriple::constant(tg, 2, 2, 1), 0.02)};
  auto r = uniformity_report(runs);
  EXPECT_EQ(r.p_spread, 2.0);
  EXPECT_EQ(r.v_spread, 1.0);
  EXPECT_EQ(r.control_spread, 4.0 / 3.0);
  EXPECT_FALSE(r.flagged);
  EXPECT_EQ(r.csv().substr(0, 42), "alpha,p_sup,v_sup,trace_c1,terminal_error\n");
  auto one = uniformity_report({runs[0]});
  EXPECT_EQ(one.p_spread, 1.0);
  auto joined = UniformityRun::from(0.1, std::vector<ControlTriple>{ControlTriple::constant(tg, 1, 2, 2),
                                                                    ControlTriple::constant(tg, 3, 0, 0)}, 0);
  EXPECT_EQ(joined.p_sup, 3.0);
  EXPECT_EQ(joined.v_sup, 2.0);
}
