#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "burgers/hum.hpp"

using namespace burgers;
constexpr double pi = std::numbers::pi;

static HumProblem problem(std::size_t n, std::size_t m, double T, bool advect) {
  HumProblem p;
  p.grid = make_grid(0, 1, n);
  p.tgrid = make_time_grid(0, T, m);
  p.a = 0.3;
  p.b = 0.7;
  if (advect) {
    p.advection = SpaceTimeField(p.tgrid, p.grid);
    for (std::size_t k = 0; k <= m; ++k)
      for (std::size_t i = 0; i < n; ++i) p.advection(k, i) = 0.5 + 0.3 * std::sin(2 * pi * p.grid.x(i) + p.tgrid.t(k));
  }
  p.u0.resize(n);
  for (std::size_t i = 0; i < n; ++i) p.u0[i] = std::sin(pi * p.grid.x(i)) + 0.3 * std::sin(3 * pi * p.grid.x(i));
  return p;
}

TEST(Hum, ZeroDataNeedsNoControl) {
  auto p = problem(41, 20, 1, true);
  std::fill(p.u0.begin(), p.u0.end(), 0.0);
  auto r = hum_null_control(p);
  EXPECT_EQ(r.iterations, 0);
  EXPECT_EQ(r.control_l2, 0.0);
  EXPECT_EQ(r.terminal_l2, 0.0);
}

TEST(Hum, AdjointIsTheTranspose) {
  auto p = problem(41, 20, 0.5, true);
  HumOperator op(p);
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> v(op.control_size()), phi(p.grid.n, 0.0);
  for (auto& x : v) x = u(rng);
  for (std::size_t i = 1; i + 1 < p.grid.n; ++i) phi[i] = u(rng);
  const auto uT = op.forward(std::vector<double>(p.grid.n, 0.0), v);
  const auto bt = op.adjoint(phi);
  double lhs = 0, rhs = 0;
  for (std::size_t i = 0; i < uT.size(); ++i) lhs += uT[i] * phi[i] * p.grid.dx;
  for (std::size_t i = 0; i < v.size(); ++i) rhs += v[i] * bt[i] * p.tgrid.dt * p.grid.dx;
  EXPECT_NEAR(lhs, rhs, 1e-12 * std::abs(lhs));
}

TEST(Hum, GradientMatchesFiniteDifferences) {
  auto p = problem(41, 20, 0.5, true);
  HumOperator op(p);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> v(op.control_size());
  for (auto& x : v) x = u(rng);
  const double w = p.tgrid.dt * p.grid.dx;
  for (double eps : {1e-2, 1e-8}) {
    const auto grad = op.gradient(v, eps);
    for (int dir = 0; dir < 10; ++dir) {
      std::vector<double> d(v.size()), vp = v, vm = v;
      for (auto& x : d) x = u(rng);
      const double h = 1e-3;
      for (std::size_t i = 0; i < v.size(); ++i) {
        vp[i] += h * d[i];
        vm[i] -= h * d[i];
      }
      const double fd = (op.objective(vp, eps) - op.objective(vm, eps)) / (2 * h);
      double an = 0;
      for (std::size_t i = 0; i < v.size(); ++i) an += w * grad[i] * d[i];
      EXPECT_NEAR(fd, an, 1e-5 * std::abs(an)) << eps << " " << dir;
    }
  }
}

TEST(Hum, MatchesDenseOptimum) {
  auto p = problem(60, 30, 0.5, true);
  HumOperator op(p);
  const std::size_t nv = op.control_size(), ni = p.grid.n - 2;
  const double w = p.tgrid.dt * p.grid.dx, dx = p.grid.dx, eps = p.epsilon;
  Eigen::MatrixXd G(ni, nv);
  std::vector<double> zero(p.grid.n, 0.0), e(nv, 0.0);
  for (std::size_t j = 0; j < nv; ++j) {
    e[j] = 1;
    const auto col = op.forward(zero, e);
    for (std::size_t i = 0; i < ni; ++i) G(i, j) = col[i + 1];
    e[j] = 0;
  }
  const auto free = op.forward(p.u0, {});
  Eigen::VectorXd f(ni);
  for (std::size_t i = 0; i < ni; ++i) f(i) = free[i + 1];
  // argmin w|v|^2/2 + dx|f + G v|^2/(2 eps) through the SVD of G
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(G, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd s = svd.singularValues();
  Eigen::VectorXd c = svd.matrixU().transpose() * f;
  for (Eigen::Index k = 0; k < s.size(); ++k) c(k) *= -(dx / eps) * s(k) / (w + dx / eps * s(k) * s(k));
  const Eigen::VectorXd v = svd.matrixV() * c;

  auto r = hum_null_control(p);
  double diff = 0;
  for (std::size_t j = 0; j < nv; ++j) diff += (r.v[j] - v(static_cast<Eigen::Index>(j))) * (r.v[j] - v(static_cast<Eigen::Index>(j)));
  EXPECT_LE(std::sqrt(diff * w), 1e-6 * std::max(1.0, r.control_l2));
}

TEST(Hum, DrivesStateToZero) {
  auto p = problem(201, 200, 1, false);
  auto r = hum_null_control(p);
  double u0 = 0;
  for (double x : p.u0) u0 += x * x * p.grid.dx;
  EXPECT_LE(r.terminal_l2, 1e-4 * std::sqrt(u0));
  EXPECT_LT(r.terminal_l2, r.free_terminal_l2);
  EXPECT_LE(r.duality_defect, 1e-6);
  EXPECT_LE(r.residual, p.cg_tol);
  // history is c0 minus a small term; compare up to the round-off of c0
  const double c0 = 0.5 / p.epsilon * r.free_terminal_l2 * r.free_terminal_l2;
  ASSERT_GT(r.objective_history.size(), 10u);
  for (std::size_t j = 1; j < r.objective_history.size(); ++j)
    EXPECT_LE(r.objective_history[j], r.objective_history[j - 1] + 1e-13 * c0) << j;
  EXPECT_LT(r.objective_history.back(), 1e-2 * r.objective_history.front());
  EXPECT_NEAR(r.cost, r.objective_history.back(), 1e-6 * r.cost);
}

TEST(Hum, ControlLivesInTheWindow) {
  auto p = problem(51, 20, 0.5, false);
  auto r = hum_null_control(p);
  for (std::size_t i : r.window) {
    EXPECT_GT(p.grid.x(i), p.a);
    EXPECT_LT(p.grid.x(i), p.b);
  }
  EXPECT_EQ(r.control.grid().n, r.window.size());
  EXPECT_EQ(r.v.size(), p.tgrid.m * r.window.size());
}

TEST(Hum, BadProblemsRejected) {
  auto p = problem(21, 10, 1, false);
  p.a = 0.5;
  p.b = 0.5;
  EXPECT_THROW(HumOperator{p}, ConfigError);
  p = problem(21, 10, 1, false);
  p.epsilon = 0;
  EXPECT_THROW(HumOperator{p}, ConfigError);
  p = problem(21, 10, 1, false);
  p.u0.pop_back();
  EXPECT_THROW(HumOperator{p}, ConfigError);
}
