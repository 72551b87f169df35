#pragma once

// Penalized HUM null control for u_t - u_xx + a(t,x) u_x = v 1_(a,b) on an
// interval with homogeneous Dirichlet ends, discretized by backward Euler.
// The control minimizes
//   J(v) = 1/2 |v|^2 + 1/(2 eps) |u(T)|^2
// (discrete L2 norms weighted by dt dx and dx) and is found by conjugate
// gradients on the normal equations, using the exact discrete adjoint.

#include <cmath>
#include <vector>

#include "burgers/errors.hpp"
#include "burgers/filter.hpp"
#include "burgers/grid.hpp"

namespace burgers {

struct HumProblem {
  Grid1D grid;          // the extended interval, Dirichlet zero at both ends
  TimeGrid tgrid;
  double a = 0.0;       // control window
  double b = 0.0;
  SpaceTimeField advection; // on grid x tgrid; empty means zero
  std::vector<double> u0;
  double epsilon = 1e-8;
  double epsilon_start = 1e-4; // one continuation step from here (<= epsilon disables)
  double cg_tol = 1e-12;
  int cg_max_iter = 2000;
  std::vector<double> warm_start; // optional initial control, length m * window size
};

struct HumResult {
  std::vector<std::size_t> window;   // grid indices of the control nodes
  std::vector<double> v;             // m x window, row k-1 is the control at t_k
  SpaceTimeField u;
  SpaceTimeField control;            // v on the window grid; frame 0 repeats frame 1
  int iterations = 0;
  double terminal_l2 = 0.0;
  double free_terminal_l2 = 0.0;
  double cost = 0.0;                 // J at the optimum
  double control_l2 = 0.0;
  double epsilon = 0.0;
  double residual = 0.0;             // final |r| / |b|
  double duality_defect = 0.0;       // relative defect of |v|^2 + |u(T)|^2/eps = <u_free(T), u(T)>/eps
  std::vector<double> objective_history;
  std::vector<double> residual_history;
};

/// Backward-Euler state and adjoint solves for a fixed HumProblem.
class HumOperator {
public:
  explicit HumOperator(const HumProblem& p) : p_(p) {
    const Grid1D& g = p.grid;
    if (!(p.a < p.b)) throw ConfigError("control window must satisfy a < b");
    if (p.u0.size() != g.n) throw ConfigError("HUM initial datum has the wrong length");
    if (!(p.epsilon > 0.0)) throw ConfigError("HUM penalty must be positive");
    for (std::size_t i = 1; i + 1 < g.n; ++i)
      if (g.x(i) > p.a && g.x(i) < p.b) window_.push_back(i);
    if (window_.empty()) throw ConfigError("control window contains no grid node");
    const std::size_t m = p.tgrid.m, ni = g.n - 2;
    lo_.assign(m * ni, 0.0);
    di_.assign(m * ni, 0.0);
    up_.assign(m * ni, 0.0);
    const double dt = p.tgrid.dt, dx = g.dx;
    const bool adv = p.advection.frames() > 0;
    if (adv && (!(p.advection.grid() == g) || p.advection.frames() != m + 1))
      throw ConfigError("HUM advection field does not match the grids");
    for (std::size_t k = 1; k <= m; ++k)
      for (std::size_t j = 0; j < ni; ++j) {
        const double av = adv ? p.advection(k, j + 1) : 0.0;
        const std::size_t q = (k - 1) * ni + j;
        lo_[q] = -dt / (dx * dx) - dt * av / (2.0 * dx);
        di_[q] = 1.0 + 2.0 * dt / (dx * dx);
        up_[q] = -dt / (dx * dx) + dt * av / (2.0 * dx);
      }
  }

  const std::vector<std::size_t>& window() const { return window_; }
  std::size_t control_size() const { return p_.tgrid.m * window_.size(); }

  /// Terminal state from initial datum `init` under control v; frames stored if `traj`.
  std::vector<double> forward(const std::vector<double>& init, const std::vector<double>& v,
                              SpaceTimeField* traj = nullptr) const {
    const Grid1D& g = p_.grid;
    const std::size_t m = p_.tgrid.m, ni = g.n - 2, nw = window_.size();
    const double dt = p_.tgrid.dt;
    std::vector<double> u = init;
    u.front() = 0.0;
    u.back() = 0.0;
    if (traj) traj->set_frame(0, u);
    std::vector<double> d(ni);
    for (std::size_t k = 1; k <= m; ++k) {
      for (std::size_t j = 0; j < ni; ++j) d[j] = u[j + 1];
      if (!v.empty())
        for (std::size_t w = 0; w < nw; ++w) d[window_[w] - 1] += dt * v[(k - 1) * nw + w];
      solve(k, false, d);
      for (std::size_t j = 0; j < ni; ++j) u[j + 1] = d[j];
      if (traj) traj->set_frame(k, u);
    }
    return u;
  }

  /// Returns B^T psi^k for k = 1..m where psi^m = A_m^{-T} phi, psi^k = A_k^{-T} psi^{k+1}.
  std::vector<double> adjoint(const std::vector<double>& phi) const {
    const Grid1D& g = p_.grid;
    const std::size_t m = p_.tgrid.m, ni = g.n - 2, nw = window_.size();
    std::vector<double> out(m * nw);
    std::vector<double> d(ni);
    for (std::size_t j = 0; j < ni; ++j) d[j] = phi[j + 1];
    for (std::size_t k = m; k >= 1; --k) {
      solve(k, true, d);
      for (std::size_t w = 0; w < nw; ++w) out[(k - 1) * nw + w] = d[window_[w] - 1];
    }
    return out;
  }

  /// H v = v + (1/eps) B^T psi[S v].
  std::vector<double> hessian(const std::vector<double>& v, double eps) const {
    std::vector<double> zero(p_.grid.n, 0.0);
    auto uT = forward(zero, v);
    auto bt = adjoint(uT);
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] + bt[i] / eps;
    return out;
  }

  double control_norm2(const std::vector<double>& v) const {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s * p_.tgrid.dt * p_.grid.dx;
  }

  double state_norm2(const std::vector<double>& u) const {
    double s = 0.0;
    for (double x : u) s += x * x;
    return s * p_.grid.dx;
  }

  double objective(const std::vector<double>& v, double eps) const {
    const auto uT = forward(p_.u0, v);
    return 0.5 * control_norm2(v) + 0.5 / eps * state_norm2(uT);
  }

  /// Gradient of J in the dt dx weighted inner product.
  std::vector<double> gradient(const std::vector<double>& v, double eps) const {
    const auto uT = forward(p_.u0, v);
    auto bt = adjoint(uT);
    for (std::size_t i = 0; i < v.size(); ++i) bt[i] = v[i] + bt[i] / eps;
    return bt;
  }

private:
  void solve(std::size_t k, bool transpose, std::vector<double>& d) const {
    const std::size_t ni = p_.grid.n - 2;
    const double* lo = lo_.data() + (k - 1) * ni;
    const double* di = di_.data() + (k - 1) * ni;
    const double* up = up_.data() + (k - 1) * ni;
    a_.resize(ni);
    c_.resize(ni);
    if (!transpose) {
      for (std::size_t j = 0; j < ni; ++j) {
        a_[j] = lo[j];
        c_[j] = up[j];
      }
    } else {
      for (std::size_t j = 0; j < ni; ++j) {
        a_[j] = j > 0 ? up[j - 1] : 0.0;
        c_[j] = j + 1 < ni ? lo[j + 1] : 0.0;
      }
    }
    thomas_solve(a_, std::span<const double>(di, ni), c_, d, scratch_);
  }

  const HumProblem& p_;
  std::vector<std::size_t> window_;
  std::vector<double> lo_, di_, up_;
  mutable std::vector<double> a_, c_, scratch_;
};

namespace detail {

inline double wdot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// CG for H v = rhs from v (in place). Returns iterations used.
inline int hum_cg(const HumOperator& op, double eps, const std::vector<double>& rhs, std::vector<double>& v,
                  double tol, int max_iter, double c0, double w, HumResult& rep) {
  auto Hv = op.hessian(v, eps);
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = rhs[i] - Hv[i];
  const double bnorm = std::sqrt(wdot(rhs, rhs));
  if (bnorm == 0.0) {
    std::fill(v.begin(), v.end(), 0.0);
    rep.residual = 0.0;
    return 0;
  }
  auto record = [&](const std::vector<double>& rr) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * (rhs[i] + rr[i]);
    rep.objective_history.push_back(c0 - 0.5 * w * s);
    rep.residual_history.push_back(std::sqrt(wdot(rr, rr)) / bnorm);
  };
  record(r);
  std::vector<double> d = r;
  double rr = wdot(r, r);
  int it = 0;
  while (it < max_iter && std::sqrt(rr) > tol * bnorm) {
    const auto Hd = op.hessian(d, eps);
    const double dHd = wdot(d, Hd);
    if (!(dHd > 0.0)) break;
    const double alpha = rr / dHd;
    for (std::size_t i = 0; i < v.size(); ++i) {
      v[i] += alpha * d[i];
      r[i] -= alpha * Hd[i];
    }
    const double rr_new = wdot(r, r);
    const double beta = rr_new / rr;
    rr = rr_new;
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = r[i] + beta * d[i];
    ++it;
    record(r);
  }
  rep.residual = std::sqrt(rr) / bnorm;
  return it;
}

} // namespace detail

inline HumResult hum_null_control(const HumProblem& p) {
  HumOperator op(p);
  HumResult res;
  res.window = op.window();
  const std::size_t nv = op.control_size();
  const double w = p.tgrid.dt * p.grid.dx;
  std::vector<double> zero(p.grid.n, 0.0);
  const auto u_free = op.forward(p.u0, {});
  res.free_terminal_l2 = std::sqrt(op.state_norm2(u_free));
  const auto bt_free = op.adjoint(u_free);

  std::vector<double> v = p.warm_start.size() == nv ? p.warm_start : std::vector<double>(nv, 0.0);
  std::vector<double> eps_list;
  if (p.epsilon_start > p.epsilon && p.warm_start.size() != nv) eps_list.push_back(p.epsilon_start);
  eps_list.push_back(p.epsilon);
  for (double eps : eps_list) {
    std::vector<double> rhs(nv);
    for (std::size_t i = 0; i < nv; ++i) rhs[i] = -bt_free[i] / eps;
    const double c0 = 0.5 / eps * op.state_norm2(u_free);
    res.objective_history.clear();
    res.residual_history.clear();
    res.iterations += detail::hum_cg(op, eps, rhs, v, p.cg_tol, p.cg_max_iter, c0, w, res);
  }
  if (res.residual > p.cg_tol)
    throw ConvergenceError("HUM conjugate gradient did not reach its tolerance", res.residual_history);

  res.epsilon = p.epsilon;
  res.v = v;
  res.u = SpaceTimeField(p.tgrid, p.grid);
  const auto uT = op.forward(p.u0, v, &res.u);
  res.terminal_l2 = std::sqrt(op.state_norm2(uT));
  res.control_l2 = std::sqrt(op.control_norm2(v));
  res.cost = 0.5 * op.control_norm2(v) + 0.5 / p.epsilon * op.state_norm2(uT);
  double cross = 0.0;
  for (std::size_t i = 0; i < uT.size(); ++i) cross += u_free[i] * uT[i];
  cross *= p.grid.dx / p.epsilon;
  const double lhs = op.control_norm2(v) + op.state_norm2(uT) / p.epsilon;
  res.duality_defect = std::abs(lhs - cross) / std::max(std::abs(cross), 1e-300);

  const std::size_t nw = res.window.size();
  const Grid1D wg{p.grid.x(res.window.front()), p.grid.x(res.window.back()), nw, p.grid.dx};
  res.control = SpaceTimeField(p.tgrid, wg);
  for (std::size_t k = 1; k <= p.tgrid.m; ++k)
    for (std::size_t j = 0; j < nw; ++j) res.control(k, j) = v[(k - 1) * nw + j];
  for (std::size_t j = 0; j < nw; ++j) res.control(0, j) = res.control(1, j);
  return res;
}

} // namespace burgers
