#pragma once

#include <optional>
#include <sstream>

#include "lower_level.hpp"

namespace mstat {

// Monotone C^1 penalty for the bound u >= u_a: affine below -1, quadratic
// blend on (-1, 0), zero above.
inline double pi_eval(double s) {
  if (s <= -1.0) return s + 0.5;
  if (s < 0.0) return -0.5 * s * s;
  return 0.0;
}

inline double pi_prime(double s) {
  if (s <= -1.0) return 1.0;
  if (s < 0.0) return -s;
  return 0.0;
}

// Residual of the regularized optimality system
// e_gamma(u) = S*(Su - y_d) + alpha (u - w) + gamma pi(u - u_a).
inline GridFunction reg_residual(const IocProblem &ioc, const GridFunction &u,
                                 const GridFunction &w, double gamma) {
  GridFunction r = xi_formula(ioc, u, w);
  for (int i = 0; i < r.size(); ++i) r[i] += gamma * pi_eval(u[i] - ioc.u_a[i]);
  return r;
}

namespace detail {

struct NewtonOutcome {
  GridFunction u;
  int iterations = 0;
};

// Damped semismooth Newton on e_gamma = 0.  The Jacobian A + gamma diag(pi')
// is symmetric positive definite since pi' >= 0, so each step is a stable
// dense solve; the step is halved until the residual norm decreases.
inline NewtonOutcome newton_regularized(const IocProblem &ioc, const GridFunction &w,
                                        double gamma, const GridFunction *u0) {
  validate_ioc(ioc);
  require_same_grid(ioc.grid, w.grid, "solve_regularized w");
  if (!(gamma > 0.0)) throw error(errc::invalid_argument, "gamma must be positive");
  const int n = ioc.grid->size();
  const Eigen::MatrixXd a_dense = assemble_dense(a_operator(ioc), ioc.grid);
  // iterate toward the tighter target; the looser bound is the promised
  // accuracy and is accepted when rounding stops further progress
  const double tol = 1e-11 * (1.0 + gamma);
  const double target = 1e-13 * (1.0 + gamma);

  NewtonOutcome out;
  out.u = u0 ? *u0 : pointwise_max(ioc.u_a, w);
  GridFunction r = reg_residual(ioc, out.u, w, gamma);
  std::vector<double> history{norm_l2(r)};

  const auto fail = [&](const char *what) {
    std::ostringstream msg;
    msg << what << "; residual history:";
    for (double v : history) msg << ' ' << v;
    throw error(errc::solver_failure, msg.str());
  };

  for (int it = 1; it <= 200; ++it) {
    if (history.back() <= target) return out;
    out.iterations = it;
    Eigen::MatrixXd jac = a_dense;
    Eigen::VectorXd rhs(n);
    for (int i = 0; i < n; ++i) {
      jac(i, i) += gamma * pi_prime(out.u[i] - ioc.u_a[i]);
      rhs[i] = -r[i];
    }
    const Eigen::VectorXd d = jac.ldlt().solve(rhs);
    if (!d.allFinite()) fail("newton step is not finite");
    double t = 1.0;
    for (int halving = 0;; ++halving) {
      GridFunction trial = out.u;
      for (int i = 0; i < n; ++i) trial[i] += t * d[i];
      const GridFunction rt = reg_residual(ioc, trial, w, gamma);
      if (norm_l2(rt) < history.back()) {
        out.u = trial;
        r = rt;
        history.push_back(norm_l2(rt));
        break;
      }
      if (halving >= 60) {
        if (history.back() <= tol) return out;
        fail("damping found no decrease");
      }
      t *= 0.5;
    }
  }
  if (history.back() <= tol) return out;
  fail("newton did not converge in 200 iterations");
  return out;  // not reached
}

}  // namespace detail

inline GridFunction solve_regularized(const IocProblem &ioc, const GridFunction &w, double gamma,
                                      const GridFunction *u0 = nullptr) {
  return detail::newton_regularized(ioc, w, gamma, u0).u;
}

// Derivative system of the regularized solution map: v = T_gamma'(w)h solves
// (A + gamma diag(pi'(u - u_a))) v = alpha h.
inline GridFunction t_gamma_derivative(const IocProblem &ioc, const GridFunction &u, double gamma,
                                       const GridFunction &h) {
  require_same_grid(ioc.grid, u.grid, "t_gamma_derivative u");
  require_same_grid(ioc.grid, h.grid, "t_gamma_derivative h");
  const int n = ioc.grid->size();
  Eigen::MatrixXd jac = assemble_dense(a_operator(ioc), ioc.grid);
  Eigen::VectorXd rhs(n);
  for (int i = 0; i < n; ++i) {
    jac(i, i) += gamma * pi_prime(u[i] - ioc.u_a[i]);
    rhs[i] = ioc.alpha * h[i];
  }
  const Eigen::VectorXd v = jac.ldlt().solve(rhs);
  GridFunction out(ioc.grid);
  for (int i = 0; i < n; ++i) out[i] = v[i];
  return out;
}

// Adjoint state of the reduced cost: (A + gamma diag(pi')) p = -alpha f'(u).
// Self-adjointness gives <f'(u), T_gamma'(w)h> = -<p, h> for every h, which
// makes -p the reduced gradient of f through the regularized solution map.
inline GridFunction adjoint_solve(const IocProblem &ioc, const GridFunction &u, double gamma) {
  require_same_grid(ioc.grid, u.grid, "adjoint_solve u");
  const GridFunction grad = f_grad(ioc.f, u);
  const int n = ioc.grid->size();
  Eigen::MatrixXd jac = assemble_dense(a_operator(ioc), ioc.grid);
  Eigen::VectorXd rhs(n);
  for (int i = 0; i < n; ++i) {
    jac(i, i) += gamma * pi_prime(u[i] - ioc.u_a[i]);
    rhs[i] = -ioc.alpha * grad[i];
  }
  const Eigen::VectorXd p = jac.ldlt().solve(rhs);
  GridFunction out(ioc.grid);
  for (int i = 0; i < n; ++i) out[i] = p[i];
  return out;
}

struct RegSchedule {
  double gamma0 = 1.0;
  double factor = 10.0;
  int steps = 9;
};

struct RegPathReport {
  std::vector<double> gammas;
  std::vector<double> errors_to_vi;
  std::vector<int> newton_iters;
  GridFunction final_w;
  std::vector<double> adjoint_norms;
};

// Follows gamma along a geometric schedule with warm-started Newton solves
// and records the distance to the exact lower-level solution at fixed w.
inline RegPathReport run_reg_path(const IocProblem &ioc, const GridFunction &w,
                                  const RegSchedule &schedule = {}) {
  if (!(schedule.gamma0 > 0.0) || !(schedule.factor > 1.0) || schedule.steps < 1)
    throw error(errc::invalid_argument, "schedule needs gamma0 > 0, factor > 1, steps >= 1");
  const GridFunction u_star = solve_oc(ioc, w).u;
  RegPathReport rep;
  rep.final_w = w;
  std::optional<GridFunction> warm;
  double gamma = schedule.gamma0;
  for (int k = 0; k < schedule.steps; ++k, gamma *= schedule.factor) {
    const detail::NewtonOutcome nw =
        detail::newton_regularized(ioc, w, gamma, warm ? &*warm : nullptr);
    warm = nw.u;
    rep.gammas.push_back(gamma);
    rep.errors_to_vi.push_back(norm_l2(nw.u - u_star));
    rep.newton_iters.push_back(nw.iterations);
    rep.adjoint_norms.push_back(norm_l2(adjoint_solve(ioc, nw.u, gamma)));
  }
  return rep;
}

struct StepRule {
  double t0 = 1.0;
  double shrink = 0.5;
  int max_backtracks = 50;
};

// Reduced upper-level objective at fixed gamma: the cost of the regularized
// lower-level response plus the H^1_0 penalty and the linear term.
inline double ioc_reduced_objective(const IocProblem &ioc, const GridFunction &w, double gamma,
                                    const GridFunction *u_warm, GridFunction *u_out) {
  const GridFunction u = solve_regularized(ioc, w, gamma, u_warm);
  if (u_out) *u_out = u;
  return f_value(ioc.f, u) + 0.5 * h1_seminorm_sq(w) + inner_product(ioc.zeta, w);
}

// Projected gradient on w >= w_a for the regularized bilevel problem.  The
// gradient combines the H^1_0 penalty, the linear term and the adjoint state:
// g = -lap(w) + zeta - p.  Steps backtrack on the reduced objective and the
// loop stops once the projected-gradient residual is small.
inline GridFunction solve_ioc_regularized(const IocProblem &ioc, const GridFunction &w0,
                                          double gamma, const StepRule &rule = {}) {
  validate_ioc(ioc);
  require_same_grid(ioc.grid, w0.grid, "solve_ioc_regularized w0");
  for (int i = 0; i < w0.size(); ++i)
    if (w0[i] < ioc.w_a[i])
      throw error(errc::invalid_argument, "initial parameter violates its lower bound");

  GridFunction w = w0;
  GridFunction u;
  double value = ioc_reduced_objective(ioc, w, gamma, nullptr, &u);
  std::vector<double> residuals;
  for (int it = 0; it < 5000; ++it) {
    const GridFunction p = adjoint_solve(ioc, u, gamma);
    GridFunction g = apply_laplacian(w);
    for (int i = 0; i < g.size(); ++i) g[i] += ioc.zeta[i] - p[i];
    const GridFunction proj = pointwise_max(ioc.w_a, w - g);
    residuals.push_back(norm_l2(w - proj));
    if (residuals.back() <= 1e-7) return w;

    double t = rule.t0;
    bool moved = false;
    for (int bt = 0; bt <= rule.max_backtracks; ++bt, t *= rule.shrink) {
      GridFunction step = w;
      for (int i = 0; i < step.size(); ++i) step[i] -= t * g[i];
      const GridFunction cand = pointwise_max(ioc.w_a, step);
      GridFunction u_cand;
      const double trial = ioc_reduced_objective(ioc, cand, gamma, &u, &u_cand);
      double decrease = 0.0;
      for (int i = 0; i < w.size(); ++i)
        decrease += ioc.grid->weights[i] * g[i] * (w[i] - cand[i]);
      if (trial <= value - 1e-4 * decrease) {
        w = cand;
        u = u_cand;
        value = trial;
        moved = true;
        break;
      }
    }
    if (!moved) {
      std::ostringstream msg;
      msg << "projected gradient stalled at residual " << residuals.back();
      throw error(errc::convergence_failure, msg.str());
    }
  }
  std::ostringstream msg;
  msg << "projected gradient used 5000 iterations; last residuals:";
  const std::size_t from = residuals.size() > 5 ? residuals.size() - 5 : 0;
  for (std::size_t i = from; i < residuals.size(); ++i) msg << ' ' << residuals[i];
  throw error(errc::convergence_failure, msg.str());
}

}  // namespace mstat
