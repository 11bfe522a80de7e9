#pragma once

#include "ioc_problem.hpp"
#include "qp.hpp"
#include "stationarity.hpp"

namespace mstat {

struct LowerLevelSolution {
  GridFunction u;
  GridFunction xi;
  double vi_residual = 0.0;
  ActiveSets active_sets;
};

// Max over cells of the violation of u >= u_a, xi >= 0 and complementarity,
// with xi evaluated from its defining formula.
inline double vi_residual(const IocProblem &ioc, const GridFunction &w, const GridFunction &u) {
  const GridFunction xi = xi_formula(ioc, u, w);
  double worst = 0.0;
  for (int i = 0; i < u.size(); ++i) {
    const double gap = u[i] - ioc.u_a[i];
    worst = std::max({worst, -gap, -xi[i], std::fabs(std::min(gap, xi[i]))});
  }
  return worst;
}

// Solves min (1/2)||Su - y_d||^2 + (alpha/2)||u - w||^2 over u >= u_a.  The
// multiplier is recomputed from its formula; the QP dual only cross-checks it.
inline LowerLevelSolution solve_oc(const IocProblem &ioc, const GridFunction &w) {
  validate_ioc(ioc);
  require_same_grid(ioc.grid, w.grid, "solve_oc w");
  QpBoxProblem qp{a_operator(ioc), GridFunction(ioc.grid), ioc.u_a};
  const GridFunction s_yd = apply_adjoint(ioc.s_op, ioc.y_d);
  for (int i = 0; i < qp.linear.size(); ++i)
    qp.linear[i] = -(s_yd[i] + ioc.alpha * w[i]);
  const QpBoxResult r = qp_box_solve(qp);

  LowerLevelSolution sol;
  sol.u = r.x;
  sol.xi = xi_formula(ioc, sol.u, w);
  for (int i = 0; i < sol.xi.size(); ++i)
    if (std::fabs(sol.xi[i] - r.xi[i]) > 1e-9)
      throw error(errc::internal_error, "multiplier formula disagrees with the QP dual");
  sol.vi_residual = vi_residual(ioc, w, sol.u);
  sol.active_sets = classify_active_sets(sol.u, sol.xi, ioc.u_a, 1e-9);
  return sol;
}

// Directional derivative z of the solution map at w_bar in direction h: the
// solution of the critical-cone problem min (1/2)<Az, z> - alpha <h, z> with
// z = 0 where the multiplier is positive, z >= 0 on the biactive set and z
// free where the bound is inactive.
inline GridFunction directional_derivative(const IocProblem &ioc, const GridFunction &w_bar,
                                           const LowerLevelSolution &sol, const GridFunction &h) {
  require_same_grid(ioc.grid, w_bar.grid, "directional_derivative w_bar");
  require_same_grid(ioc.grid, h.grid, "directional_derivative h");
  const ActiveSets &as = sol.active_sets;
  QpBoxProblem qp{a_operator(ioc), GridFunction(ioc.grid), GridFunction(ioc.grid, -lp_infinity)};
  for (int i = 0; i < h.size(); ++i) {
    qp.linear[i] = -ioc.alpha * h[i];
    if (as.biactive.mask[i]) qp.lower[i] = 0.0;
  }
  std::vector<char> pinned(as.strongly_active.mask.begin(), as.strongly_active.mask.end());
  return qp_box_solve(qp, std::nullopt, 100, &pinned).x;
}

}  // namespace mstat
