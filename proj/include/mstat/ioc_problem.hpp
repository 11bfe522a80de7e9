#pragma once

#include <variant>

#include "operators.hpp"

namespace mstat {

// f(u) = <c, u> in the weighted inner product.
struct LinearCost {
  GridFunction c;
};

// f(u) = (1/2)||u - u_ref||^2 in the weighted norm.
struct TrackingCost {
  GridFunction u_ref;
};

struct CostSpec {
  std::variant<LinearCost, TrackingCost> v;
};

inline CostSpec cost_linear(GridFunction c) { return {LinearCost{std::move(c)}}; }
inline CostSpec cost_tracking(GridFunction u_ref) { return {TrackingCost{std::move(u_ref)}}; }

// Data of the bilevel problem.  The lower level minimizes
// (1/2)||S u - y_d||^2 + (alpha/2)||u - w||^2 over u >= u_a, and the upper
// level minimizes f(u) + (1/2)|w|_{H1}^2 + <zeta, w> over w >= w_a, with u
// the lower-level solution for the chosen w.
struct IocProblem {
  GridPtr grid;
  LinOp s_op = op_scaled_identity(0.0);
  double alpha = 1.0;
  GridFunction y_d;
  GridFunction u_a;
  GridFunction w_a;
  GridFunction zeta;
  CostSpec f = cost_linear(GridFunction());
};

inline void validate_ioc(const IocProblem &ioc) {
  if (!ioc.grid) throw error(errc::invalid_argument, "ioc problem has no grid");
  if (!(ioc.alpha > 0.0)) throw error(errc::invalid_argument, "alpha must be positive");
  require_same_grid(ioc.grid, ioc.y_d.grid, "ioc y_d");
  require_same_grid(ioc.grid, ioc.u_a.grid, "ioc u_a");
  require_same_grid(ioc.grid, ioc.w_a.grid, "ioc w_a");
  require_same_grid(ioc.grid, ioc.zeta.grid, "ioc zeta");
  if (const auto *lin = std::get_if<LinearCost>(&ioc.f.v))
    require_same_grid(ioc.grid, lin->c.grid, "ioc cost");
  else
    require_same_grid(ioc.grid, std::get<TrackingCost>(ioc.f.v).u_ref.grid, "ioc cost");
}

inline double f_value(const CostSpec &f, const GridFunction &u) {
  if (const auto *lin = std::get_if<LinearCost>(&f.v)) return inner_product(lin->c, u);
  const GridFunction d = u - std::get<TrackingCost>(f.v).u_ref;
  return 0.5 * inner_product(d, d);
}

inline GridFunction f_grad(const CostSpec &f, const GridFunction &u) {
  if (const auto *lin = std::get_if<LinearCost>(&f.v)) return lin->c;
  return u - std::get<TrackingCost>(f.v).u_ref;
}

// The operator alpha I + S*S of the lower-level optimality system, folded
// into a closed operator class when S allows it.  The rank-one averaging S
// gives S*S v = c^2 m(Omega) <1, v>, so the sum is an identity-plus-average
// operator, which the certification path can reduce further.
inline LinOp a_operator(const IocProblem &ioc) {
  if (const auto *s = std::get_if<ScaledIdentity>(&ioc.s_op.v))
    return op_scaled_identity(ioc.alpha + s->factor * s->factor);
  if (const auto *a = std::get_if<AverageRankOne>(&ioc.s_op.v))
    return op_id_plus_average(ioc.alpha, a->c * a->c * ioc.grid->measure());
  return op_sum(op_scaled_identity(ioc.alpha), op_gram(ioc.s_op));
}

// The lower-level stationarity map S*(S u - y_d) + alpha (u - w).  Its value
// at the solution is the multiplier of the bound u >= u_a.
inline GridFunction xi_formula(const IocProblem &ioc, const GridFunction &u,
                               const GridFunction &w) {
  const GridFunction su = apply(ioc.s_op, u);
  GridFunction xi = apply_adjoint(ioc.s_op, su - ioc.y_d);
  for (int i = 0; i < xi.size(); ++i) xi[i] += ioc.alpha * (u[i] - w[i]);
  return xi;
}

}  // namespace mstat
