#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "grid.hpp"
#include "operators.hpp"
#include "simplex.hpp"

namespace mstat {

// Linearized complementarity program on a grid:
//
//   min <F_u, u> + <F_w, w> + <F_xi, xi>
//   s.t. A u - w - xi = 0,
//        u  >= 0 on the biactive set, u = 0 on the strongly active set,
//        xi >= 0 on the biactive set, xi = 0 on the inactive set,
//        u xi = 0 on the biactive set (the complementarity branch choice),
//        w  >= 0 on w_bound_set.
//
// The three cell classes partition the grid: "inactive" cells have u free
// and xi pinned to 0, "strongly_active" cells have u pinned to 0 and xi
// free, and "biactive" cells carry the complementarity disjunction.  A
// branch set beta (subset of biactive) selects xi >= 0 with u = 0 on beta
// and u >= 0 with xi = 0 on the rest.
struct MpccLinProblem {
  GridPtr grid;
  LinOp a_op;
  GridFunction f_u, f_w, f_xi;
  CellSet strongly_active;  // u = 0, xi > 0 allowed
  CellSet biactive;         // u = 0 and xi = 0 at the base point
  CellSet inactive;         // u > 0 allowed, xi = 0
  CellSet w_bound_set;      // cells where w >= 0 is enforced
};

inline void validate_problem(const MpccLinProblem &p) {
  if (!p.grid) throw error(errc::invalid_argument, "problem has no grid");
  require_same_grid(p.grid, p.f_u.grid, "f_u");
  require_same_grid(p.grid, p.f_w.grid, "f_w");
  require_same_grid(p.grid, p.f_xi.grid, "f_xi");
  require_same_grid(p.grid, p.strongly_active.grid, "strongly_active");
  require_same_grid(p.grid, p.biactive.grid, "biactive");
  require_same_grid(p.grid, p.inactive.grid, "inactive");
  require_same_grid(p.grid, p.w_bound_set.grid, "w_bound_set");
  for (int i = 0; i < p.grid->size(); ++i) {
    const int c = (p.strongly_active.mask[i] != 0) + (p.biactive.mask[i] != 0) +
                  (p.inactive.mask[i] != 0);
    if (c != 1)
      throw error(errc::invalid_argument,
                  "cell " + std::to_string(i) + " must lie in exactly one class");
  }
}

inline void validate_beta(const MpccLinProblem &p, const CellSet &beta) {
  require_same_grid(p.grid, beta.grid, "beta");
  if (!set_subset(beta, p.biactive))
    throw error(errc::invalid_argument, "beta must be a subset of the biactive set");
}

struct KktMultipliers {
  GridFunction p, mu, nu, lam;
};

inline KktMultipliers zero_multipliers(const GridPtr &g) {
  return {GridFunction(g), GridFunction(g), GridFunction(g), GridFunction(g)};
}

// c0 = A*(|F_u| + |F_w| + |F_xi|) + (|F_u| + |F_w| + |F_xi|), the natural
// cellwise scale against which multiplier bounds are stated.
inline GridFunction compute_c0(const MpccLinProblem &p) {
  GridFunction s = abs(p.f_u) + abs(p.f_w) + abs(p.f_xi);
  return apply_adjoint(p.a_op, s) + s;
}

// Sign class of one multiplier component on one cell.
enum class SignClass { Zero, NonPos, Free };

struct MultiplierSigns {
  std::vector<SignClass> mu, nu, lam;
};

// Branch system for a fixed beta: mu <= 0 on biactive \ beta, free on beta
// and on the strongly active set; nu <= 0 on beta, free on the inactive set
// and biactive \ beta; lambda <= 0 on w_bound_set, 0 elsewhere.
inline MultiplierSigns signs_for_beta(const MpccLinProblem &p, const CellSet &beta) {
  const int n = p.grid->size();
  MultiplierSigns s{std::vector<SignClass>(n), std::vector<SignClass>(n),
                    std::vector<SignClass>(n)};
  for (int i = 0; i < n; ++i) {
    if (p.inactive.mask[i])
      s.mu[i] = SignClass::Zero;
    else if (p.biactive.mask[i] && !beta.mask[i])
      s.mu[i] = SignClass::NonPos;
    else
      s.mu[i] = SignClass::Free;
    if (p.strongly_active.mask[i])
      s.nu[i] = SignClass::Zero;
    else if (beta.mask[i])
      s.nu[i] = SignClass::NonPos;
    else
      s.nu[i] = SignClass::Free;
    s.lam[i] = p.w_bound_set.mask[i] ? SignClass::NonPos : SignClass::Zero;
  }
  return s;
}

// Weak system: only the zero constraints, no sign conditions on the
// biactive set.
inline MultiplierSigns signs_weak(const MpccLinProblem &p) {
  const int n = p.grid->size();
  MultiplierSigns s{std::vector<SignClass>(n), std::vector<SignClass>(n),
                    std::vector<SignClass>(n)};
  for (int i = 0; i < n; ++i) {
    s.mu[i] = p.inactive.mask[i] ? SignClass::Zero : SignClass::Free;
    s.nu[i] = p.strongly_active.mask[i] ? SignClass::Zero : SignClass::Free;
    s.lam[i] = p.w_bound_set.mask[i] ? SignClass::NonPos : SignClass::Zero;
  }
  return s;
}

// Strong system: both multipliers nonpositive on every biactive cell.
inline MultiplierSigns signs_strong(const MpccLinProblem &p) {
  MultiplierSigns s = signs_weak(p);
  for (int i = 0; i < p.grid->size(); ++i) {
    if (p.biactive.mask[i]) {
      s.mu[i] = SignClass::NonPos;
      s.nu[i] = SignClass::NonPos;
    }
  }
  return s;
}

enum class KktSolveStatus { Found, Infeasible };

struct KktSolveResult {
  KktSolveStatus status = KktSolveStatus::Infeasible;
  KktMultipliers m;
  double phase1_infeasibility = 0.0;
};

namespace detail {

inline VarBound bound_for(SignClass c) {
  switch (c) {
    case SignClass::Zero: return {0.0, 0.0};
    case SignClass::NonPos: return {-lp_infinity, 0.0};
    case SignClass::Free: return {};
  }
  return {};
}

// Stacked variable layout (p, mu, nu, lambda), 4n variables, and the 3n
// stationarity rows
//   F_u + A* p + mu = 0,  F_w - p + lambda = 0,  F_xi - p + nu = 0.
inline LpProblem build_kkt_lp(const MpccLinProblem &prob, const MultiplierSigns &signs,
                              const std::vector<double> *objective) {
  const int n = prob.grid->size();
  const Eigen::MatrixXd At = assemble_dense_adjoint(prob.a_op, prob.grid);
  LpProblem lp;
  lp.num_vars = 4 * n;
  lp.bounds.resize(lp.num_vars);
  for (int i = 0; i < n; ++i) {
    lp.bounds[i] = {};  // p free
    lp.bounds[n + i] = bound_for(signs.mu[i]);
    lp.bounds[2 * n + i] = bound_for(signs.nu[i]);
    lp.bounds[3 * n + i] = bound_for(signs.lam[i]);
  }
  if (objective) {
    if (static_cast<int>(objective->size()) != lp.num_vars)
      throw error(errc::invalid_argument, "kkt objective size mismatch");
    lp.objective = *objective;
  }
  lp.eq_rows.reserve(3 * n);
  lp.eq_rhs.reserve(3 * n);
  std::vector<double> row(lp.num_vars);
  for (int i = 0; i < n; ++i) {
    std::fill(row.begin(), row.end(), 0.0);
    double amax = 1.0;
    for (int j = 0; j < n; ++j) {
      row[j] = At(i, j);
      amax = std::max(amax, std::fabs(row[j]));
    }
    row[n + i] += 1.0;
    const double s = 1.0 / (1.0 + amax);
    for (double &a : row) a *= s;
    lp.eq_rows.push_back(row);
    lp.eq_rhs.push_back(-prob.f_u[i] * s);
  }
  for (int i = 0; i < n; ++i) {
    std::fill(row.begin(), row.end(), 0.0);
    row[i] = -0.5;
    row[3 * n + i] = 0.5;
    lp.eq_rows.push_back(row);
    lp.eq_rhs.push_back(-prob.f_w[i] * 0.5);
  }
  for (int i = 0; i < n; ++i) {
    std::fill(row.begin(), row.end(), 0.0);
    row[i] = -0.5;
    row[2 * n + i] = 0.5;
    lp.eq_rows.push_back(row);
    lp.eq_rhs.push_back(-prob.f_xi[i] * 0.5);
  }
  return lp;
}

inline KktMultipliers unpack_multipliers(const GridPtr &g, const std::vector<double> &x) {
  const int n = g->size();
  KktMultipliers m = zero_multipliers(g);
  for (int i = 0; i < n; ++i) {
    m.p[i] = x[i];
    m.mu[i] = x[n + i];
    m.nu[i] = x[2 * n + i];
    m.lam[i] = x[3 * n + i];
  }
  return m;
}

}  // namespace detail

// Feasibility of the multiplier system for the given signs; an optional
// objective (over the stacked layout) selects among feasible points.
inline KktSolveResult solve_kkt_signs(const MpccLinProblem &prob, const MultiplierSigns &signs,
                                      const std::vector<double> *objective = nullptr) {
  validate_problem(prob);
  const LpProblem lp = detail::build_kkt_lp(prob, signs, objective);
  const LpResult r = lp_solve(lp);
  KktSolveResult out;
  if (r.status == LpStatus::Infeasible) {
    out.status = KktSolveStatus::Infeasible;
    out.phase1_infeasibility = r.phase1_infeasibility;
    return out;
  }
  // with a zero objective the LP cannot be unbounded; with a sampling
  // objective an unbounded ray still passes through a feasible point
  out.status = KktSolveStatus::Found;
  out.m = detail::unpack_multipliers(prob.grid, r.x);
  return out;
}

inline KktSolveResult solve_kkt_beta(const MpccLinProblem &prob, const CellSet &beta,
                                     const std::vector<double> *objective = nullptr) {
  validate_beta(prob, beta);
  return solve_kkt_signs(prob, signs_for_beta(prob, beta), objective);
}

struct MinL1Result {
  KktSolveStatus status = KktSolveStatus::Infeasible;
  double value = 0.0;  // weighted <1, |p|> at the optimum
  KktMultipliers m;
};

// Minimum of <1, |p|> over the branch system, via the split p = p+ - p-.
inline MinL1Result min_l1_multiplier(const MpccLinProblem &prob, const CellSet &beta) {
  validate_problem(prob);
  validate_beta(prob, beta);
  const int n = prob.grid->size();
  const MultiplierSigns signs = signs_for_beta(prob, beta);
  const Eigen::MatrixXd At = assemble_dense_adjoint(prob.a_op, prob.grid);
  // layout: p+ [0,n), p- [n,2n), mu [2n,3n), nu [3n,4n), lambda [4n,5n)
  LpProblem lp;
  lp.num_vars = 5 * n;
  lp.bounds.resize(lp.num_vars);
  lp.objective.assign(lp.num_vars, 0.0);
  for (int i = 0; i < n; ++i) {
    lp.bounds[i] = {0.0, lp_infinity};
    lp.bounds[n + i] = {0.0, lp_infinity};
    lp.objective[i] = prob.grid->weights[i];
    lp.objective[n + i] = prob.grid->weights[i];
    lp.bounds[2 * n + i] = detail::bound_for(signs.mu[i]);
    lp.bounds[3 * n + i] = detail::bound_for(signs.nu[i]);
    lp.bounds[4 * n + i] = detail::bound_for(signs.lam[i]);
  }
  std::vector<double> row(lp.num_vars);
  for (int i = 0; i < n; ++i) {
    std::fill(row.begin(), row.end(), 0.0);
    double amax = 1.0;
    for (int j = 0; j < n; ++j) {
      row[j] = At(i, j);
      row[n + j] = -At(i, j);
      amax = std::max(amax, std::fabs(At(i, j)));
    }
    row[2 * n + i] += 1.0;
    const double s = 1.0 / (1.0 + amax);
    for (double &a : row) a *= s;
    lp.eq_rows.push_back(row);
    lp.eq_rhs.push_back(-prob.f_u[i] * s);
  }
  for (int i = 0; i < n; ++i) {
    std::fill(row.begin(), row.end(), 0.0);
    row[i] = -0.5;
    row[n + i] = 0.5;
    row[4 * n + i] = 0.5;
    lp.eq_rows.push_back(row);
    lp.eq_rhs.push_back(-prob.f_w[i] * 0.5);
  }
  for (int i = 0; i < n; ++i) {
    std::fill(row.begin(), row.end(), 0.0);
    row[i] = -0.5;
    row[n + i] = 0.5;
    row[3 * n + i] = 0.5;
    lp.eq_rows.push_back(row);
    lp.eq_rhs.push_back(-prob.f_xi[i] * 0.5);
  }
  const LpResult r = lp_solve(lp);
  MinL1Result out;
  if (r.status == LpStatus::Infeasible) return out;
  if (r.status == LpStatus::Unbounded)
    throw error(errc::internal_error, "l1 objective cannot be unbounded below");
  out.status = KktSolveStatus::Found;
  out.value = r.value;
  out.m = zero_multipliers(prob.grid);
  for (int i = 0; i < n; ++i) {
    out.m.p[i] = r.x[i] - r.x[n + i];
    out.m.mu[i] = r.x[2 * n + i];
    out.m.nu[i] = r.x[3 * n + i];
    out.m.lam[i] = r.x[4 * n + i];
  }
  return out;
}

struct PrimalLpResult {
  LpStatus status = LpStatus::Infeasible;
  double value = 0.0;
  GridFunction u, w, xi;
  GridFunction ray_u, ray_w, ray_xi;  // Unbounded: descent direction
};

// The linearized program itself for a fixed branch set.  Its optimal value
// is 0 exactly when the branch multiplier system is feasible; being a cone
// program it is otherwise unbounded.
inline PrimalLpResult solve_lp_beta(const MpccLinProblem &prob, const CellSet &beta) {
  validate_problem(prob);
  validate_beta(prob, beta);
  const int n = prob.grid->size();
  const Eigen::MatrixXd A = assemble_dense(prob.a_op, prob.grid);
  // layout: u [0,n), w [n,2n), xi [2n,3n)
  LpProblem lp;
  lp.num_vars = 3 * n;
  lp.bounds.resize(lp.num_vars);
  lp.objective.assign(lp.num_vars, 0.0);
  for (int i = 0; i < n; ++i) {
    const double wi = prob.grid->weights[i];
    lp.objective[i] = wi * prob.f_u[i];
    lp.objective[n + i] = wi * prob.f_w[i];
    lp.objective[2 * n + i] = wi * prob.f_xi[i];
    if (prob.strongly_active.mask[i] || beta.mask[i])
      lp.bounds[i] = {0.0, 0.0};
    else if (prob.biactive.mask[i])
      lp.bounds[i] = {0.0, lp_infinity};
    else
      lp.bounds[i] = {};
    lp.bounds[n + i] = prob.w_bound_set.mask[i] ? VarBound{0.0, lp_infinity} : VarBound{};
    if (beta.mask[i])
      lp.bounds[2 * n + i] = {0.0, lp_infinity};
    else if (prob.strongly_active.mask[i])
      lp.bounds[2 * n + i] = {};
    else
      lp.bounds[2 * n + i] = {0.0, 0.0};
  }
  std::vector<double> row(lp.num_vars);
  for (int i = 0; i < n; ++i) {
    std::fill(row.begin(), row.end(), 0.0);
    double amax = 1.0;
    for (int j = 0; j < n; ++j) {
      row[j] = A(i, j);
      amax = std::max(amax, std::fabs(row[j]));
    }
    row[n + i] += -1.0;
    row[2 * n + i] += -1.0;
    const double s = 1.0 / (1.0 + amax);
    for (double &a : row) a *= s;
    lp.eq_rows.push_back(row);
    lp.eq_rhs.push_back(0.0);
  }
  const LpResult r = lp_solve(lp);
  PrimalLpResult out;
  out.status = r.status;
  out.u = GridFunction(prob.grid);
  out.w = GridFunction(prob.grid);
  out.xi = GridFunction(prob.grid);
  out.ray_u = GridFunction(prob.grid);
  out.ray_w = GridFunction(prob.grid);
  out.ray_xi = GridFunction(prob.grid);
  if (r.status == LpStatus::Infeasible)
    throw error(errc::internal_error, "homogeneous primal cannot be infeasible");
  out.value = 0.0;
  for (int i = 0; i < n; ++i) {
    out.u[i] = r.x[i];
    out.w[i] = r.x[n + i];
    out.xi[i] = r.x[2 * n + i];
    const double wi = prob.grid->weights[i];
    out.value += wi * (prob.f_u[i] * out.u[i] + prob.f_w[i] * out.w[i] +
                       prob.f_xi[i] * out.xi[i]);
  }
  if (r.status == LpStatus::Unbounded && !r.ray.empty()) {
    for (int i = 0; i < n; ++i) {
      out.ray_u[i] = r.ray[i];
      out.ray_w[i] = r.ray[n + i];
      out.ray_xi[i] = r.ray[2 * n + i];
    }
  }
  return out;
}

// Residuals of the branch multiplier system at a given candidate, computed
// directly from the operator (not from the LP assembly, so this is an
// independent check).
struct KktSystemResiduals {
  double stat_u = 0, stat_w = 0, stat_xi = 0;
  double mu_zero = 0, mu_sign = 0;
  double nu_zero = 0, nu_sign = 0;
  double lambda_zero = 0, lambda_sign = 0;

  double max() const {
    return std::max({stat_u, stat_w, stat_xi, mu_zero, mu_sign, nu_zero, nu_sign,
                     lambda_zero, lambda_sign});
  }
};

inline KktSystemResiduals kkt_signs_residuals(const MpccLinProblem &prob,
                                              const MultiplierSigns &signs,
                                              const KktMultipliers &m) {
  KktSystemResiduals r;
  const GridFunction Ap = apply_adjoint(prob.a_op, m.p);
  for (int i = 0; i < prob.grid->size(); ++i) {
    r.stat_u = std::max(r.stat_u, std::fabs(prob.f_u[i] + Ap[i] + m.mu[i]));
    r.stat_w = std::max(r.stat_w, std::fabs(prob.f_w[i] - m.p[i] + m.lam[i]));
    r.stat_xi = std::max(r.stat_xi, std::fabs(prob.f_xi[i] - m.p[i] + m.nu[i]));
    switch (signs.mu[i]) {
      case SignClass::Zero: r.mu_zero = std::max(r.mu_zero, std::fabs(m.mu[i])); break;
      case SignClass::NonPos: r.mu_sign = std::max(r.mu_sign, std::max(0.0, m.mu[i])); break;
      case SignClass::Free: break;
    }
    switch (signs.nu[i]) {
      case SignClass::Zero: r.nu_zero = std::max(r.nu_zero, std::fabs(m.nu[i])); break;
      case SignClass::NonPos: r.nu_sign = std::max(r.nu_sign, std::max(0.0, m.nu[i])); break;
      case SignClass::Free: break;
    }
    switch (signs.lam[i]) {
      case SignClass::Zero: r.lambda_zero = std::max(r.lambda_zero, std::fabs(m.lam[i])); break;
      case SignClass::NonPos:
        r.lambda_sign = std::max(r.lambda_sign, std::max(0.0, m.lam[i]));
        break;
      case SignClass::Free: break;
    }
  }
  return r;
}

inline KktSystemResiduals kkt_beta_residuals(const MpccLinProblem &prob, const CellSet &beta,
                                             const KktMultipliers &m) {
  validate_beta(prob, beta);
  return kkt_signs_residuals(prob, signs_for_beta(prob, beta), m);
}

}  // namespace mstat
