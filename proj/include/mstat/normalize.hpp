#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "mpcc_lin.hpp"

namespace mstat {

// Multipliers together with a certified cellwise bound
//   max(|p|, |mu|, |nu|, |lambda|) <= bound_constant * c0.
struct NormalizedMultipliers {
  KktMultipliers m;
  double bound_constant = 0.0;
  GridFunction c0;
};

inline bool is_unit_average_op(const LinOp &op) {
  if (const auto *s = std::get_if<ScaledIdPlusAverage>(&op.v))
    return s->d1 == 1.0 && s->d2 == 1.0;
  return false;
}

namespace detail {

inline void require_kkt_feasible(const MpccLinProblem &prob, const CellSet &beta,
                                 const KktMultipliers &m, const char *where) {
  const double scale = 1.0 + norm_linf(m.p) + norm_linf(prob.f_u) + norm_linf(prob.f_w) +
                       norm_linf(prob.f_xi);
  if (kkt_beta_residuals(prob, beta, m).max() > 1e-8 * scale)
    throw error(errc::invalid_argument,
                std::string(where) + ": input multipliers do not satisfy the branch system");
}

inline void verify_cellwise_bound(const KktMultipliers &m, const GridFunction &c0, double constant,
                                  const char *where) {
  for (int i = 0; i < c0.size(); ++i) {
    const double worst = std::max({std::fabs(m.p[i]), std::fabs(m.mu[i]), std::fabs(m.nu[i]),
                                   std::fabs(m.lam[i])});
    if (worst > constant * c0[i] + 1e-9)
      throw error(errc::internal_error,
                  std::string(where) + ": bound violated at cell " + std::to_string(i) +
                      " (value " + format_double(worst) + " vs " +
                      format_double(constant * c0[i]) + ")");
  }
}

}  // namespace detail

// Shift by the negative part of max(p, lambda, nu).  Needs the adjoint of A
// to preserve nonnegativity and the inactive class to be empty; then the
// shifted multipliers stay branch-feasible and all four components are
// bounded by 2 c0 cellwise.
inline NormalizedMultipliers normalize_nonneg_case(const MpccLinProblem &prob, const CellSet &beta,
                                                   const KktMultipliers &m0) {
  validate_problem(prob);
  validate_beta(prob, beta);
  if (prob.inactive.count() != 0)
    throw error(errc::invalid_argument,
                "normalize_nonneg_case needs an empty inactive class");
  if (!adjoint_preserves_nonneg(prob.a_op, prob.grid))
    throw error(errc::unsupported_operator,
                "normalize_nonneg_case needs a nonnegativity preserving adjoint");
  detail::require_kkt_feasible(prob, beta, m0, "normalize_nonneg_case");
  const int n = prob.grid->size();
  GridFunction a0(prob.grid);
  for (int i = 0; i < n; ++i) {
    const double m3 = std::max({m0.p[i], m0.lam[i], m0.nu[i]});
    a0[i] = std::max(0.0, -m3);
  }
  NormalizedMultipliers out;
  out.m.p = m0.p + a0;
  out.m.lam = m0.lam + a0;
  out.m.nu = m0.nu + a0;
  out.m.mu = m0.mu - apply_adjoint(prob.a_op, a0);
  out.bound_constant = 2.0;
  out.c0 = compute_c0(prob);
  detail::require_kkt_feasible(prob, beta, out.m, "normalize_nonneg_case output");
  detail::verify_cellwise_bound(out.m, out.c0, out.bound_constant, "normalize_nonneg_case");
  return out;
}

// Under the identity-plus-average operator with a nonempty inactive class,
// the total mass of p is controlled cellwise by c0.
inline bool verify_l1_bound(const MpccLinProblem &prob, const KktMultipliers &m) {
  validate_problem(prob);
  if (!is_unit_average_op(prob.a_op))
    throw error(errc::unsupported_operator, "verify_l1_bound needs the identity-plus-average operator");
  const double m_in = prob.inactive.measure();
  if (m_in <= 0.0)
    throw error(errc::invalid_argument, "verify_l1_bound needs a nonempty inactive class");
  const GridFunction c0 = compute_c0(prob);
  const double mass = norm_l1(m.p);
  const double constant = 2.0 + 1.0 / m_in;
  for (int i = 0; i < c0.size(); ++i)
    if (mass > constant * c0[i] + 1e-9) return false;
  return true;
}

// Two-stage shift supported on the cells that are both w-bounded and in
// beta: first the negative part of max(p, lambda, nu) there, then a constant
// correction that restores zero mean, so the shift passes through the
// average part of A unchanged.
inline NormalizedMultipliers normalize_avg_case(const MpccLinProblem &prob, const CellSet &beta,
                                                const KktMultipliers &m0) {
  validate_problem(prob);
  validate_beta(prob, beta);
  if (!is_unit_average_op(prob.a_op))
    throw error(errc::unsupported_operator, "normalize_avg_case needs the identity-plus-average operator");
  const CellSet wb = set_intersect(prob.w_bound_set, beta);
  const double m_wb = wb.measure();
  if (m_wb <= 0.0)
    throw error(errc::invalid_argument,
                "normalize_avg_case needs w_bound_set and beta to overlap");
  const double m_in = prob.inactive.measure();
  if (m_in <= 0.0)
    throw error(errc::invalid_argument, "normalize_avg_case needs a nonempty inactive class");
  detail::require_kkt_feasible(prob, beta, m0, "normalize_avg_case");
  const int n = prob.grid->size();
  GridFunction shift(prob.grid);
  for (int i = 0; i < n; ++i) {
    if (!wb.mask[i]) continue;
    const double m3 = std::max({m0.p[i], m0.lam[i], m0.nu[i]});
    shift[i] = std::max(0.0, -m3);
  }
  const double mean_correction = integral(shift) / m_wb;
  for (int i = 0; i < n; ++i)
    if (wb.mask[i]) shift[i] -= mean_correction;
  NormalizedMultipliers out;
  out.m.p = m0.p + shift;
  out.m.lam = m0.lam + shift;
  out.m.nu = m0.nu + shift;
  out.m.mu = m0.mu - apply_adjoint(prob.a_op, shift);
  out.c0 = compute_c0(prob);
  out.bound_constant = 2.0 + (1.0 / m_wb) * (2.0 + 1.0 / m_in);
  detail::require_kkt_feasible(prob, beta, out.m, "normalize_avg_case output");
  for (int i = 0; i < n; ++i) {
    if (std::fabs(out.m.p[i]) > out.bound_constant * out.c0[i] + 1e-9)
      throw error(errc::internal_error,
                  "normalize_avg_case: p bound violated at cell " + std::to_string(i));
  }
  return out;
}

// Case split over the operator structure.  Returns multipliers with a
// certified cellwise bound constant for all four components.
inline NormalizedMultipliers normalize_dispatch(const MpccLinProblem &prob, const CellSet &beta,
                                                const KktMultipliers &m0) {
  validate_problem(prob);
  validate_beta(prob, beta);
  const double m_omega = prob.grid->measure();
  if (prob.inactive.count() == 0 && adjoint_preserves_nonneg(prob.a_op, prob.grid))
    return normalize_nonneg_case(prob, beta, m0);
  if (!is_unit_average_op(prob.a_op))
    throw error(errc::unsupported_operator,
                "normalize_dispatch needs a nonnegative adjoint with empty inactive class, "
                "or the identity-plus-average operator");
  const CellSet wb = set_intersect(prob.w_bound_set, beta);
  NormalizedMultipliers out;
  if (wb.measure() <= 0.0) {
    // nothing to shift: the system itself pins p, so the input multipliers
    // already satisfy the bound
    detail::require_kkt_feasible(prob, beta, m0, "normalize_dispatch");
    out.m = m0;
    out.c0 = compute_c0(prob);
    out.bound_constant = 5.0 + 2.0 * m_omega;
  } else {
    out = normalize_avg_case(prob, beta, m0);
    out.bound_constant = 1.0 + out.bound_constant * (2.0 + m_omega);
  }
  detail::verify_cellwise_bound(out.m, out.c0, out.bound_constant, "normalize_dispatch");
  return out;
}

// Convex recombination of a multiplier family: pick weights so the combined
// (mu, nu) lies in the polyhedral class with mu <= 0 off alpha and nu <= 0
// on alpha, minimizing the smallest d with |combined nu| <= d c0 cellwise.
struct SelectResult {
  std::vector<double> weights;
  double d = 0.0;
  KktMultipliers combined;
};

inline SelectResult preprocess_select(const std::vector<KktMultipliers> &members,
                                      const CellSet &alpha, const GridFunction &c0) {
  if (members.empty()) throw error(errc::invalid_argument, "empty multiplier family");
  const GridPtr g = c0.grid;
  require_same_grid(g, alpha.grid, "preprocess_select");
  for (const auto &m : members) require_same_grid(g, m.mu.grid, "preprocess_select member");
  const int k = static_cast<int>(members.size());
  const int n = g->size();
  LpBuilder b;
  for (int j = 0; j < k; ++j) b.add_var(0.0, lp_infinity, 0.0);
  const int d_var = b.add_var(0.0, lp_infinity, 1.0);
  {
    std::vector<std::pair<int, double>> terms;
    for (int j = 0; j < k; ++j) terms.emplace_back(j, 1.0);
    b.add_eq(terms, 1.0);
  }
  for (int i = 0; i < n; ++i) {
    std::vector<std::pair<int, double>> mu_terms, nu_terms;
    for (int j = 0; j < k; ++j) {
      mu_terms.emplace_back(j, members[j].mu[i]);
      nu_terms.emplace_back(j, members[j].nu[i]);
    }
    if (!alpha.mask[i]) b.add_le(mu_terms, 0.0);
    if (alpha.mask[i]) b.add_le(nu_terms, 0.0);
    auto hi = nu_terms;
    hi.emplace_back(d_var, -c0[i]);
    b.add_le(hi, 0.0);
    auto lo = nu_terms;
    for (auto &t : lo) t.second = -t.second;
    lo.emplace_back(d_var, -c0[i]);
    b.add_le(lo, 0.0);
  }
  const LpResult r = lp_solve(b.p);
  if (r.status != LpStatus::Optimal)
    throw error(errc::no_member_in_a_alpha,
                "no convex combination satisfies the requested sign class");
  SelectResult out;
  out.weights.assign(r.x.begin(), r.x.begin() + k);
  out.d = r.x[d_var];
  out.combined = zero_multipliers(g);
  for (int j = 0; j < k; ++j) {
    if (out.weights[j] == 0.0) continue;
    for (int i = 0; i < n; ++i) {
      out.combined.p[i] += out.weights[j] * members[j].p[i];
      out.combined.mu[i] += out.weights[j] * members[j].mu[i];
      out.combined.nu[i] += out.weights[j] * members[j].nu[i];
      out.combined.lam[i] += out.weights[j] * members[j].lam[i];
    }
  }
  return out;
}

}  // namespace mstat
