#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "mpcc_lin.hpp"

namespace mstat {

enum class CertKind { Weak, Branch, M, S };

inline const char *cert_kind_name(CertKind k) {
  switch (k) {
    case CertKind::Weak: return "weak";
    case CertKind::Branch: return "branch";
    case CertKind::M: return "m";
    case CertKind::S: return "s";
  }
  return "unknown";
}

struct StationarityCertificate {
  CertKind kind = CertKind::Weak;
  bool verdict = false;
  double tol = 0.0;
  KktSystemResiduals residuals;
  double m_condition = 0.0;  // populated for kind M
  KktMultipliers m;
  std::vector<int> beta;  // populated for kind Branch

  double worst() const { return std::max(residuals.max(), m_condition); }
};

// Disjunction per biactive cell: either both multipliers strictly negative
// or their product vanishes.  The violation is the normalized product excess;
// strictness is measured against the same tolerance.
inline double m_condition_residual(const GridFunction &mu, const GridFunction &nu,
                                   const CellSet &biactive, double tol) {
  require_same_grid(mu.grid, biactive.grid, "m_condition_residual");
  double worst = 0.0;
  for (int i = 0; i < mu.size(); ++i) {
    if (!biactive.mask[i]) continue;
    if (mu[i] < -tol && nu[i] < -tol) continue;
    const double excess = std::fabs(mu[i] * nu[i]) / (1.0 + std::fabs(mu[i]) + std::fabs(nu[i]));
    worst = std::max(worst, excess);
  }
  return worst;
}

// Partition of the lower-level active structure at a feasible pair (u, xi).
struct ActiveSets {
  CellSet strongly_active;  // u at the bound, xi > tol
  CellSet inactive;         // u above the bound
  CellSet biactive;         // both within tol
};

// Cells where strict complementarity fails are classified biactive, so the
// branch machinery sees every ambiguous cell.
inline ActiveSets classify_active_sets(const GridFunction &u, const GridFunction &xi,
                                       const GridFunction &u_a, double tol) {
  require_same_grid(u.grid, xi.grid, "classify_active_sets");
  require_same_grid(u.grid, u_a.grid, "classify_active_sets");
  ActiveSets s{CellSet(u.grid), CellSet(u.grid), CellSet(u.grid)};
  for (int i = 0; i < u.size(); ++i) {
    const double gap = u[i] - u_a[i];
    if (gap < -tol || xi[i] < -tol || std::min(gap, xi[i]) > tol)
      throw error(errc::invalid_point, "complementarity violated at cell " + std::to_string(i));
    if (xi[i] > tol)
      s.strongly_active.mask[i] = true;
    else if (gap > tol)
      s.inactive.mask[i] = true;
    else
      s.biactive.mask[i] = true;
  }
  return s;
}

inline StationarityCertificate check_weak(const MpccLinProblem &prob, const KktMultipliers &m,
                                          double tol) {
  validate_problem(prob);
  StationarityCertificate c;
  c.kind = CertKind::Weak;
  c.tol = tol;
  c.m = m;
  c.residuals = kkt_signs_residuals(prob, signs_weak(prob), m);
  c.verdict = c.residuals.max() <= tol;
  return c;
}

inline StationarityCertificate check_branch(const MpccLinProblem &prob, const KktMultipliers &m,
                                            const CellSet &beta, double tol) {
  validate_problem(prob);
  validate_beta(prob, beta);
  StationarityCertificate c;
  c.kind = CertKind::Branch;
  c.tol = tol;
  c.m = m;
  c.beta = beta.indices();
  c.residuals = kkt_signs_residuals(prob, signs_for_beta(prob, beta), m);
  c.verdict = c.residuals.max() <= tol;
  return c;
}

inline StationarityCertificate check_m(const MpccLinProblem &prob, const KktMultipliers &m,
                                       double tol) {
  validate_problem(prob);
  StationarityCertificate c;
  c.kind = CertKind::M;
  c.tol = tol;
  c.m = m;
  c.residuals = kkt_signs_residuals(prob, signs_weak(prob), m);
  c.m_condition = m_condition_residual(m.mu, m.nu, prob.biactive, tol);
  c.verdict = c.residuals.max() <= tol && c.m_condition <= tol;
  return c;
}

inline StationarityCertificate check_s(const MpccLinProblem &prob, const KktMultipliers &m,
                                       double tol) {
  validate_problem(prob);
  StationarityCertificate c;
  c.kind = CertKind::S;
  c.tol = tol;
  c.m = m;
  c.residuals = kkt_signs_residuals(prob, signs_strong(prob), m);
  c.verdict = c.residuals.max() <= tol;
  return c;
}

}  // namespace mstat
