#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "normalize.hpp"
#include "stationarity.hpp"

namespace mstat {

// Branch-stationary multipliers for one subset beta of the biactive cells,
// normalized so that a certified cellwise bound holds.
struct FamilyMember {
  CellSet beta;
  NormalizedMultipliers mult;
};

// The complete branch family: one member per subset of the biactive cells,
// ordered by subset bitmask over biactive_cells.
struct MultiplierFamily {
  MpccLinProblem problem;
  std::vector<int> biactive_cells;
  std::vector<FamilyMember> members;
};

// Per-cell mode used to encode the M-condition with closed constraints: a
// combination whose mu and nu are both nonpositive at a cell, or whose mu or
// nu vanishes there, satisfies the disjunction either through strict
// negativity or through a zero product.
enum class PatternCode { BothNonpositive, MuZero, NuZero };

using SignPattern = std::vector<PatternCode>;

inline const char *pattern_code_name(PatternCode c) {
  switch (c) {
    case PatternCode::BothNonpositive: return "both-nonpositive";
    case PatternCode::MuZero: return "mu-zero";
    case PatternCode::NuZero: return "nu-zero";
  }
  return "unknown";
}

struct SynthesisResult {
  KktMultipliers mult;
  std::vector<double> weights;
  SignPattern pattern;
};

struct PatternReport {
  SignPattern pattern;
  bool feasible = false;
  std::vector<double> weights;
};

inline void require_family_operator(const MpccLinProblem &prob) {
  if (is_unit_average_op(prob.a_op)) return;
  if (prob.inactive.count() == 0 && adjoint_preserves_nonneg(prob.a_op, prob.grid)) return;
  throw error(errc::unsupported_operator,
              "branch family needs the identity-plus-average operator, or a nonnegativity "
              "preserving adjoint with empty inactive class");
}

// Solve every branch system over subsets of the biactive cells and normalize
// the solutions.  Any infeasible branch refutes the family property and is
// reported with its subset as witness.
inline MultiplierFamily enumerate_family(const MpccLinProblem &prob, int cap = 12) {
  validate_problem(prob);
  require_family_operator(prob);
  MultiplierFamily fam;
  fam.problem = prob;
  fam.biactive_cells = prob.biactive.indices();
  const int m = static_cast<int>(fam.biactive_cells.size());
  if (m > cap)
    throw error(errc::problem_too_large, std::to_string(m) + " biactive cells exceed the cap of " +
                                             std::to_string(cap));
  const std::uint64_t count = std::uint64_t{1} << m;
  fam.members.reserve(count);
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    CellSet beta(prob.grid);
    for (int j = 0; j < m; ++j)
      if (mask & (std::uint64_t{1} << j)) beta.add(fam.biactive_cells[j]);
    const KktSolveResult r = solve_kkt_beta(prob, beta);
    if (r.status != KktSolveStatus::Found) {
      std::string msg = "branch system infeasible for subset {";
      bool first = true;
      for (int i : beta.indices()) {
        if (!first) msg += ", ";
        msg += std::to_string(i);
        first = false;
      }
      msg += "}";
      throw not_a_forall_error(beta.indices(), msg);
    }
    fam.members.push_back({beta, normalize_dispatch(prob, beta, r.m)});
  }
  return fam;
}

namespace detail {

// Member values of mu and nu at the biactive cells, laid out for fast
// constraint assembly.
struct FamilyTables {
  int num_members = 0;
  int num_cells = 0;
  std::vector<double> mu;  // num_members * num_cells, member major
  std::vector<double> nu;

  explicit FamilyTables(const MultiplierFamily &fam) {
    num_members = static_cast<int>(fam.members.size());
    num_cells = static_cast<int>(fam.biactive_cells.size());
    mu.resize(static_cast<std::size_t>(num_members) * num_cells);
    nu.resize(static_cast<std::size_t>(num_members) * num_cells);
    for (int k = 0; k < num_members; ++k)
      for (int j = 0; j < num_cells; ++j) {
        const int cell = fam.biactive_cells[j];
        mu[static_cast<std::size_t>(k) * num_cells + j] = fam.members[k].mult.m.mu[cell];
        nu[static_cast<std::size_t>(k) * num_cells + j] = fam.members[k].mult.m.nu[cell];
      }
  }

  double mu_at(int k, int j) const { return mu[static_cast<std::size_t>(k) * num_cells + j]; }
  double nu_at(int k, int j) const { return nu[static_cast<std::size_t>(k) * num_cells + j]; }
};

// Feasibility LP for the first `depth` cells of a pattern: convex weights
// whose combined mu and nu meet the per-cell mode constraints.
inline LpResult solve_pattern_lp(const FamilyTables &tab, const SignPattern &pattern, int depth) {
  LpBuilder b;
  for (int k = 0; k < tab.num_members; ++k) b.add_var(0.0, lp_infinity, 0.0);
  {
    std::vector<std::pair<int, double>> terms;
    for (int k = 0; k < tab.num_members; ++k) terms.emplace_back(k, 1.0);
    b.add_eq(terms, 1.0);
  }
  std::vector<std::pair<int, double>> terms(tab.num_members);
  auto fill = [&](bool use_nu, int j) {
    for (int k = 0; k < tab.num_members; ++k)
      terms[k] = {k, use_nu ? tab.nu_at(k, j) : tab.mu_at(k, j)};
  };
  for (int j = 0; j < depth; ++j) {
    switch (pattern[j]) {
      case PatternCode::BothNonpositive:
        fill(false, j);
        b.add_le(terms, 0.0);
        fill(true, j);
        b.add_le(terms, 0.0);
        break;
      case PatternCode::MuZero:
        fill(false, j);
        b.add_eq(terms, 0.0);
        break;
      case PatternCode::NuZero:
        fill(true, j);
        b.add_eq(terms, 0.0);
        break;
    }
  }
  return lp_solve(b.p);
}

inline KktMultipliers combine_members(const MultiplierFamily &fam,
                                      const std::vector<double> &weights) {
  KktMultipliers out = zero_multipliers(fam.problem.grid);
  const int n = fam.problem.grid->size();
  for (int k = 0; k < static_cast<int>(fam.members.size()); ++k) {
    const double w = weights[k];
    if (w == 0.0) continue;
    const KktMultipliers &m = fam.members[k].mult.m;
    for (int i = 0; i < n; ++i) {
      out.p[i] += w * m.p[i];
      out.mu[i] += w * m.mu[i];
      out.nu[i] += w * m.nu[i];
      out.lam[i] += w * m.lam[i];
    }
  }
  return out;
}

}  // namespace detail

// Walk over all sign patterns in lexicographic order (BothNonpositive <
// MuZero < NuZero per cell, first cell most significant) and return the first
// pattern whose feasibility LP has a solution.  A depth first walk with
// prefix relaxations visits patterns in exactly that order, and a prefix
// whose relaxed LP is already infeasible rules out every completion, so the
// first full hit is the lexicographically smallest feasible pattern.
inline SynthesisResult synthesize(const MultiplierFamily &fam, double tol) {
  if (fam.members.empty()) throw error(errc::invalid_argument, "empty multiplier family");
  const detail::FamilyTables tab(fam);
  const int m = tab.num_cells;
  SignPattern pattern(m, PatternCode::BothNonpositive);
  double nearest = lp_infinity;
  std::vector<double> weights;

  std::function<bool(int)> walk = [&](int depth) -> bool {
    const LpResult r = detail::solve_pattern_lp(tab, pattern, depth);
    if (r.status == LpStatus::Infeasible) {
      nearest = std::min(nearest, r.phase1_infeasibility);
      return false;
    }
    if (depth == m) {
      weights.assign(r.x.begin(), r.x.begin() + tab.num_members);
      return true;
    }
    for (PatternCode c : {PatternCode::BothNonpositive, PatternCode::MuZero, PatternCode::NuZero}) {
      pattern[depth] = c;
      if (walk(depth + 1)) return true;
    }
    return false;
  };

  if (!walk(0))
    throw error(errc::synthesis_failed,
                "no sign pattern admits a convex combination (smallest constraint violation " +
                    format_double(nearest) + ")");
  SynthesisResult out;
  out.mult = detail::combine_members(fam, weights);
  out.weights = std::move(weights);
  out.pattern = std::move(pattern);
  const double mc =
      m_condition_residual(out.mult.mu, out.mult.nu, fam.problem.biactive, tol);
  if (mc > std::max(tol, 1e-8))
    throw error(errc::internal_error,
                "combined multipliers violate the product condition by " + format_double(mc));
  return out;
}

// Full scan over all 3^m patterns, for diagnostics.  Reports every pattern's
// feasibility and, when feasible, the witness weights.
inline std::vector<PatternReport> scan_patterns(const MultiplierFamily &fam) {
  if (fam.members.empty()) throw error(errc::invalid_argument, "empty multiplier family");
  const detail::FamilyTables tab(fam);
  const int m = tab.num_cells;
  std::vector<PatternReport> reports;
  SignPattern pattern(m, PatternCode::BothNonpositive);
  for (;;) {
    PatternReport rep;
    rep.pattern = pattern;
    const LpResult r = detail::solve_pattern_lp(tab, pattern, m);
    rep.feasible = r.status != LpStatus::Infeasible;
    if (rep.feasible) rep.weights.assign(r.x.begin(), r.x.begin() + tab.num_members);
    reports.push_back(std::move(rep));
    // odometer step, last cell fastest, so reports come out in
    // lexicographic order
    int j = m - 1;
    while (j >= 0 && pattern[j] == PatternCode::NuZero) {
      pattern[j] = PatternCode::BothNonpositive;
      --j;
    }
    if (j < 0) break;
    pattern[j] = pattern[j] == PatternCode::BothNonpositive ? PatternCode::MuZero
                                                            : PatternCode::NuZero;
  }
  return reports;
}

namespace detail {

// Rewrites a problem with operator d1 I + d2 <1, .> as an equivalent one with
// the unit identity-plus-average operator: scaling the grid weights by d2/d1
// absorbs d2 into the weighted mean, and dividing the u cost by d1 turns the
// u row into the unit form.  Multipliers map back with mu scaled by d1, the
// other components unchanged.
struct RescaledProblem {
  MpccLinProblem prob;
  double d1 = 1.0;
};

inline RescaledProblem rescale_to_unit_average(const MpccLinProblem &src, double d1, double d2) {
  auto g = std::make_shared<Grid>(*src.grid);
  for (double &w : g->weights) w *= d2 / d1;
  GridPtr gp = g;
  RescaledProblem out;
  out.d1 = d1;
  out.prob.grid = gp;
  out.prob.a_op = op_id_plus_average(1.0, 1.0);
  std::vector<double> fu = src.f_u.values;
  for (double &v : fu) v /= d1;
  out.prob.f_u = GridFunction(gp, std::move(fu));
  out.prob.f_w = GridFunction(gp, src.f_w.values);
  out.prob.f_xi = GridFunction(gp, src.f_xi.values);
  auto carry = [&](const CellSet &s) {
    CellSet r(gp);
    r.mask = s.mask;
    return r;
  };
  out.prob.strongly_active = carry(src.strongly_active);
  out.prob.biactive = carry(src.biactive);
  out.prob.inactive = carry(src.inactive);
  out.prob.w_bound_set = carry(src.w_bound_set);
  return out;
}

}  // namespace detail

// Constructive M-stationarity certificate: enumerate the branch family,
// synthesize a convex combination satisfying a closed sign pattern, and
// verify the result against the independent checker.  Operators of the form
// d1 I + d2 <1, .> with positive coefficients are reduced to the unit form
// first; positive scaling preserves both the sign classes and the product
// condition, so the certificate transfers back.
inline StationarityCertificate certify_m(const MpccLinProblem &prob, int cap = 12,
                                         double tol = 1e-9) {
  validate_problem(prob);
  if (const auto *s = std::get_if<ScaledIdPlusAverage>(&prob.a_op.v);
      s && s->d1 > 0.0 && s->d2 > 0.0 && !(s->d1 == 1.0 && s->d2 == 1.0)) {
    const detail::RescaledProblem re = detail::rescale_to_unit_average(prob, s->d1, s->d2);
    const StationarityCertificate inner = certify_m(re.prob, cap, tol);
    KktMultipliers mapped = zero_multipliers(prob.grid);
    mapped.p.values = inner.m.p.values;
    mapped.nu.values = inner.m.nu.values;
    mapped.lam.values = inner.m.lam.values;
    for (int i = 0; i < prob.grid->size(); ++i) mapped.mu[i] = re.d1 * inner.m.mu[i];
    return check_m(prob, mapped, tol);
  }
  const MultiplierFamily fam = enumerate_family(prob, cap);
  const SynthesisResult syn = synthesize(fam, tol);
  return check_m(prob, syn.mult, tol);
}

}  // namespace mstat
