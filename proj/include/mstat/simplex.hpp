#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace mstat {

inline constexpr double lp_feas_tol = 1e-9;
inline constexpr double lp_infinity = std::numeric_limits<double>::infinity();

struct VarBound {
  double lower = -lp_infinity;
  double upper = lp_infinity;
};

// min c^T x  s.t.  eq_rows x = eq_rhs,  bounds on x.
// Inequalities are expressed by the caller via slack variables.
struct LpProblem {
  int num_vars = 0;
  std::vector<double> objective;  // empty means zero
  std::vector<std::vector<double>> eq_rows;
  std::vector<double> eq_rhs;
  std::vector<VarBound> bounds;  // empty means all free
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

inline const char *lp_status_name(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
  }
  return "unknown";
}

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> x;    // Optimal: minimizer; Unbounded: a feasible point
  double value = 0.0;       // objective at x (Optimal only)
  std::vector<double> ray;  // Unbounded: descent direction from x
  double phase1_infeasibility = 0.0;
  int iterations = 0;
};

// Convenience wrapper: declare variables first, then rows.
struct LpBuilder {
  LpProblem p;

  int add_var(double lower, double upper, double obj = 0.0) {
    p.bounds.push_back({lower, upper});
    p.objective.push_back(obj);
    return p.num_vars++;
  }

  // Sparse terms get densified; scale divides the row by 1 + max|entry| to
  // keep tableau magnitudes near one.
  void add_eq(const std::vector<std::pair<int, double>> &terms, double rhs, bool scale = true) {
    std::vector<double> row(p.num_vars, 0.0);
    double amax = 0.0;
    for (auto [j, a] : terms) {
      row[j] += a;
    }
    for (double a : row) amax = std::max(amax, std::fabs(a));
    double s = scale ? 1.0 / (1.0 + amax) : 1.0;
    for (double &a : row) a *= s;
    p.eq_rows.push_back(std::move(row));
    p.eq_rhs.push_back(rhs * s);
  }

  // a^T x <= rhs, via a fresh slack variable.
  void add_le(std::vector<std::pair<int, double>> terms, double rhs, bool scale = true) {
    int s = add_var(0.0, lp_infinity, 0.0);
    for (auto &row : p.eq_rows) row.push_back(0.0);
    terms.emplace_back(s, 1.0);
    add_eq(terms, rhs, scale);
  }
};

inline double lp_equality_residual(const LpProblem &prob, const std::vector<double> &x) {
  double r = 0.0;
  for (size_t i = 0; i < prob.eq_rows.size(); ++i) {
    double s = -prob.eq_rhs[i];
    for (int j = 0; j < prob.num_vars; ++j) s += prob.eq_rows[i][j] * x[j];
    r = std::max(r, std::fabs(s));
  }
  return r;
}

namespace detail {

// Two-phase dense tableau simplex.  Entering rule is Dantzig with ties to the
// lowest index; after a long run of degenerate pivots it falls back to Bland
// until the objective strictly improves again, which rules out cycling while
// keeping the fast rule on the typical path.  All scans are in fixed order so
// results are bit-reproducible.
class SimplexSolver {
 public:
  explicit SimplexSolver(const LpProblem &prob) : prob_(prob) {}

  LpResult solve() {
    validate();
    if (presolve_fixed() && presolve_singletons() && presolve_empty_rows()) {
      build_standard_form();
      return run();
    }
    LpResult r;
    r.status = LpStatus::Infeasible;
    r.phase1_infeasibility = presolve_gap_;
    return r;
  }

 private:
  static constexpr double kRcTol = 1e-9;       // reduced cost threshold
  static constexpr double kPivotTol = 1e-10;   // ratio test denominator
  static constexpr double kZeroTol = 1e-12;    // structural zero
  static constexpr double kDegenTol = 1e-12;   // step considered degenerate
  static constexpr int kBlandTrigger = 40;     // degenerate run before Bland
  static constexpr int kMaxIters = 200000;
  static constexpr double kNoiseRel = 1e-11;   // noise floor relative to tableau scale
  static constexpr int kRefactorEvery = 500;   // pivots between scheduled rebuilds
  static constexpr int kMaxRefactor = 200;     // rebuild budget per solve

  enum class VarState { Active, Fixed, Eliminated };

  const LpProblem &prob_;
  int n_ = 0, m_ = 0;

  // presolve working copies
  std::vector<std::vector<double>> rows_;
  std::vector<double> rhs_;
  std::vector<double> obj_;
  double obj_const_ = 0.0;
  std::vector<VarState> state_;
  std::vector<double> fix_val_;
  std::vector<char> row_active_;
  double presolve_gap_ = 0.0;

  struct ElimRecord {
    int var;
    std::vector<double> row;
    double rhs;
  };
  std::vector<ElimRecord> elims_;

  // standard form
  struct VarMap {
    enum Kind { Split, Shift, NegShift, Range } kind;
    int j1 = -1, j2 = -1;
    double shift = 0.0;
  };
  std::vector<int> active_vars_;
  std::vector<VarMap> var_map_;  // parallel to active_vars_
  std::vector<double> a_std_;    // m_std x n_std row-major
  std::vector<double> b_std_;
  std::vector<double> c_std_;
  int m_std_ = 0, n_std_ = 0;

  // tableau
  std::vector<double> tab_;  // (m_kept + 2) x (n_total + 1) row-major
  int n_total_ = 0, ncols_ = 0;
  std::vector<int> basis_;
  std::vector<int> row_orig_;  // tableau row -> standard-form row
  int m_kept_ = 0;
  int iters_ = 0;
  double tab_scale_ = 1.0;  // running upper bound on max |tableau entry|
  int pivots_since_refactor_ = 0;
  bool fresh_ = false;  // no pivot since the tableau was last rebuilt
  int refactor_count_ = 0;
  bool refactor_disabled_ = false;

  double &tab(int r, int c) { return tab_[static_cast<size_t>(r) * ncols_ + c]; }

  void validate() {
    n_ = prob_.num_vars;
    m_ = static_cast<int>(prob_.eq_rows.size());
    if (static_cast<int>(prob_.eq_rhs.size()) != m_)
      throw error(errc::invalid_argument, "lp rhs size mismatch");
    for (const auto &row : prob_.eq_rows)
      if (static_cast<int>(row.size()) != n_)
        throw error(errc::invalid_argument, "lp row size mismatch");
    if (!prob_.objective.empty() && static_cast<int>(prob_.objective.size()) != n_)
      throw error(errc::invalid_argument, "lp objective size mismatch");
    if (!prob_.bounds.empty() && static_cast<int>(prob_.bounds.size()) != n_)
      throw error(errc::invalid_argument, "lp bounds size mismatch");
  }

  VarBound bound(int j) const { return prob_.bounds.empty() ? VarBound{} : prob_.bounds[j]; }

  bool presolve_fixed() {
    rows_ = prob_.eq_rows;
    rhs_ = prob_.eq_rhs;
    obj_ = prob_.objective;
    obj_.resize(n_, 0.0);
    state_.assign(n_, VarState::Active);
    fix_val_.assign(n_, 0.0);
    row_active_.assign(m_, 1);
    for (int j = 0; j < n_; ++j) {
      const auto b = bound(j);
      if (b.lower > b.upper) {
        presolve_gap_ = b.lower - b.upper;
        return false;
      }
      if (b.lower == b.upper) {
        state_[j] = VarState::Fixed;
        fix_val_[j] = b.lower;
        obj_const_ += obj_[j] * b.lower;
        for (int r = 0; r < m_; ++r) {
          if (rows_[r][j] != 0.0) {
            rhs_[r] -= rows_[r][j] * b.lower;
            rows_[r][j] = 0.0;
          }
        }
      }
    }
    return true;
  }

  // A free variable appearing in exactly one row determines itself from that
  // row, so both can be dropped and recovered after the solve.
  bool presolve_singletons() {
    for (int pass = 0; pass < 8; ++pass) {
      bool changed = false;
      std::vector<int> count(n_, 0), last_row(n_, -1);
      std::vector<double> row_max(m_, 0.0);
      for (int r = 0; r < m_; ++r) {
        if (!row_active_[r]) continue;
        for (int j = 0; j < n_; ++j) {
          const double a = std::fabs(rows_[r][j]);
          if (a > kZeroTol) {
            ++count[j];
            last_row[j] = r;
            row_max[r] = std::max(row_max[r], a);
          }
        }
      }
      for (int j = 0; j < n_; ++j) {
        if (state_[j] != VarState::Active) continue;
        const auto b = bound(j);
        if (b.lower != -lp_infinity || b.upper != lp_infinity) continue;
        if (count[j] != 1) continue;
        const int r = last_row[j];
        if (!row_active_[r]) continue;
        const double a = rows_[r][j];
        if (std::fabs(a) < 1e-8 * row_max[r]) continue;
        elims_.push_back({j, rows_[r], rhs_[r]});
        if (obj_[j] != 0.0) {
          for (int k = 0; k < n_; ++k) {
            if (k == j || rows_[r][k] == 0.0) continue;
            obj_[k] -= obj_[j] * rows_[r][k] / a;
          }
          obj_const_ += obj_[j] * rhs_[r] / a;
          obj_[j] = 0.0;
        }
        state_[j] = VarState::Eliminated;
        row_active_[r] = 0;
        changed = true;
      }
      if (!changed) break;
    }
    return true;
  }

  bool presolve_empty_rows() {
    for (int r = 0; r < m_; ++r) {
      if (!row_active_[r]) continue;
      double amax = 0.0;
      for (int j = 0; j < n_; ++j)
        if (state_[j] == VarState::Active) amax = std::max(amax, std::fabs(rows_[r][j]));
      if (amax <= kZeroTol) {
        if (std::fabs(rhs_[r]) > lp_feas_tol) {
          presolve_gap_ = std::fabs(rhs_[r]);
          return false;
        }
        row_active_[r] = 0;
      }
    }
    return true;
  }

  void build_standard_form() {
    active_vars_.clear();
    var_map_.clear();
    int next = 0;
    std::vector<std::pair<int, double>> range_rows;  // (std var, width)
    for (int j = 0; j < n_; ++j) {
      if (state_[j] != VarState::Active) continue;
      const auto b = bound(j);
      VarMap vm;
      if (b.lower == -lp_infinity && b.upper == lp_infinity) {
        vm = {VarMap::Split, next, next + 1, 0.0};
        next += 2;
      } else if (b.upper == lp_infinity) {
        vm = {VarMap::Shift, next++, -1, b.lower};
        obj_const_ += obj_[j] * b.lower;
      } else if (b.lower == -lp_infinity) {
        vm = {VarMap::NegShift, next++, -1, b.upper};
        obj_const_ += obj_[j] * b.upper;
      } else {
        vm = {VarMap::Range, next++, -1, b.lower};
        obj_const_ += obj_[j] * b.lower;
        range_rows.emplace_back(vm.j1, b.upper - b.lower);
      }
      active_vars_.push_back(j);
      var_map_.push_back(vm);
    }
    const int n_main = next;
    n_std_ = n_main + static_cast<int>(range_rows.size());

    std::vector<int> act_rows;
    for (int r = 0; r < m_; ++r)
      if (row_active_[r]) act_rows.push_back(r);
    m_std_ = static_cast<int>(act_rows.size()) + static_cast<int>(range_rows.size());

    a_std_.assign(static_cast<size_t>(m_std_) * n_std_, 0.0);
    b_std_.assign(m_std_, 0.0);
    c_std_.assign(n_std_, 0.0);
    for (size_t k = 0; k < active_vars_.size(); ++k) {
      const int j = active_vars_[k];
      const auto &vm = var_map_[k];
      switch (vm.kind) {
        case VarMap::Split:
          c_std_[vm.j1] = obj_[j];
          c_std_[vm.j2] = -obj_[j];
          break;
        case VarMap::NegShift: c_std_[vm.j1] = -obj_[j]; break;
        default: c_std_[vm.j1] = obj_[j]; break;
      }
    }
    for (size_t ri = 0; ri < act_rows.size(); ++ri) {
      const int r = act_rows[ri];
      double *arow = &a_std_[ri * n_std_];
      double shift_adj = 0.0;
      for (size_t k = 0; k < active_vars_.size(); ++k) {
        const double a = rows_[r][active_vars_[k]];
        if (a == 0.0) continue;
        const auto &vm = var_map_[k];
        switch (vm.kind) {
          case VarMap::Split:
            arow[vm.j1] += a;
            arow[vm.j2] -= a;
            break;
          case VarMap::NegShift:
            arow[vm.j1] -= a;
            shift_adj += a * vm.shift;
            break;
          default:
            arow[vm.j1] += a;
            shift_adj += a * vm.shift;
            break;
        }
      }
      b_std_[ri] = rhs_[r] - shift_adj;
    }
    for (size_t k = 0; k < range_rows.size(); ++k) {
      const size_t ri = act_rows.size() + k;
      double *arow = &a_std_[ri * n_std_];
      arow[range_rows[k].first] = 1.0;
      arow[n_main + static_cast<int>(k)] = 1.0;
      b_std_[ri] = range_rows[k].second;
    }
    // artificial columns are +e_i, so flip rows to make the rhs nonnegative
    for (int r = 0; r < m_std_; ++r) {
      if (b_std_[r] < 0.0) {
        b_std_[r] = -b_std_[r];
        double *arow = &a_std_[static_cast<size_t>(r) * n_std_];
        for (int j = 0; j < n_std_; ++j) arow[j] = -arow[j];
      }
    }
  }

  LpResult run() {
    n_total_ = n_std_ + m_std_;
    ncols_ = n_total_ + 1;
    tab_.assign(static_cast<size_t>(m_std_ + 2) * ncols_, 0.0);
    basis_.resize(m_std_);
    row_orig_.resize(m_std_);
    m_kept_ = m_std_;
    for (int r = 0; r < m_std_; ++r) {
      for (int j = 0; j < n_std_; ++j) tab(r, j) = a_std_[static_cast<size_t>(r) * n_std_ + j];
      tab(r, n_std_ + r) = 1.0;
      tab(r, n_total_) = b_std_[r];
      basis_[r] = n_std_ + r;
      row_orig_[r] = r;
    }
    // phase-1 reduced costs under the all-artificial basis
    const int p1 = m_std_, p2 = m_std_ + 1;
    for (int j = 0; j < n_std_; ++j) {
      double s = 0.0;
      for (int r = 0; r < m_std_; ++r) s += tab(r, j);
      tab_[static_cast<size_t>(p1) * ncols_ + j] = -s;
    }
    {
      double s = 0.0;
      for (int r = 0; r < m_std_; ++r) s += tab(r, n_total_);
      tab_[static_cast<size_t>(p1) * ncols_ + n_total_] = -s;
    }
    for (int j = 0; j < n_std_; ++j) tab_[static_cast<size_t>(p2) * ncols_ + j] = c_std_[j];
    tab_scale_ = current_scale();
    fresh_ = true;
    pivots_since_refactor_ = 0;

    LpResult res;
    if (!pivot_loop(p1, n_total_)) throw error(errc::solver_failure, "phase 1 unbounded");
    const double phase1 = -tab(p1, n_total_);
    if (phase1 > lp_feas_tol) {
      res.status = LpStatus::Infeasible;
      res.phase1_infeasibility = phase1;
      res.iterations = iters_;
      return res;
    }
    drive_out_artificials();
    const bool bounded = pivot_loop(p2, n_std_);
    return finish(bounded);
  }

  // Pivot until no entering column improves the guiding cost row.  Returns
  // false when an unbounded direction is found (entering_limit < n_total_
  // means phase 2, where that can happen).  cost_row is the tableau row index
  // of the guiding reduced costs.  A terminal verdict is only accepted on a
  // fresh tableau; on a drifted one the tableau is rebuilt first so that
  // accumulated roundoff cannot fake optimality or unboundedness.
  bool pivot_loop(int cost_row, int entering_limit) {
    const bool phase1 = cost_row == m_std_;
    bool bland = false;
    int degen_run = 0;
    const double *zrow = &tab_[static_cast<size_t>(cost_row) * ncols_];
    for (;;) {
      if (++iters_ > kMaxIters) throw error(errc::solver_failure, "simplex iteration limit");
      if (pivots_since_refactor_ >= kRefactorEvery) try_refactor();
      int enter = -1;
      if (!bland) {
        double best = -kRcTol;
        for (int j = 0; j < entering_limit; ++j) {
          if (zrow[j] < best) {
            best = zrow[j];
            enter = j;
          }
        }
      } else {
        for (int j = 0; j < entering_limit; ++j) {
          if (zrow[j] < -kRcTol) {
            enter = j;
            break;
          }
        }
      }
      if (enter < 0) {
        if (!tableau_fresh()) {
          try_refactor();
          continue;
        }
        return true;
      }

      // entries below the noise floor of the current tableau scale must not
      // pivot: they are roundoff, and dividing by them blows the tableau up
      const double eps_piv = std::max(kPivotTol, kNoiseRel * tab_scale_);
      int leave = -1;
      double theta = 0.0;
      if (!bland) {
        // two-pass ratio test: find the minimal ratio with a small feasibility
        // slack, then among rows within the slack take the largest pivot
        // element, which keeps the tableau well conditioned
        double theta_rel = lp_infinity;
        for (int r = 0; r < m_kept_; ++r) {
          const double a = tab(r, enter);
          if (a <= eps_piv) continue;
          theta_rel = std::min(theta_rel, (tab(r, n_total_) + lp_feas_tol) / a);
        }
        double best_a = 0.0;
        for (int r = 0; r < m_kept_; ++r) {
          const double a = tab(r, enter);
          if (a <= eps_piv) continue;
          if (tab(r, n_total_) / a > theta_rel) continue;
          if (a > best_a) {
            best_a = a;
            leave = r;
          }
        }
        if (leave >= 0) theta = std::max(0.0, tab(leave, n_total_) / best_a);
      } else {
        // under the Bland fallback use the strict lowest-index rule the
        // anti-cycling argument needs
        for (int r = 0; r < m_kept_; ++r) {
          const double a = tab(r, enter);
          if (a <= eps_piv) continue;
          const double ratio = tab(r, n_total_) / a;
          if (leave < 0 || ratio < theta - 1e-12 * (1.0 + std::fabs(theta)) ||
              (std::fabs(ratio - theta) <= 1e-12 * (1.0 + std::fabs(theta)) &&
               basis_[r] < basis_[leave])) {
            leave = r;
            theta = ratio;
          }
        }
      }
      if (leave < 0) {
        if (!tableau_fresh()) {
          try_refactor();
          continue;
        }
        if (phase1) {
          // the phase-1 objective is bounded below by zero, so an unbounded
          // column here is numerically dead: its reduced cost is noise
          tab(cost_row, enter) = 0.0;
          continue;
        }
        unbounded_enter_ = enter;
        return false;
      }
      if (theta <= kDegenTol) {
        if (++degen_run >= kBlandTrigger) bland = true;
      } else {
        degen_run = 0;
        bland = false;
      }
      pivot(leave, enter);
    }
  }

  void pivot(int prow, int pcol) {
    double *prow_ptr = &tab_[static_cast<size_t>(prow) * ncols_];
    const double pv = prow_ptr[pcol];
    const double inv = 1.0 / pv;
    double mx = tab_scale_;
    for (int j = 0; j <= n_total_; ++j) {
      prow_ptr[j] *= inv;
      mx = std::max(mx, std::fabs(prow_ptr[j]));
    }
    prow_ptr[pcol] = 1.0;
    const int nrows = m_kept_ + 2;
    for (int r = 0; r < nrows; ++r) {
      // cost rows sit directly after the kept rows
      const int rr = (r < m_kept_) ? r : (m_std_ + (r - m_kept_));
      if (rr == prow) continue;
      double *row = &tab_[static_cast<size_t>(rr) * ncols_];
      const double f = row[pcol];
      if (std::fabs(f) > 1e-300) {
        for (int j = 0; j <= n_total_; ++j) {
          row[j] -= f * prow_ptr[j];
          mx = std::max(mx, std::fabs(row[j]));
        }
        row[pcol] = 0.0;
      }
    }
    // only ever grows between rebuilds; refactorize() resets it exactly
    tab_scale_ = mx;
    basis_[prow] = pcol;
    fresh_ = false;
    ++pivots_since_refactor_;
  }

  bool tableau_fresh() const { return fresh_ || refactor_disabled_; }

  double current_scale() const {
    double mx = 1.0;
    for (int r = 0; r < m_kept_; ++r)
      for (int j = 0; j <= n_total_; ++j)
        mx = std::max(mx, std::fabs(tab_[static_cast<size_t>(r) * ncols_ + j]));
    for (int cr = m_std_; cr < m_std_ + 2; ++cr)
      for (int j = 0; j <= n_total_; ++j)
        mx = std::max(mx, std::fabs(tab_[static_cast<size_t>(cr) * ncols_ + j]));
    return mx;
  }

  void try_refactor() {
    if (refactor_disabled_) return;
    if (++refactor_count_ > kMaxRefactor || !refactorize()) refactor_disabled_ = true;
  }

  // Rebuild the tableau for the current basis from the original standard-form
  // data.  Each pivot multiplies roundoff into the tableau, and once that
  // noise crosses the pivot threshold the ratio test can no longer tell
  // structure from drift; solving B Y = [A I b] afresh restores working
  // precision.  Leaves the tableau untouched when the basis solve is not
  // trustworthy.
  bool refactorize() {
    const int p1 = m_std_, p2 = m_std_ + 1;
    double *z1 = &tab_[static_cast<size_t>(p1) * ncols_];
    double *z2 = &tab_[static_cast<size_t>(p2) * ncols_];
    if (m_kept_ == 0) {
      for (int j = 0; j <= n_total_; ++j) {
        z1[j] = (j < n_std_ || j == n_total_) ? 0.0 : 1.0;
        z2[j] = (j < n_std_) ? c_std_[j] : 0.0;
      }
      tab_scale_ = current_scale();
      fresh_ = true;
      pivots_since_refactor_ = 0;
      return true;
    }
    Eigen::MatrixXd B(m_kept_, m_kept_);
    for (int c = 0; c < m_kept_; ++c) {
      const int v = basis_[c];
      for (int r = 0; r < m_kept_; ++r) {
        const int orig = row_orig_[r];
        if (v < n_std_)
          B(r, c) = a_std_[static_cast<size_t>(orig) * n_std_ + v];
        else
          B(r, c) = (orig == v - n_std_) ? 1.0 : 0.0;
      }
    }
    Eigen::MatrixXd M(m_kept_, n_total_ + 1);
    for (int r = 0; r < m_kept_; ++r) {
      const int orig = row_orig_[r];
      for (int j = 0; j < n_std_; ++j) M(r, j) = a_std_[static_cast<size_t>(orig) * n_std_ + j];
      for (int j = 0; j < m_std_; ++j) M(r, n_std_ + j) = (orig == j) ? 1.0 : 0.0;
      M(r, n_total_) = b_std_[orig];
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
    Eigen::MatrixXd Y = lu.solve(M);
    if (!Y.allFinite()) return false;
    const Eigen::VectorXd bres = B * Y.col(n_total_) - M.col(n_total_);
    const double bmax = M.col(n_total_).cwiseAbs().maxCoeff();
    if (bres.cwiseAbs().maxCoeff() > 1e-6 * (1.0 + bmax)) return false;

    for (int r = 0; r < m_kept_; ++r) {
      double *row = &tab_[static_cast<size_t>(r) * ncols_];
      for (int j = 0; j <= n_total_; ++j) row[j] = Y(r, j);
    }
    Eigen::RowVectorXd cb1(m_kept_), cb2(m_kept_);
    for (int r = 0; r < m_kept_; ++r) {
      cb1[r] = basis_[r] >= n_std_ ? 1.0 : 0.0;
      cb2[r] = basis_[r] < n_std_ ? c_std_[basis_[r]] : 0.0;
    }
    const Eigen::RowVectorXd s1 = cb1 * Y;
    const Eigen::RowVectorXd s2 = cb2 * Y;
    for (int j = 0; j <= n_total_; ++j) {
      const double cj1 = (j < n_std_ || j == n_total_) ? 0.0 : 1.0;
      const double cj2 = (j < n_std_) ? c_std_[j] : 0.0;
      z1[j] = cj1 - s1[j];
      z2[j] = cj2 - s2[j];
    }
    // basic columns are exactly unit and basic reduced costs exactly zero
    for (int r = 0; r < m_kept_; ++r) {
      const int v = basis_[r];
      for (int rr = 0; rr < m_kept_; ++rr) tab(rr, v) = (rr == r) ? 1.0 : 0.0;
      z1[v] = 0.0;
      z2[v] = 0.0;
    }
    tab_scale_ = current_scale();
    fresh_ = true;
    pivots_since_refactor_ = 0;
    return true;
  }

  // After phase 1, pivot surviving artificials onto real columns where
  // possible and delete the rows that turn out redundant.
  void drive_out_artificials() {
    for (int r = 0; r < m_kept_; ++r) {
      if (basis_[r] < n_std_) continue;
      int col = -1;
      double best = 1e-7;
      for (int j = 0; j < n_std_; ++j) {
        const double a = std::fabs(tab(r, j));
        if (a > best) {
          best = a;
          col = j;
        }
      }
      if (col >= 0) pivot(r, col);
    }
    // compact kept rows in place; the cost rows stay at their fixed
    // positions m_std_ and m_std_ + 1 and are never moved
    int w = 0;
    for (int r = 0; r < m_kept_; ++r) {
      if (basis_[r] >= n_std_) continue;  // redundant row, drop it
      if (w != r) {
        std::copy(&tab_[static_cast<size_t>(r) * ncols_],
                  &tab_[static_cast<size_t>(r) * ncols_] + ncols_,
                  &tab_[static_cast<size_t>(w) * ncols_]);
        basis_[w] = basis_[r];
        row_orig_[w] = row_orig_[r];
      }
      ++w;
    }
    m_kept_ = w;
  }

  int unbounded_enter_ = -1;

  std::vector<double> std_point_from_tableau() const {
    std::vector<double> x(n_std_, 0.0);
    for (int r = 0; r < m_kept_; ++r)
      if (basis_[r] < n_std_)
        x[basis_[r]] = tab_[static_cast<size_t>(r) * ncols_ + n_total_];
    return x;
  }

  double std_residual(const std::vector<double> &x) const {
    double res = 0.0;
    for (int r = 0; r < m_std_; ++r) {
      double s = -b_std_[r];
      const double *arow = &a_std_[static_cast<size_t>(r) * n_std_];
      for (int j = 0; j < n_std_; ++j) s += arow[j] * x[j];
      res = std::max(res, std::fabs(s));
    }
    return res;
  }

  // Re-solve the final basis against the original standard-form data to wash
  // out drift accumulated over many pivots.
  std::vector<double> refreshed_std_point() const {
    std::vector<double> x1 = std_point_from_tableau();
    if (m_kept_ == 0) return x1;
    Eigen::MatrixXd B(m_kept_, m_kept_);
    for (int c = 0; c < m_kept_; ++c) {
      const int v = basis_[c];
      for (int r = 0; r < m_kept_; ++r) {
        const int orig = row_orig_[r];
        if (v < n_std_)
          B(r, c) = a_std_[static_cast<size_t>(orig) * n_std_ + v];
        else
          B(r, c) = (orig == v - n_std_) ? 1.0 : 0.0;
      }
    }
    Eigen::VectorXd rhs(m_kept_);
    for (int r = 0; r < m_kept_; ++r) rhs[r] = b_std_[row_orig_[r]];
    Eigen::VectorXd xb = B.partialPivLu().solve(rhs);
    std::vector<double> x2(n_std_, 0.0);
    bool ok = xb.allFinite();
    if (ok) {
      for (int r = 0; r < m_kept_; ++r)
        if (basis_[r] < n_std_) x2[basis_[r]] = xb[r];
      if (std_residual(x2) <= std_residual(x1)) return x2;
    }
    return x1;
  }

  std::vector<double> map_std_to_original(const std::vector<double> &xs) const {
    std::vector<double> x(n_, 0.0);
    for (int j = 0; j < n_; ++j)
      if (state_[j] == VarState::Fixed) x[j] = fix_val_[j];
    for (size_t k = 0; k < active_vars_.size(); ++k) {
      const auto &vm = var_map_[k];
      double v = 0.0;
      switch (vm.kind) {
        case VarMap::Split: v = xs[vm.j1] - xs[vm.j2]; break;
        case VarMap::NegShift: v = vm.shift - xs[vm.j1]; break;
        default: v = vm.shift + xs[vm.j1]; break;
      }
      x[active_vars_[k]] = v;
    }
    for (auto it = elims_.rbegin(); it != elims_.rend(); ++it) {
      double s = it->rhs;
      const double a = it->row[it->var];
      for (int k = 0; k < n_; ++k)
        if (k != it->var && it->row[k] != 0.0) s -= it->row[k] * x[k];
      x[it->var] = s / a;
    }
    return x;
  }

  std::vector<double> map_std_ray_to_original(const std::vector<double> &ds) const {
    std::vector<double> d(n_, 0.0);
    for (size_t k = 0; k < active_vars_.size(); ++k) {
      const auto &vm = var_map_[k];
      double v = 0.0;
      switch (vm.kind) {
        case VarMap::Split: v = ds[vm.j1] - ds[vm.j2]; break;
        case VarMap::NegShift: v = -ds[vm.j1]; break;
        default: v = ds[vm.j1]; break;
      }
      d[active_vars_[k]] = v;
    }
    for (auto it = elims_.rbegin(); it != elims_.rend(); ++it) {
      double s = 0.0;
      const double a = it->row[it->var];
      for (int k = 0; k < n_; ++k)
        if (k != it->var && it->row[k] != 0.0) s -= it->row[k] * d[k];
      d[it->var] = s / a;
    }
    return d;
  }

  LpResult finish(bool bounded) {
    LpResult res;
    res.iterations = iters_;
    const std::vector<double> xs = refreshed_std_point();
    res.x = map_std_to_original(xs);
    if (!bounded) {
      res.status = LpStatus::Unbounded;
      std::vector<double> ds(n_std_, 0.0);
      if (unbounded_enter_ >= 0 && unbounded_enter_ < n_std_) ds[unbounded_enter_] = 1.0;
      for (int r = 0; r < m_kept_; ++r)
        if (basis_[r] < n_std_) ds[basis_[r]] = -tab_[static_cast<size_t>(r) * ncols_ + unbounded_enter_];
      res.ray = map_std_ray_to_original(ds);
      return res;
    }
    res.status = LpStatus::Optimal;
    double v = 0.0;
    if (!prob_.objective.empty())
      for (int j = 0; j < n_; ++j) v += prob_.objective[j] * res.x[j];
    res.value = v;
    return res;
  }
};

}  // namespace detail

inline LpResult lp_solve(const LpProblem &prob) { return detail::SimplexSolver(prob).solve(); }

}  // namespace mstat
