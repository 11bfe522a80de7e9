#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <vector>

#include "grid.hpp"
#include "operators.hpp"
#include "simplex.hpp"

namespace mstat {

// min (1/2)<Hx, x> + <q, x>  s.t.  x >= lower  (cells with lower = -inf are
// unconstrained).  H must be positive definite on the feasible directions.
struct QpBoxProblem {
  LinOp hessian;
  GridFunction linear;
  GridFunction lower;
};

struct QpBoxResult {
  GridFunction x;
  GridFunction xi;  // multiplier, xi = Hx + q, complementary to x - lower
  int iterations = 0;
};

namespace detail {

// Primal-dual active set iteration with weight c = 1.  Each step fixes the
// active cells at their bound, solves the reduced stationarity system, and
// re-guesses the active set from xi + (l - x) > 0.  A repeated set is an
// exact KKT point: x = l and xi >= 0 on it, x >= l and xi = 0 off it, with
// complementarity holding exactly by construction.
struct PdasKernel {
  const Eigen::MatrixXd &H;
  const Eigen::VectorXd &q;
  const Eigen::VectorXd &lower;          // -inf where unconstrained
  const std::vector<char> *fixed_zero;   // optional: cells pinned to x = 0

  Eigen::VectorXd x, xi;
  int iterations = 0;

  bool pinned(int i) const { return fixed_zero && (*fixed_zero)[i]; }

  void solve(const std::vector<char> &active0, int max_iters) {
    const int n = static_cast<int>(q.size());
    std::vector<char> active = active0;
    for (int i = 0; i < n; ++i)
      if (lower[i] == -lp_infinity || pinned(i)) active[i] = 0;
    for (int it = 1; it <= max_iters; ++it) {
      iterations = it;
      std::vector<int> free_ix;
      for (int i = 0; i < n; ++i)
        if (!active[i] && !pinned(i)) free_ix.push_back(i);
      const int nf = static_cast<int>(free_ix.size());
      x = Eigen::VectorXd::Zero(n);
      for (int i = 0; i < n; ++i)
        if (active[i]) x[i] = lower[i];
      if (nf > 0) {
        Eigen::MatrixXd Hff(nf, nf);
        Eigen::VectorXd rhs(nf);
        for (int a = 0; a < nf; ++a) {
          const int i = free_ix[a];
          for (int b = 0; b < nf; ++b) Hff(a, b) = H(i, free_ix[b]);
          double s = q[i];
          for (int j = 0; j < n; ++j)
            if (active[j]) s += H(i, j) * lower[j];
          rhs[a] = -s;
        }
        Eigen::VectorXd xf = Hff.partialPivLu().solve(rhs);
        if (!xf.allFinite())
          throw error(errc::solver_failure, "active set subsystem is singular");
        for (int a = 0; a < nf; ++a) x[free_ix[a]] = xf[a];
      }
      xi = H * x + q;
      // exact complementarity: zero the multiplier off the active set
      for (int i = 0; i < n; ++i)
        if (!active[i]) xi[i] = 0.0;
      std::vector<char> next(n, 0);
      bool same = true;
      for (int i = 0; i < n; ++i) {
        if (lower[i] == -lp_infinity || pinned(i)) continue;
        const double trial = xi[i] + (lower[i] - x[i]);
        next[i] = trial > 0.0 ? 1 : 0;
        if (next[i] != active[i]) same = false;
      }
      if (same) return;
      active = next;
    }
    throw error(errc::convergence_failure, "active set iteration did not settle");
  }
};

}  // namespace detail

inline QpBoxResult qp_box_solve(const QpBoxProblem &qp,
                                const std::optional<GridFunction> &x0 = std::nullopt,
                                int max_iters = 100,
                                const std::vector<char> *fixed_zero = nullptr) {
  const GridPtr g = qp.linear.grid;
  require_same_grid(g, qp.lower.grid, "qp_box_solve");
  const int n = g->size();
  const Eigen::MatrixXd H = assemble_dense(qp.hessian, g);
  Eigen::VectorXd q(n), l(n);
  for (int i = 0; i < n; ++i) {
    q[i] = qp.linear[i];
    l[i] = qp.lower[i];
  }
  std::vector<char> active(n, 0);
  if (x0) {
    require_same_grid(g, x0->grid, "qp_box_solve x0");
    for (int i = 0; i < n; ++i)
      if (l[i] != -lp_infinity && (*x0)[i] <= l[i]) active[i] = 1;
  }
  detail::PdasKernel kernel{H, q, l, fixed_zero};
  kernel.solve(active, max_iters);
  QpBoxResult res{GridFunction(g), GridFunction(g), kernel.iterations};
  for (int i = 0; i < n; ++i) {
    res.x[i] = kernel.x[i];
    res.xi[i] = kernel.xi[i];
  }
  return res;
}

}  // namespace mstat
