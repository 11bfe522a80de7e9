#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <variant>
#include <vector>

#include "grid.hpp"

namespace mstat {

// Self-adjointness below is always meant w.r.t. the weighted inner product.
// Matrix operators act on midpoint values; their weighted adjoint is
// W^{-1} M^T W where W = diag(weights).

struct ScaledIdentity {
  double factor = 1.0;
};

// v -> d1 v + d2 <1, v> 1.  Self-adjoint for any grid.
struct ScaledIdPlusAverage {
  double d1 = 1.0;
  double d2 = 1.0;
};

// v -> c <1, v> 1.  Rank one, self-adjoint.
struct AverageRankOne {
  double c = 1.0;
};

struct MatrixOp {
  std::shared_ptr<const Eigen::MatrixXd> mat;
};

// Solution operator of -u'' = f on (a, b) with zero boundary values,
// discretized with the 3-point stencil on cell midpoints.  Boundary rows use
// ghost reflection (u_ghost = -u_first), which pins u = 0 at the interval
// ends and keeps the scheme second order at midpoints.
struct InverseDirichletLaplacian1D {};

// -u'' with zero ghost midpoints (u_{-1} = u_n = 0).  This is the operator
// whose quadratic form equals h1_seminorm_sq exactly, so it is the right
// discrete Laplacian for the H^1_0 penalty on w.
struct DiscreteLaplacian1D {};

struct LinOp;

// v -> S*(S v)
struct GramComposition {
  std::shared_ptr<const LinOp> inner;
};

struct OpSum {
  std::vector<std::shared_ptr<const LinOp>> terms;
};

struct LinOp {
  std::variant<ScaledIdentity, ScaledIdPlusAverage, AverageRankOne, MatrixOp,
               InverseDirichletLaplacian1D, DiscreteLaplacian1D, GramComposition, OpSum>
      v;
};

inline LinOp op_scaled_identity(double factor) { return {ScaledIdentity{factor}}; }
inline LinOp op_id_plus_average(double d1, double d2) { return {ScaledIdPlusAverage{d1, d2}}; }
inline LinOp op_average(double c) { return {AverageRankOne{c}}; }
inline LinOp op_matrix(Eigen::MatrixXd m) {
  return {MatrixOp{std::make_shared<const Eigen::MatrixXd>(std::move(m))}};
}
inline LinOp op_inverse_laplacian() { return {InverseDirichletLaplacian1D{}}; }
inline LinOp op_laplacian() { return {DiscreteLaplacian1D{}}; }
inline LinOp op_gram(LinOp inner) {
  return {GramComposition{std::make_shared<const LinOp>(std::move(inner))}};
}
inline LinOp op_sum(LinOp x, LinOp y) {
  OpSum s;
  s.terms.push_back(std::make_shared<const LinOp>(std::move(x)));
  s.terms.push_back(std::make_shared<const LinOp>(std::move(y)));
  return {std::move(s)};
}

inline double integral(const GridFunction &u) {
  double s = 0.0;
  for (int i = 0; i < u.size(); ++i) s += u.grid->weights[i] * u[i];
  return s;
}

// Thomas solve of the midpoint stencil for -u'' = rhs, u(a) = u(b) = 0.
inline GridFunction solve_inverse_laplacian(const GridPtr &g, const GridFunction &rhs) {
  require_same_grid(g, rhs.grid, "solve_inverse_laplacian");
  const int n = g->size();
  const double h = uniform_spacing(*g);
  const double h2 = h * h;
  std::vector<double> diag(n, 2.0 / h2), c(n, 0.0), d(n);
  if (n == 1) {
    // single cell: row is (3 u_0 + ghost terms)/h^2 with both ghosts reflected
    GridFunction u(g);
    u[0] = rhs[0] * h2 / 4.0;
    return u;
  }
  diag[0] = 3.0 / h2;
  diag[n - 1] = 3.0 / h2;
  const double off = -1.0 / h2;
  // forward sweep
  c[0] = off / diag[0];
  d[0] = rhs[0] / diag[0];
  for (int i = 1; i < n; ++i) {
    const double m = diag[i] - off * c[i - 1];
    c[i] = off / m;
    d[i] = (rhs[i] - off * d[i - 1]) / m;
  }
  GridFunction u(g);
  u[n - 1] = d[n - 1];
  for (int i = n - 2; i >= 0; --i) u[i] = d[i] - c[i] * u[i + 1];
  return u;
}

// -u'' with zero ghost midpoints; the quadratic form of this matrix is
// exactly h1_seminorm_sq.
inline GridFunction apply_laplacian(const GridFunction &u) {
  const int n = u.size();
  const double h = uniform_spacing(*u.grid);
  const double h2 = h * h;
  GridFunction r(u.grid);
  for (int i = 0; i < n; ++i) {
    const double left = (i > 0) ? u[i - 1] : 0.0;
    const double right = (i + 1 < n) ? u[i + 1] : 0.0;
    r[i] = (-left + 2.0 * u[i] - right) / h2;
  }
  return r;
}

inline double h1_seminorm_sq(const GridFunction &u) {
  const int n = u.size();
  const double h = uniform_spacing(*u.grid);
  double s = u[0] * u[0] + u[n - 1] * u[n - 1];
  for (int i = 0; i + 1 < n; ++i) {
    const double d = u[i + 1] - u[i];
    s += d * d;
  }
  return s / h;
}

inline GridFunction apply(const LinOp &op, const GridFunction &u);
inline GridFunction apply_adjoint(const LinOp &op, const GridFunction &u);

namespace detail {

struct ApplyVisitor {
  const GridFunction &u;
  bool adjoint;

  GridFunction operator()(const ScaledIdentity &o) const { return o.factor * u; }

  GridFunction operator()(const ScaledIdPlusAverage &o) const {
    const double m = integral(u);
    GridFunction r(u.grid);
    for (int i = 0; i < r.size(); ++i) r[i] = o.d1 * u[i] + o.d2 * m;
    return r;
  }

  GridFunction operator()(const AverageRankOne &o) const {
    const double m = o.c * integral(u);
    GridFunction r(u.grid);
    for (int i = 0; i < r.size(); ++i) r[i] = m;
    return r;
  }

  GridFunction operator()(const MatrixOp &o) const {
    const auto &M = *o.mat;
    const int n = u.size();
    if (M.rows() != n || M.cols() != n)
      throw error(errc::invalid_argument, "matrix operator size mismatch");
    GridFunction r(u.grid);
    if (!adjoint) {
      for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += M(i, j) * u[j];
        r[i] = s;
      }
    } else {
      // (M* u)_j = w_j^{-1} sum_i M_ij w_i u_i
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += M(i, j) * u.grid->weights[i] * u[i];
        r[j] = s / u.grid->weights[j];
      }
    }
    return r;
  }

  GridFunction operator()(const InverseDirichletLaplacian1D &) const {
    return solve_inverse_laplacian(u.grid, u);
  }

  GridFunction operator()(const DiscreteLaplacian1D &) const { return apply_laplacian(u); }

  GridFunction operator()(const GramComposition &o) const {
    return apply_adjoint(*o.inner, apply(*o.inner, u));
  }

  GridFunction operator()(const OpSum &o) const {
    GridFunction r(u.grid);
    for (const auto &t : o.terms) {
      GridFunction part = adjoint ? apply_adjoint(*t, u) : apply(*t, u);
      for (int i = 0; i < r.size(); ++i) r[i] += part[i];
    }
    return r;
  }
};

}  // namespace detail

inline GridFunction apply(const LinOp &op, const GridFunction &u) {
  return std::visit(detail::ApplyVisitor{u, false}, op.v);
}

inline GridFunction apply_adjoint(const LinOp &op, const GridFunction &u) {
  return std::visit(detail::ApplyVisitor{u, true}, op.v);
}

// Dense action matrix, built column by column from basis vectors.
inline Eigen::MatrixXd assemble_dense(const LinOp &op, const GridPtr &g) {
  const int n = g->size();
  Eigen::MatrixXd M(n, n);
  GridFunction e(g);
  for (int j = 0; j < n; ++j) {
    e.values.assign(n, 0.0);
    e[j] = 1.0;
    GridFunction col = apply(op, e);
    for (int i = 0; i < n; ++i) M(i, j) = col[i];
  }
  return M;
}

inline Eigen::MatrixXd assemble_dense_adjoint(const LinOp &op, const GridPtr &g) {
  const int n = g->size();
  Eigen::MatrixXd M(n, n);
  GridFunction e(g);
  for (int j = 0; j < n; ++j) {
    e.values.assign(n, 0.0);
    e[j] = 1.0;
    GridFunction col = apply_adjoint(op, e);
    for (int i = 0; i < n; ++i) M(i, j) = col[i];
  }
  return M;
}

// True when the dense matrix of the adjoint is entrywise >= -tol, i.e. the
// adjoint maps nonnegative functions to nonnegative functions.
inline bool adjoint_preserves_nonneg(const LinOp &op, const GridPtr &g, double tol = 1e-12) {
  const Eigen::MatrixXd M = assemble_dense_adjoint(op, g);
  return (M.array() >= -tol).all();
}

}  // namespace mstat
