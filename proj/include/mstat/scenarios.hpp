#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ioc.hpp"

namespace mstat {

// Prebuilt problem instances used by the test batteries and the command line
// tool. Both families are deterministic: the same arguments always produce
// the same data, down to the last bit.

// ---------------------------------------------------------------------------
// Family 1: an inverse problem on (0,1) whose origin is a global minimizer
// that admits M-stationary multipliers but no strongly stationary ones.
//
// Data: y_d = 0, u_a = w_a = 0, zeta = 1, linear cost with density -1.
// The compact part of the control operator is either a nonnegative rank-one
// average or a dense entrywise nonnegative matrix, scaled so its operator
// norm equals alpha.
// ---------------------------------------------------------------------------

enum class NostrongVariant { NonnegMatrix, Averaging };

inline const char *nostrong_variant_name(NostrongVariant v) {
  switch (v) {
    case NostrongVariant::NonnegMatrix: return "nonneg-matrix";
    case NostrongVariant::Averaging: return "averaging";
  }
  return "unknown";
}

namespace detail {

// Fixed-seed matrix for the NonnegMatrix variant. Doubles are drawn straight
// from the engine's bits so repeated calls agree exactly.
inline Eigen::MatrixXd nostrong_matrix(int n, double alpha) {
  std::mt19937_64 eng(0x6d737461746e6f73ull);
  Eigen::MatrixXd b(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      b(i, j) = std::ldexp(static_cast<double>(eng() >> 11), -53);
  Eigen::MatrixXd gram = b.transpose() * b;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  double top = es.eigenvalues().maxCoeff();
  if (!(top > 0.0))
    throw error(errc::internal_error, "degenerate random gram matrix");
  return (alpha / top) * gram;
}

}  // namespace detail

inline IocProblem scenario_nostrong(int n, double alpha, NostrongVariant variant) {
  if (n < 1)
    throw error(errc::invalid_argument, "scenario needs at least one cell");
  if (!(alpha > 0.0))
    throw error(errc::invalid_argument, "scenario needs a positive alpha");
  IocProblem ioc;
  ioc.grid = build_uniform_grid(0.0, 1.0, n);
  ioc.alpha = alpha;
  ioc.y_d = GridFunction(ioc.grid);
  ioc.u_a = GridFunction(ioc.grid);
  ioc.w_a = GridFunction(ioc.grid);
  ioc.zeta = GridFunction(ioc.grid, 1.0);
  ioc.f = cost_linear(GridFunction(ioc.grid, -1.0));
  if (variant == NostrongVariant::Averaging) {
    ioc.s_op = op_average(alpha);
  } else {
    ioc.s_op = op_matrix(detail::nostrong_matrix(n, alpha));
  }
  return ioc;
}

// ---------------------------------------------------------------------------
// Family 2: a linearized problem on (-1,1) around the origin, whose biactive
// region is a union of dyadic bands accumulating at zero. Each band carries a
// closed-form multiplier tuple; the family of cost gradients matched by those
// tuples converges to the problem's own gradient, yet the limit gradient
// itself admits no multiplier on any grid.
//
// The operator is A = I + S*S with S the inverse of the negative second
// difference (homogeneous endpoint values). Band k is [4^-k/2, 4^-k].
// ---------------------------------------------------------------------------

struct Ex48Band {
  int k = 0;
  double c = 0.0;     // left slope of the band potential
  GridFunction p;     // adjoint state: constant -4^(k+1) on band k, else 0
  GridFunction v;     // exact potential of p, sampled at midpoints
  GridFunction mu;    // bound multiplier supported on the band union
  GridFunction f_u;   // cost gradient matched by this tuple, on the complement
};

struct Ex48Scenario {
  MpccLinProblem problem;
  std::vector<Ex48Band> bands;
  GridFunction v0;    // limit of the band potentials: |x| - 1
};

// Density of the limiting cost gradient on the inactive region.
inline double ex48_limit_density(double x) {
  double a = std::fabs(x);
  return a * a * a / 6.0 - x * x / 2.0 + 1.0 / 3.0;
}

// Solution of -v'' = p_k with v(-1) = v(1) = 0, where p_k is the constant
// -4^(k+1) on [4^-k/2, 4^-k]. Piecewise linear outside the band, quadratic
// inside, matched to first order at both edges.
inline double ex48_band_potential(int k, double x) {
  double lo = std::ldexp(1.0, -2 * k - 1);
  double hi = std::ldexp(1.0, -2 * k);
  double c = -1.0 + 3.0 * std::ldexp(1.0, -2 * k - 2);
  if (x <= lo) return c * (x + 1.0);
  if (x >= hi) return (c + 2.0) * (x - 1.0);
  return std::ldexp(1.0, 2 * k + 1) * x * x + (c - 2.0) * x + c + lo;
}

inline Ex48Scenario scenario_ex48(int n, int bands) {
  if (n < 2 || (n & (n - 1)) != 0)
    throw error(errc::invalid_argument, "band layout needs a power-of-two cell count");
  if (bands < 1)
    throw error(errc::invalid_argument, "scenario needs at least one band");
  // Band k spans 4^-k - 4^-k/2 = 2 * 4^-(k+1); it resolves on the mesh only
  // when the cell width 2/n divides it, i.e. when 4^(bands+1) <= n.
  if (bands > 14 || (std::int64_t{1} << (2 * bands + 2)) > n)
    throw error(errc::invalid_argument,
                "band " + std::to_string(bands) + " is thinner than a cell at n = " +
                    std::to_string(n));

  Ex48Scenario sc;
  GridPtr g = build_uniform_grid(-1.0, 1.0, n);
  MpccLinProblem &prob = sc.problem;
  prob.grid = g;
  prob.a_op = op_sum(op_scaled_identity(1.0), op_gram(op_inverse_laplacian()));
  prob.f_w = GridFunction(g);
  prob.f_xi = GridFunction(g);
  prob.strongly_active = CellSet(g);
  prob.biactive = CellSet(g);
  prob.inactive = CellSet(g);

  // Midpoints of a power-of-two mesh never coincide with the dyadic band
  // edges, so closed-interval membership is unambiguous.
  auto in_band = [](int k, double x) {
    return std::ldexp(1.0, -2 * k - 1) <= x && x <= std::ldexp(1.0, -2 * k);
  };
  for (int i = 0; i < n; ++i) {
    bool hit = false;
    for (int k = 1; k <= bands && !hit; ++k) hit = in_band(k, g->midpoints[i]);
    if (hit)
      prob.biactive.add(i);
    else
      prob.inactive.add(i);
  }
  prob.w_bound_set = prob.biactive;

  prob.f_u = GridFunction(g);
  for (int i = 0; i < n; ++i)
    if (prob.inactive.contains(i)) prob.f_u[i] = ex48_limit_density(g->midpoints[i]);

  for (int k = 1; k <= bands; ++k) {
    Ex48Band band;
    band.k = k;
    band.c = -1.0 + 3.0 * std::ldexp(1.0, -2 * k - 2);
    band.p = GridFunction(g);
    for (int i = 0; i < n; ++i)
      if (in_band(k, g->midpoints[i])) band.p[i] = -std::ldexp(1.0, 2 * k + 2);
    band.v = gf_from(g, [k](double x) { return ex48_band_potential(k, x); });
    // One discrete solve closes the tuple: the bound multiplier absorbs
    // -(p + Sv) on the band union, the matched gradient is its negative
    // trace on the complement.
    GridFunction sv = solve_inverse_laplacian(g, band.v);
    band.mu = GridFunction(g);
    band.f_u = GridFunction(g);
    for (int i = 0; i < n; ++i) {
      double r = -(band.p[i] + sv[i]);
      if (prob.biactive.contains(i))
        band.mu[i] = r;
      else
        band.f_u[i] = r;
    }
    sc.bands.push_back(std::move(band));
  }

  sc.v0 = gf_from(g, [](double x) { return std::fabs(x) - 1.0; });
  return sc;
}

}  // namespace mstat
