#include <catch2/catch_amalgamated.hpp>

#include <mstat/lower_level.hpp>
#include <mstat/scenarios.hpp>

#include "test_support.hpp"

using namespace mstat;

namespace {

// Upper-level objective of the prebuilt inverse problem: linear cost of the
// response plus smoothing and the linear parameter term.
double nostrong_objective(const IocProblem &ioc, const GridFunction &w) {
  LowerLevelSolution sol = solve_oc(ioc, w);
  return f_value(ioc.f, sol.u) + 0.5 * h1_seminorm_sq(w) + inner_product(ioc.zeta, w);
}

MpccLinProblem band_problem(const Ex48Scenario &sc, int band_index) {
  MpccLinProblem p = sc.problem;
  p.f_u = sc.bands[band_index].f_u;
  return p;
}

KktMultipliers band_multipliers(const Ex48Scenario &sc, int band_index) {
  const Ex48Band &b = sc.bands[band_index];
  KktMultipliers m = zero_multipliers(sc.problem.grid);
  m.p = b.p;
  m.mu = b.mu;
  m.nu = b.p;
  m.lam = b.p;
  return m;
}

}  // namespace

TEST_CASE("the no-strong instance assembles as specified") {
  for (auto variant : {NostrongVariant::Averaging, NostrongVariant::NonnegMatrix}) {
    IocProblem ioc = scenario_nostrong(16, 0.1, variant);
    CHECK(ioc.grid->a == 0.0);
    CHECK(ioc.grid->b == 1.0);
    CHECK(ioc.grid->size() == 16);
    CHECK(ioc.alpha == 0.1);
    for (int i = 0; i < 16; ++i) {
      CHECK(ioc.y_d[i] == 0.0);
      CHECK(ioc.u_a[i] == 0.0);
      CHECK(ioc.w_a[i] == 0.0);
      CHECK(ioc.zeta[i] == 1.0);
    }
    const auto *lin = std::get_if<LinearCost>(&ioc.f.v);
    REQUIRE(lin != nullptr);
    for (int i = 0; i < 16; ++i) CHECK(lin->c[i] == -1.0);
    CHECK_NOTHROW(validate_ioc(ioc));
  }

  SECTION("the averaging variant uses the rank-one operator") {
    IocProblem ioc = scenario_nostrong(16, 0.3, NostrongVariant::Averaging);
    const auto *a = std::get_if<AverageRankOne>(&ioc.s_op.v);
    REQUIRE(a != nullptr);
    CHECK(a->c == 0.3);
  }

  SECTION("the matrix variant is entrywise nonnegative with operator norm alpha") {
    IocProblem ioc = scenario_nostrong(12, 0.3, NostrongVariant::NonnegMatrix);
    const auto *m = std::get_if<MatrixOp>(&ioc.s_op.v);
    REQUIRE(m != nullptr);
    const Eigen::MatrixXd &s = *m->mat;
    REQUIRE(s.rows() == 12);
    double asym = 0.0;
    for (int i = 0; i < 12; ++i)
      for (int j = 0; j < 12; ++j) {
        CHECK(s(i, j) >= 0.0);
        asym = std::max(asym, std::fabs(s(i, j) - s(j, i)));
      }
    CHECK(asym <= 1e-15);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
    CHECK(es.eigenvalues().maxCoeff() == Catch::Approx(0.3).margin(1e-12));
    CHECK(es.eigenvalues().minCoeff() >= -1e-12);
  }

  SECTION("construction is deterministic") {
    IocProblem a = scenario_nostrong(10, 0.25, NostrongVariant::NonnegMatrix);
    IocProblem b = scenario_nostrong(10, 0.25, NostrongVariant::NonnegMatrix);
    const Eigen::MatrixXd &sa = *std::get_if<MatrixOp>(&a.s_op.v)->mat;
    const Eigen::MatrixXd &sb = *std::get_if<MatrixOp>(&b.s_op.v)->mat;
    CHECK((sa - sb).cwiseAbs().maxCoeff() == 0.0);
  }

  SECTION("degenerate arguments are rejected") {
    CHECK_THROWS_AS(scenario_nostrong(0, 0.1, NostrongVariant::Averaging), error);
    CHECK_THROWS_AS(scenario_nostrong(8, 0.0, NostrongVariant::Averaging), error);
  }
}

TEST_CASE("the origin minimizes the no-strong objective globally") {
  // The objective decomposes cellwise as (w - u) >= 0 plus nonnegative
  // smoothing, so zero is a global minimizer with value zero; random feasible
  // parameters can only do worse.
  for (auto variant : {NostrongVariant::Averaging, NostrongVariant::NonnegMatrix}) {
    IocProblem ioc = scenario_nostrong(12, 0.1, variant);
    CHECK(nostrong_objective(ioc, GridFunction(ioc.grid)) == Catch::Approx(0.0).margin(1e-12));
    detail::SplitMix64 rng(variant == NostrongVariant::Averaging ? 11 : 22);
    for (int trial = 0; trial < 50; ++trial) {
      GridFunction w(ioc.grid);
      for (int i = 0; i < 12; ++i) w[i] = rng.uniform(0.0, 2.0);
      CHECK(nostrong_objective(ioc, w) >= -1e-10);
    }
  }
}

TEST_CASE("the origin admits weak but not strong multipliers") {
  // Both normalizations of the linearized instance agree on this: the weak
  // sign system is feasible while the strong one is not, in every variant.
  for (auto variant : {NostrongVariant::Averaging, NostrongVariant::NonnegMatrix}) {
    for (double alpha : {0.1, 0.25}) {
      IocProblem ioc = scenario_nostrong(12, alpha, variant);
      KktrPoint pt = build_kktr_point(ioc, GridFunction(ioc.grid));
      for (bool unscaled : {false, true}) {
        MpccLinProblem lin = unscaled ? linearize_unscaled(ioc, pt) : linearize(ioc, pt);
        CHECK(solve_kkt_signs(lin, signs_weak(lin)).status == KktSolveStatus::Found);
        CHECK(solve_kkt_signs(lin, signs_strong(lin)).status == KktSolveStatus::Infeasible);
      }
    }
  }
}

TEST_CASE("suppressing the bound multiplier leaves no adjoint state") {
  // With mu forced to vanish everywhere, the response row pins the adjoint
  // state to A^{-*} applied to the unit density. Its mean then exceeds one,
  // while the parameter row demands it stay below one wherever the parameter
  // bound is active. So the system is infeasible in both variants.
  for (auto variant : {NostrongVariant::Averaging, NostrongVariant::NonnegMatrix}) {
    IocProblem ioc = scenario_nostrong(16, 0.1, variant);
    KktrPoint pt = build_kktr_point(ioc, GridFunction(ioc.grid));
    MpccLinProblem plain = linearize_unscaled(ioc, pt);
    MultiplierSigns signs = signs_weak(plain);
    for (auto &c : signs.mu) c = SignClass::Zero;
    CHECK(solve_kkt_signs(plain, signs).status == KktSolveStatus::Infeasible);
  }

  SECTION("for the rank-one variant the pinned state is an explicit constant") {
    const double alpha = 0.1;
    IocProblem ioc = scenario_nostrong(16, alpha, NostrongVariant::Averaging);
    KktrPoint pt = build_kktr_point(ioc, GridFunction(ioc.grid));
    MpccLinProblem plain = linearize_unscaled(ioc, pt);
    const double p_const = 1.0 / (alpha + alpha * alpha);
    CHECK(p_const == Catch::Approx(9.0909090909).margin(1e-9));
    GridFunction p(ioc.grid, p_const);
    GridFunction ap = apply_adjoint(plain.a_op, p);
    for (int i = 0; i < 16; ++i) {
      // the response row closes exactly with mu = 0 ...
      CHECK(plain.f_u[i] + ap[i] == Catch::Approx(0.0).margin(1e-12));
      // ... but the parameter row then needs a positive lambda
      CHECK(p.values[i] - plain.f_w[i] >= 8.0);
    }
  }
}

TEST_CASE("the band scenario lays out dyadic biactive bands") {
  Ex48Scenario sc = scenario_ex48(64, 2);
  const GridPtr &g = sc.problem.grid;
  CHECK(g->a == -1.0);
  CHECK(g->b == 1.0);
  CHECK_NOTHROW(validate_problem(sc.problem));
  CHECK(sc.problem.strongly_active.count() == 0);
  CHECK(sc.problem.biactive.count() == 5);
  CHECK(sc.problem.inactive.count() == 59);
  for (int i = 0; i < 64; ++i)
    CHECK(sc.problem.w_bound_set.mask[i] == sc.problem.biactive.mask[i]);

  REQUIRE(sc.bands.size() == 2);
  CHECK(sc.bands[0].c == -0.8125);
  int on_band_1 = 0, on_band_2 = 0;
  for (int i = 0; i < 64; ++i) {
    if (sc.bands[0].p[i] != 0.0) {
      ++on_band_1;
      CHECK(sc.bands[0].p[i] == -16.0);
      CHECK(g->midpoints[i] >= 0.125);
      CHECK(g->midpoints[i] <= 0.25);
    }
    if (sc.bands[1].p[i] != 0.0) {
      ++on_band_2;
      CHECK(sc.bands[1].p[i] == -64.0);
    }
  }
  CHECK(on_band_1 == 4);
  CHECK(on_band_2 == 1);

  SECTION("larger meshes resolve more bands") {
    Ex48Scenario fine = scenario_ex48(256, 3);
    int counts[3] = {0, 0, 0};
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 256; ++i)
        if (fine.bands[k].p[i] != 0.0) ++counts[k];
    CHECK(counts[0] == 16);
    CHECK(counts[1] == 4);
    CHECK(counts[2] == 1);
    CHECK(fine.problem.biactive.count() == 21);
  }

  SECTION("unresolvable layouts are rejected") {
    CHECK_THROWS_AS(scenario_ex48(100, 2), error);
    CHECK_THROWS_AS(scenario_ex48(32, 2), error);
    CHECK_THROWS_AS(scenario_ex48(64, 3), error);
    CHECK_THROWS_AS(scenario_ex48(64, 0), error);
  }
}

TEST_CASE("the band potentials are exact solutions of their cell problems") {
  SECTION("closed form: continuity, boundary values and curvature") {
    for (int k = 1; k <= 3; ++k) {
      const double lo = std::ldexp(1.0, -2 * k - 1);
      const double hi = std::ldexp(1.0, -2 * k);
      const double c = -1.0 + 3.0 * std::ldexp(1.0, -2 * k - 2);
      // matching at both band edges, from the outer and inner expressions
      const double quad_lo =
          std::ldexp(1.0, 2 * k + 1) * lo * lo + (c - 2.0) * lo + c + lo;
      const double quad_hi =
          std::ldexp(1.0, 2 * k + 1) * hi * hi + (c - 2.0) * hi + c + lo;
      CHECK(c * (lo + 1.0) == Catch::Approx(quad_lo).margin(1e-14));
      CHECK((c + 2.0) * (hi - 1.0) == Catch::Approx(quad_hi).margin(1e-14));
      CHECK(ex48_band_potential(k, -1.0) == 0.0);
      CHECK(ex48_band_potential(k, 1.0) == 0.0);
    }
  }

  SECTION("interior second differences recover the band density") {
    // The potential is piecewise quadratic, so the 3-point second difference
    // is exact wherever the stencil stays inside one piece.
    Ex48Scenario sc = scenario_ex48(128, 2);
    const GridPtr &g = sc.problem.grid;
    const double h = g->weights[0];
    for (int k = 0; k < 2; ++k) {
      const double lo = std::ldexp(1.0, -2 * (k + 1) - 1);
      const double hi = std::ldexp(1.0, -2 * (k + 1));
      const GridFunction &v = sc.bands[k].v;
      int checked = 0;
      for (int i = 1; i + 1 < g->size(); ++i) {
        const double x = g->midpoints[i];
        if (std::fabs(x - lo) < 1.5 * h || std::fabs(x - hi) < 1.5 * h) continue;
        const double curv = (-v[i - 1] + 2.0 * v[i] - v[i + 1]) / (h * h);
        CHECK(std::fabs(curv - sc.bands[k].p[i]) <=
              1e-7 * (1.0 + std::fabs(sc.bands[k].p[i])));
        ++checked;
      }
      CHECK(checked >= 100);
    }
  }

  SECTION("the discrete potential of the band density converges at second order") {
    std::vector<double> errs;
    for (int n : {64, 128, 256}) {
      Ex48Scenario sc = scenario_ex48(n, 1);
      GridFunction sp = solve_inverse_laplacian(sc.problem.grid, sc.bands[0].p);
      errs.push_back(norm_linf(sp - sc.bands[0].v));
    }
    CHECK(errs[0] / errs[1] >= 3.0);
    CHECK(errs[1] / errs[2] >= 3.0);
    CHECK(errs[2] <= 1e-3);
  }
}

TEST_CASE("each band tuple closes its branch system at second order") {
  // The parameter and slack rows close exactly by construction; the response
  // row residual is the operator image of the potential defect, one discrete
  // solve away from zero, and shrinks at the mesh rate as the grid refines.
  std::vector<std::array<double, 2>> res;
  for (int n : {64, 128, 256}) {
    Ex48Scenario sc = scenario_ex48(n, 2);
    std::array<double, 2> row{};
    for (int k = 0; k < 2; ++k) {
      MpccLinProblem pk = band_problem(sc, k);
      KktMultipliers m = band_multipliers(sc, k);
      KktSystemResiduals r = kkt_beta_residuals(pk, pk.biactive, m);
      CHECK(r.stat_w == 0.0);
      CHECK(r.stat_xi == 0.0);
      CHECK(r.mu_zero == 0.0);
      CHECK(r.nu_sign == 0.0);
      CHECK(r.lambda_zero == 0.0);
      CHECK(r.lambda_sign == 0.0);
      row[k] = r.max();
    }
    res.push_back(row);
  }
  for (int k = 0; k < 2; ++k) {
    for (int step = 0; step + 1 < 3; ++step) {
      CHECK(res[step + 1][k] < res[step][k]);
      const double order = std::log2(res[step][k] / res[step + 1][k]);
      CHECK(order >= 0.9);
    }
  }
}

TEST_CASE("the matched gradients approach the limit cost monotonically") {
  Ex48Scenario sc = scenario_ex48(256, 3);
  std::vector<double> dist;
  for (const Ex48Band &b : sc.bands) dist.push_back(norm_l2(b.f_u - sc.problem.f_u));
  REQUIRE(dist.size() == 3);
  CHECK(dist[0] > dist[1]);
  CHECK(dist[1] > dist[2]);
  CHECK(ex48_limit_density(0.0) == Catch::Approx(1.0 / 3.0).margin(1e-15));
  CHECK(ex48_limit_density(1.0) == Catch::Approx(0.0).margin(1e-15));
  CHECK(ex48_limit_density(-1.0) == Catch::Approx(0.0).margin(1e-15));
  for (int i = 0; i < 256; ++i) {
    if (sc.problem.biactive.mask[i])
      CHECK(sc.problem.f_u[i] == 0.0);
    else
      CHECK(sc.problem.f_u[i] ==
            ex48_limit_density(sc.problem.grid->midpoints[i]));
  }
  for (int i = 0; i < 256; ++i)
    CHECK(sc.v0[i] == std::fabs(sc.problem.grid->midpoints[i]) - 1.0);
}
