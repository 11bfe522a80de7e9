#include <catch2/catch_amalgamated.hpp>
#include <mstat/grid.hpp>
#include <mstat/simplex.hpp>

using namespace mstat;

TEST_CASE("bound-only problems") {
  LpBuilder b;
  b.add_var(2.0, lp_infinity, 1.0);
  auto r = lp_solve(b.p);
  REQUIRE(r.status == LpStatus::Optimal);
  REQUIRE(r.x[0] == 2.0);
  REQUIRE(r.value == 2.0);

  LpBuilder c;
  c.add_var(2.0, lp_infinity, -1.0);
  auto ru = lp_solve(c.p);
  REQUIRE(ru.status == LpStatus::Unbounded);
  REQUIRE(ru.ray[0] > 0.0);

  LpBuilder d;
  d.add_var(0.0, 2.0, -1.0);
  auto rr = lp_solve(d.p);
  REQUIRE(rr.status == LpStatus::Optimal);
  REQUIRE(std::fabs(rr.x[0] - 2.0) < 1e-12);
}

TEST_CASE("small equality problems") {
  LpBuilder b;
  int x = b.add_var(0.0, lp_infinity, -1.0);
  int y = b.add_var(0.0, lp_infinity, 0.0);
  b.add_eq({{x, 1.0}, {y, 1.0}}, 1.0);
  auto r = lp_solve(b.p);
  REQUIRE(r.status == LpStatus::Optimal);
  REQUIRE(std::fabs(r.x[0] - 1.0) < 1e-12);
  REQUIRE(std::fabs(r.x[1]) < 1e-12);
  REQUIRE(std::fabs(r.value + 1.0) < 1e-12);

  LpBuilder c;
  int u = c.add_var(0.0, lp_infinity);
  int v = c.add_var(0.0, lp_infinity);
  c.add_eq({{u, 1.0}, {v, 1.0}}, -1.0);
  auto ri = lp_solve(c.p);
  REQUIRE(ri.status == LpStatus::Infeasible);
  REQUIRE(ri.phase1_infeasibility > 1e-9);
}

TEST_CASE("fixed variables substitute into rows") {
  LpBuilder b;
  int x = b.add_var(2.0, 2.0, 1.0);
  int y = b.add_var(0.0, lp_infinity, 1.0);
  b.add_eq({{x, 1.0}, {y, 1.0}}, 5.0);
  auto r = lp_solve(b.p);
  REQUIRE(r.status == LpStatus::Optimal);
  REQUIRE(r.x[0] == 2.0);
  REQUIRE(std::fabs(r.x[1] - 3.0) < 1e-12);
  REQUIRE(std::fabs(r.value - 5.0) < 1e-12);
}

TEST_CASE("free singleton columns are eliminated and recovered") {
  LpBuilder b;
  int x = b.add_var(0.0, lp_infinity, 1.0);
  int y = b.add_var(-lp_infinity, lp_infinity, 0.0);
  b.add_eq({{x, 1.0}, {y, 1.0}}, 3.0);
  auto r = lp_solve(b.p);
  REQUIRE(r.status == LpStatus::Optimal);
  REQUIRE(std::fabs(r.x[0]) < 1e-12);
  REQUIRE(std::fabs(r.x[1] - 3.0) < 1e-12);

  // chained: z only ties to y, y only ties to x's row
  LpBuilder c;
  int cx = c.add_var(1.0, lp_infinity, 1.0);
  int cy = c.add_var(-lp_infinity, lp_infinity, 0.0);
  int cz = c.add_var(-lp_infinity, lp_infinity, 0.0);
  c.add_eq({{cx, 1.0}, {cy, 2.0}}, 4.0);
  c.add_eq({{cy, 1.0}, {cz, -1.0}}, 1.0);
  auto rc = lp_solve(c.p);
  REQUIRE(rc.status == LpStatus::Optimal);
  REQUIRE(std::fabs(rc.x[cx] - 1.0) < 1e-12);
  REQUIRE(std::fabs(rc.x[cy] - 1.5) < 1e-12);
  REQUIRE(std::fabs(rc.x[cz] - 0.5) < 1e-12);
}

TEST_CASE("upper bounded variables") {
  LpBuilder b;
  int x = b.add_var(-lp_infinity, 4.0, -1.0);
  int y = b.add_var(0.0, lp_infinity, 0.0);
  b.add_eq({{x, 1.0}, {y, -1.0}}, 1.0);
  auto r = lp_solve(b.p);
  REQUIRE(r.status == LpStatus::Optimal);
  REQUIRE(std::fabs(r.x[x] - 4.0) < 1e-10);
  REQUIRE(std::fabs(r.x[y] - 3.0) < 1e-10);
}

TEST_CASE("inequality helper") {
  LpBuilder b;
  int x = b.add_var(0.0, lp_infinity, -2.0);
  int y = b.add_var(0.0, lp_infinity, -3.0);
  b.add_le({{x, 1.0}, {y, 1.0}}, 4.0);
  b.add_le({{x, 1.0}, {y, 2.0}}, 6.0);
  auto r = lp_solve(b.p);
  REQUIRE(r.status == LpStatus::Optimal);
  REQUIRE(std::fabs(r.x[x] - 2.0) < 1e-9);
  REQUIRE(std::fabs(r.x[y] - 2.0) < 1e-9);
  REQUIRE(std::fabs(r.value + 10.0) < 1e-9);
}

TEST_CASE("classic degenerate instance terminates at the optimum") {
  // Beale's cycling example; value -1/20 at (1/25, 0, 1, 0)
  LpBuilder b;
  int x1 = b.add_var(0.0, lp_infinity, -0.75);
  int x2 = b.add_var(0.0, lp_infinity, 150.0);
  int x3 = b.add_var(0.0, lp_infinity, -0.02);
  int x4 = b.add_var(0.0, lp_infinity, 6.0);
  b.add_le({{x1, 0.25}, {x2, -60.0}, {x3, -1.0 / 25.0}, {x4, 9.0}}, 0.0, false);
  b.add_le({{x1, 0.5}, {x2, -90.0}, {x3, -1.0 / 50.0}, {x4, 3.0}}, 0.0, false);
  b.add_le({{x3, 1.0}}, 1.0, false);
  auto r = lp_solve(b.p);
  REQUIRE(r.status == LpStatus::Optimal);
  REQUIRE(std::fabs(r.value + 0.05) < 1e-9);
}

TEST_CASE("planted optima across random instances") {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    mstat::detail::SplitMix64 rng(seed * 977);
    const int n = 6, m = 3;
    // plant primal x* >= 0 and dual y with c = A^T y + s, s >= 0 and
    // s_i = 0 where x*_i > 0; then x* is optimal with value c^T x*
    std::vector<double> xs(n, 0.0);
    for (int j = 0; j < n; ++j)
      if (rng.next_double() < 0.5) xs[j] = rng.uniform(0.0, 2.0);
    std::vector<std::vector<double>> A(m, std::vector<double>(n));
    std::vector<double> rhs(m, 0.0);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) {
        A[i][j] = rng.uniform(-1.0, 1.0);
        rhs[i] += A[i][j] * xs[j];
      }
    }
    std::vector<double> y(m);
    for (int i = 0; i < m; ++i) y[i] = rng.uniform(-1.0, 1.0);
    LpBuilder b;
    double expect = 0.0;
    for (int j = 0; j < n; ++j) {
      double c = 0.0;
      for (int i = 0; i < m; ++i) c += A[i][j] * y[i];
      if (xs[j] == 0.0) c += rng.uniform(0.0, 1.0);
      b.add_var(0.0, lp_infinity, c);
      expect += c * xs[j];
    }
    for (int i = 0; i < m; ++i) {
      std::vector<std::pair<int, double>> terms;
      for (int j = 0; j < n; ++j) terms.emplace_back(j, A[i][j]);
      b.add_eq(terms, rhs[i], false);
    }
    auto r = lp_solve(b.p);
    REQUIRE(r.status == LpStatus::Optimal);
    REQUIRE(std::fabs(r.value - expect) < 1e-7);
    REQUIRE(lp_equality_residual(b.p, r.x) < 1e-8);
  }
}

TEST_CASE("returned points satisfy the equality rows tightly") {
  LpBuilder b;
  int x = b.add_var(0.0, lp_infinity, 1.0);
  int y = b.add_var(0.0, lp_infinity, 2.0);
  int z = b.add_var(-lp_infinity, lp_infinity, 0.5);
  b.add_eq({{x, 1.0}, {y, 2.0}, {z, 1.0}}, 3.0);
  b.add_eq({{y, 1.0}, {z, -1.0}}, 0.5);
  auto r = lp_solve(b.p);
  REQUIRE(r.status == LpStatus::Optimal);
  REQUIRE(lp_equality_residual(b.p, r.x) < 1e-9);
  REQUIRE(r.iterations >= 0);
}
