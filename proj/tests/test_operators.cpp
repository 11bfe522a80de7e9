#include <catch2/catch_amalgamated.hpp>
#include <mstat/operators.hpp>

using namespace mstat;

TEST_CASE("identity plus average on two cells") {
  auto g = build_uniform_grid(0.0, 1.0, 2);
  GridFunction v(g, {1.0, 0.0});
  auto r = apply(op_id_plus_average(1.0, 1.0), v);
  REQUIRE(r[0] == 1.5);
  REQUIRE(r[1] == 0.5);
}

TEST_CASE("rank one average") {
  auto g = build_uniform_grid(0.0, 1.0, 4);
  GridFunction v(g, {4.0, 0.0, 0.0, 0.0});
  auto r = apply(op_average(2.0), v);
  for (int i = 0; i < 4; ++i) REQUIRE(r[i] == 2.0);
}

static double pairing_gap(const LinOp &op, const GridPtr &g, std::uint64_t seed) {
  detail::SplitMix64 rng(seed);
  double gap = 0.0;
  for (int rep = 0; rep < 5; ++rep) {
    GridFunction u(g), v(g);
    for (int i = 0; i < g->size(); ++i) {
      u[i] = rng.uniform(-1.0, 1.0);
      v[i] = rng.uniform(-1.0, 1.0);
    }
    gap = std::max(gap, std::fabs(inner_product(apply(op, u), v) -
                                  inner_product(u, apply_adjoint(op, v))));
  }
  return gap;
}

TEST_CASE("adjoint pairing identity") {
  auto g = build_uniform_grid(-1.0, 1.0, 16);
  REQUIRE(pairing_gap(op_id_plus_average(2.0, 0.5), g, 1) < 1e-13);
  REQUIRE(pairing_gap(op_average(0.7), g, 2) < 1e-13);
  REQUIRE(pairing_gap(op_inverse_laplacian(), g, 3) < 1e-13);
  REQUIRE(pairing_gap(op_gram(op_inverse_laplacian()), g, 4) < 1e-13);
  REQUIRE(pairing_gap(op_sum(op_scaled_identity(0.25), op_gram(op_inverse_laplacian())), g, 5) <
          1e-13);

  detail::SplitMix64 rng(77);
  Eigen::MatrixXd M(16, 16);
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j) M(i, j) = rng.uniform(-1.0, 1.0);
  REQUIRE(pairing_gap(op_matrix(M), g, 6) < 1e-12);
}

TEST_CASE("matrix adjoint respects nonuniform weights") {
  auto g = std::make_shared<Grid>();
  g->a = 0.0;
  g->b = 1.0;
  g->midpoints = {0.25, 0.625, 0.875};
  g->weights = {0.5, 0.25, 0.25};
  GridPtr gp = g;
  Eigen::MatrixXd M(3, 3);
  M << 1, 2, 0, 0, 1, -1, 3, 0, 2;
  const LinOp op = op_matrix(M);
  detail::SplitMix64 rng(5);
  GridFunction u(gp), v(gp);
  for (int i = 0; i < 3; ++i) {
    u[i] = rng.uniform(-1.0, 1.0);
    v[i] = rng.uniform(-1.0, 1.0);
  }
  REQUIRE(std::fabs(inner_product(apply(op, u), v) -
                    inner_product(u, apply_adjoint(op, v))) < 1e-14);
}

TEST_CASE("inverse laplacian hits the parabola at second order") {
  auto err_at = [](int n) {
    auto g = build_uniform_grid(-1.0, 1.0, n);
    GridFunction rhs(g, 1.0);
    GridFunction u = solve_inverse_laplacian(g, rhs);
    double e = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = g->midpoints[i];
      e = std::max(e, std::fabs(u[i] - 0.5 * (1.0 - x * x)));
    }
    return e;
  };
  const double e64 = err_at(64), e128 = err_at(128);
  REQUIRE(e64 < 2e-3);
  REQUIRE(e64 / e128 > 3.0);  // second order in h

  // value near the center is 1/2 up to O(h^2)
  auto g = build_uniform_grid(-1.0, 1.0, 64);
  GridFunction u = solve_inverse_laplacian(g, GridFunction(g, 1.0));
  REQUIRE(std::fabs(u[31] - 0.5) < 1e-3);
}

TEST_CASE("inverse laplacian satisfies its stencil") {
  auto g = build_uniform_grid(-1.0, 1.0, 32);
  detail::SplitMix64 rng(9);
  GridFunction rhs(g);
  for (int i = 0; i < 32; ++i) rhs[i] = rng.uniform(-2.0, 2.0);
  GridFunction u = solve_inverse_laplacian(g, rhs);
  const double h2 = uniform_spacing(*g) * uniform_spacing(*g);
  REQUIRE(std::fabs((3 * u[0] - u[1]) / h2 - rhs[0]) < 1e-10);
  for (int i = 1; i < 31; ++i)
    REQUIRE(std::fabs((-u[i - 1] + 2 * u[i] - u[i + 1]) / h2 - rhs[i]) < 1e-10);
  REQUIRE(std::fabs((-u[30] + 3 * u[31]) / h2 - rhs[31]) < 1e-10);
}

TEST_CASE("h1 seminorm matches the fixed example and the laplacian form") {
  auto g = build_uniform_grid(0.0, 1.0, 2);
  GridFunction w(g, {1.0, 0.0});
  REQUIRE(h1_seminorm_sq(w) == 4.0);

  auto g2 = build_uniform_grid(0.0, 1.0, 17);
  detail::SplitMix64 rng(13);
  GridFunction v(g2);
  for (int i = 0; i < 17; ++i) v[i] = rng.uniform(-1.0, 1.0);
  const double quad = inner_product(apply_laplacian(v), v);
  REQUIRE(std::fabs(quad - h1_seminorm_sq(v)) < 1e-11);
}

TEST_CASE("dense assembly agrees with apply") {
  auto g = build_uniform_grid(-1.0, 1.0, 12);
  const LinOp op = op_sum(op_scaled_identity(1.0), op_gram(op_inverse_laplacian()));
  const Eigen::MatrixXd M = assemble_dense(op, g);
  detail::SplitMix64 rng(21);
  GridFunction v(g);
  for (int i = 0; i < 12; ++i) v[i] = rng.uniform(-1.0, 1.0);
  GridFunction direct = apply(op, v);
  for (int i = 0; i < 12; ++i) {
    double s = 0.0;
    for (int j = 0; j < 12; ++j) s += M(i, j) * v[j];
    REQUIRE(std::fabs(s - direct[i]) < 1e-12);
  }
}

TEST_CASE("nonnegativity of the adjoint is detected") {
  auto g = build_uniform_grid(0.0, 1.0, 6);
  REQUIRE(adjoint_preserves_nonneg(op_id_plus_average(1.0, 1.0), g));
  REQUIRE(adjoint_preserves_nonneg(op_average(0.3), g));
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(6, 6);
  M(2, 4) = -0.5;
  REQUIRE(!adjoint_preserves_nonneg(op_matrix(M), g));
  // the inverse laplacian has a nonnegative kernel
  REQUIRE(adjoint_preserves_nonneg(op_inverse_laplacian(), g));
}
