#include <catch2/catch_amalgamated.hpp>
#include <mstat/grid.hpp>

#include <sstream>

using namespace mstat;

TEST_CASE("uniform grid layout") {
  auto g = build_uniform_grid(0.0, 1.0, 4);
  REQUIRE(g->size() == 4);
  REQUIRE(g->midpoints[0] == 0.125);
  REQUIRE(g->midpoints[3] == 0.875);
  REQUIRE(g->weights[1] == 0.25);
  REQUIRE(g->measure() == 1.0);
  REQUIRE(uniform_spacing(*g) == 0.25);
  REQUIRE_THROWS_AS(build_uniform_grid(1.0, 0.0, 4), error);
  REQUIRE_THROWS_AS(build_uniform_grid(0.0, 1.0, 0), error);
}

TEST_CASE("weighted inner product and norms") {
  auto g = build_uniform_grid(0.0, 1.0, 2);
  GridFunction u(g, {1.0, 2.0});
  GridFunction v(g, {3.0, 4.0});
  REQUIRE(inner_product(u, v) == 0.5 * 3.0 + 0.5 * 8.0);
  REQUIRE(norm_l1(GridFunction(g, {-1.0, 3.0})) == 2.0);
  REQUIRE(norm_linf(GridFunction(g, {-1.0, 3.0})) == 3.0);
  REQUIRE(norm_l2(GridFunction(g, {2.0, 2.0})) == 2.0);

  auto g2 = build_uniform_grid(0.0, 1.0, 3);
  GridFunction w(g2);
  REQUIRE_THROWS_AS(inner_product(u, w), error);
}

TEST_CASE("pointwise helpers") {
  auto g = build_uniform_grid(-1.0, 1.0, 3);
  GridFunction u(g, {-1.0, 0.5, 2.0});
  GridFunction v(g, {0.0, 1.0, -3.0});
  auto mx = pointwise_max(u, v);
  auto mn = pointwise_min(u, v);
  REQUIRE(mx.values == std::vector<double>{0.0, 1.0, 2.0});
  REQUIRE(mn.values == std::vector<double>{-1.0, 0.5, -3.0});
  REQUIRE(abs(u).values == std::vector<double>{1.0, 0.5, 2.0});
  auto s = u - v + 2.0 * v;
  REQUIRE(s.values == (u + v).values);
}

TEST_CASE("cell set algebra") {
  auto g = build_uniform_grid(0.0, 2.0, 4);
  auto a = set_from_indices(g, {0, 1});
  auto b = set_from_indices(g, {1, 2});
  REQUIRE(set_union(a, b).indices() == std::vector<int>{0, 1, 2});
  REQUIRE(set_intersect(a, b).indices() == std::vector<int>{1});
  REQUIRE(set_minus(a, b).indices() == std::vector<int>{0});
  REQUIRE(set_complement(a).indices() == std::vector<int>{2, 3});
  REQUIRE(set_subset(set_from_indices(g, {1}), a));
  REQUIRE(!set_subset(a, b));
  REQUIRE(a.measure() == 1.0);
  REQUIRE(a.count() == 2);
  REQUIRE(indicator(a).values == std::vector<double>{1.0, 1.0, 0.0, 0.0});
  REQUIRE_THROWS_AS(set_from_indices(g, {4}), error);
}

TEST_CASE("csv round trip is bit exact") {
  auto g = build_uniform_grid(-1.0, 1.0, 5);
  GridFunction u(g);
  u[0] = 1.0 / 3.0;
  u[1] = -2.7182818284590452;
  u[2] = 1e-17;
  u[3] = -0.0;
  u[4] = 12345678.987654321;
  std::ostringstream os;
  write_csv(os, u);
  std::istringstream is(os.str());
  GridFunction v = read_csv(g, is);
  REQUIRE(v.values == u.values);
}

TEST_CASE("csv rejects mismatched input") {
  auto g = build_uniform_grid(0.0, 1.0, 2);
  std::istringstream bad_header("x,y\n0.25,1\n0.75,2\n");
  REQUIRE_THROWS_AS(read_csv(g, bad_header), error);
  std::istringstream wrong_grid("midpoint,value\n0.3,1\n0.75,2\n");
  REQUIRE_THROWS_AS(read_csv(g, wrong_grid), error);
  std::istringstream short_input("midpoint,value\n0.25,1\n");
  REQUIRE_THROWS_AS(read_csv(g, short_input), error);
}
