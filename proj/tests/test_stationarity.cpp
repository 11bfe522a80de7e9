#include <catch2/catch_amalgamated.hpp>

#include <mstat/stationarity.hpp>

#include "test_support.hpp"

using namespace mstat;
using test_support::plant_multipliers;
using test_support::random_beta;
using test_support::random_problem;

namespace {

// One biactive cell on the w bound set, A v = 2v.  The multipliers are
// planted, so the stationarity system holds exactly and only the sign and
// product conditions distinguish the certificate kinds.
MpccLinProblem one_cell_problem(double mu, double nu, KktMultipliers &m) {
  auto g = build_uniform_grid(0.0, 1.0, 1);
  MpccLinProblem p;
  p.grid = g;
  p.a_op = op_id_plus_average(1.0, 1.0);
  p.biactive = CellSet(g, true);
  p.strongly_active = CellSet(g);
  p.inactive = CellSet(g);
  p.w_bound_set = CellSet(g, true);
  m = zero_multipliers(g);
  m.p[0] = 0.5;
  m.lam[0] = -0.25;
  m.mu[0] = mu;
  m.nu[0] = nu;
  p.f_u = GridFunction(g, {-1.0 - mu});
  p.f_w = GridFunction(g, {0.75});
  p.f_xi = GridFunction(g, {0.5 - nu});
  return p;
}

}  // namespace

TEST_CASE("product condition residual") {
  auto g = build_uniform_grid(0.0, 1.0, 3);
  CellSet biactive(g);
  biactive.add(0);
  biactive.add(2);
  GridFunction mu(g), nu(g);

  SECTION("both strictly negative passes") {
    mu = GridFunction(g, {-1.0, 9.0, -0.5});
    nu = GridFunction(g, {-2.0, 9.0, -3.0});
    REQUIRE(m_condition_residual(mu, nu, biactive, 1e-10) == 0.0);
  }

  SECTION("vanishing product passes") {
    mu = GridFunction(g, {0.0, 9.0, -1.0});
    nu = GridFunction(g, {5.0, 9.0, 0.0});
    REQUIRE(m_condition_residual(mu, nu, biactive, 1e-10) == 0.0);
  }

  SECTION("cells outside the biactive set are ignored") {
    mu = GridFunction(g, {-1.0, 7.0, -1.0});
    nu = GridFunction(g, {-1.0, 7.0, -1.0});
    REQUIRE(m_condition_residual(mu, nu, biactive, 1e-10) == 0.0);
  }

  SECTION("positive product with positive factors fails") {
    mu = GridFunction(g, {2.0, 0.0, -1.0});
    nu = GridFunction(g, {3.0, 0.0, -1.0});
    REQUIRE(m_condition_residual(mu, nu, biactive, 1e-10) ==
            Catch::Approx(1.0).margin(1e-15));
  }
}

TEST_CASE("certificate kinds on a one cell instance") {
  KktMultipliers m;

  SECTION("both multipliers negative is weak, m and s stationary") {
    auto p = one_cell_problem(-1.0, -2.0, m);
    REQUIRE(check_weak(p, m, 1e-10).verdict);
    REQUIRE(check_m(p, m, 1e-10).verdict);
    REQUIRE(check_s(p, m, 1e-10).verdict);
  }

  SECTION("mixed signs with nonzero product fail m and s but stay weak") {
    auto p = one_cell_problem(-1.0, 2.0, m);
    REQUIRE(check_weak(p, m, 1e-10).verdict);
    const auto cm = check_m(p, m, 1e-10);
    REQUIRE_FALSE(cm.verdict);
    REQUIRE(cm.m_condition == Catch::Approx(0.5).margin(1e-15));
    REQUIRE_FALSE(check_s(p, m, 1e-10).verdict);
  }

  SECTION("a vanishing factor restores m but not s") {
    auto p = one_cell_problem(0.0, 2.0, m);
    REQUIRE(check_m(p, m, 1e-10).verdict);
    REQUIRE_FALSE(check_s(p, m, 1e-10).verdict);
  }

  SECTION("branch certificates depend on the branch") {
    auto p = one_cell_problem(-1.0, 2.0, m);
    CellSet empty(p.grid), full(p.grid, true);
    REQUIRE(check_branch(p, m, empty, 1e-10).verdict);   // nu is free off beta
    REQUIRE_FALSE(check_branch(p, m, full, 1e-10).verdict);  // nu <= 0 on beta
  }
}

TEST_CASE("certificates on planted branch instances") {
  for (std::uint64_t seed = 400; seed < 430; ++seed) {
    auto p = random_problem(seed, 4 + static_cast<int>(seed % 4));
    CellSet beta = random_beta(seed + 1, p);
    KktMultipliers m = plant_multipliers(seed + 2, p, beta);
    const auto cb = check_branch(p, m, beta, 1e-10);
    REQUIRE(cb.verdict);
    REQUIRE(cb.worst() <= 1e-10);
    REQUIRE(cb.kind == CertKind::Branch);
    REQUIRE(check_weak(p, m, 1e-10).verdict);
  }
}

TEST_CASE("certificate kind names") {
  REQUIRE(std::string(cert_kind_name(CertKind::Weak)) == "weak");
  REQUIRE(std::string(cert_kind_name(CertKind::Branch)) == "branch");
  REQUIRE(std::string(cert_kind_name(CertKind::M)) == "m");
  REQUIRE(std::string(cert_kind_name(CertKind::S)) == "s");
}
