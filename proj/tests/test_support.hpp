#pragma once

#include <mstat/mpcc_lin.hpp>
#include <mstat/operators.hpp>

namespace test_support {

using namespace mstat;

// Random cell partition plus random costs.  Deterministic in the seed.
inline MpccLinProblem random_problem(std::uint64_t seed, int n, double a = 0.0, double b = 1.0) {
  detail::SplitMix64 rng(seed);
  auto g = build_uniform_grid(a, b, n);
  MpccLinProblem p;
  p.grid = g;
  p.a_op = op_id_plus_average(1.0, 1.0);
  p.f_u = GridFunction(g);
  p.f_w = GridFunction(g);
  p.f_xi = GridFunction(g);
  p.strongly_active = CellSet(g);
  p.biactive = CellSet(g);
  p.inactive = CellSet(g);
  p.w_bound_set = CellSet(g);
  for (int i = 0; i < n; ++i) {
    const int cls = rng.next_below(3);
    if (cls == 0)
      p.strongly_active.add(i);
    else if (cls == 1)
      p.biactive.add(i);
    else
      p.inactive.add(i);
    if (rng.next_double() < 0.5) p.w_bound_set.add(i);
    p.f_u[i] = rng.uniform(-2.0, 2.0);
    p.f_w[i] = rng.uniform(-2.0, 2.0);
    p.f_xi[i] = rng.uniform(-2.0, 2.0);
  }
  return p;
}

// Pick a random subset of the biactive cells.
inline CellSet random_beta(std::uint64_t seed, const MpccLinProblem &p) {
  detail::SplitMix64 rng(seed);
  CellSet beta(p.grid);
  for (int i = 0; i < p.grid->size(); ++i)
    if (p.biactive.mask[i] && rng.next_double() < 0.5) beta.add(i);
  return beta;
}

// Sample multipliers respecting the given sign classes, then choose the costs
// so that the sampled multipliers satisfy the system exactly.  This plants a
// feasible instance with a known witness.
inline KktMultipliers plant_with_signs(std::uint64_t seed, MpccLinProblem &p,
                                       const MultiplierSigns &signs) {
  detail::SplitMix64 rng(seed);
  const int n = p.grid->size();
  KktMultipliers m = zero_multipliers(p.grid);
  auto draw = [&](SignClass c) {
    switch (c) {
      case SignClass::Zero: return 0.0;
      case SignClass::NonPos: return -rng.uniform(0.0, 2.0);
      case SignClass::Free: return rng.uniform(-2.0, 2.0);
    }
    return 0.0;
  };
  for (int i = 0; i < n; ++i) {
    m.p[i] = rng.uniform(-2.0, 2.0);
    m.mu[i] = draw(signs.mu[i]);
    m.nu[i] = draw(signs.nu[i]);
    m.lam[i] = draw(signs.lam[i]);
  }
  const GridFunction Ap = apply_adjoint(p.a_op, m.p);
  for (int i = 0; i < n; ++i) {
    p.f_u[i] = -Ap[i] - m.mu[i];
    p.f_w[i] = m.p[i] - m.lam[i];
    p.f_xi[i] = m.p[i] - m.nu[i];
  }
  return m;
}

inline KktMultipliers plant_multipliers(std::uint64_t seed, MpccLinProblem &p,
                                        const CellSet &beta) {
  return plant_with_signs(seed, p, signs_for_beta(p, beta));
}

// A strongly stationary witness satisfies every branch system at once, so the
// planted instance admits multipliers for all subsets of the biactive set.
inline KktMultipliers plant_forall(std::uint64_t seed, MpccLinProblem &p) {
  return plant_with_signs(seed, p, signs_strong(p));
}

}  // namespace test_support
