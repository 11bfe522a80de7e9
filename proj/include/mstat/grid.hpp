#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <istream>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "errors.hpp"

namespace mstat {

// Cell partition of an interval (a, b).  Functions live at cell midpoints and
// integrals are weighted sums, so a Grid is midpoints plus positive weights.
struct Grid {
  double a = 0.0;
  double b = 1.0;
  std::vector<double> midpoints;
  std::vector<double> weights;

  int size() const { return static_cast<int>(midpoints.size()); }

  double measure() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
  }
};

using GridPtr = std::shared_ptr<const Grid>;

inline GridPtr build_uniform_grid(double a, double b, int n) {
  if (!(b > a)) throw error(errc::invalid_argument, "grid needs b > a");
  if (n < 1) throw error(errc::invalid_argument, "grid needs at least one cell");
  auto g = std::make_shared<Grid>();
  g->a = a;
  g->b = b;
  g->midpoints.resize(n);
  g->weights.resize(n);
  const double h = (b - a) / n;
  for (int i = 0; i < n; ++i) {
    g->midpoints[i] = a + (i + 0.5) * h;
    g->weights[i] = h;
  }
  return g;
}

// Uniform spacing, or invalid-argument if the grid was built otherwise.
inline double uniform_spacing(const Grid &g) {
  if (g.size() == 0) throw error(errc::invalid_argument, "empty grid");
  const double h = g.weights[0];
  for (double w : g.weights)
    if (w != h) throw error(errc::invalid_argument, "grid is not uniform");
  return h;
}

inline bool same_grid(const GridPtr &x, const GridPtr &y) {
  if (x == y) return true;
  if (!x || !y) return false;
  return x->a == y->a && x->b == y->b && x->midpoints == y->midpoints &&
         x->weights == y->weights;
}

inline void require_same_grid(const GridPtr &x, const GridPtr &y, const char *what) {
  if (!same_grid(x, y))
    throw error(errc::invalid_argument, std::string(what) + ": grid mismatch");
}

// Values at cell midpoints, bound to their grid.
struct GridFunction {
  GridPtr grid;
  std::vector<double> values;

  GridFunction() = default;
  explicit GridFunction(GridPtr g, double fill = 0.0)
      : grid(std::move(g)), values(grid ? grid->size() : 0, fill) {}
  GridFunction(GridPtr g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
    if (!grid || static_cast<int>(values.size()) != grid->size())
      throw error(errc::invalid_argument, "grid function size mismatch");
  }

  int size() const { return static_cast<int>(values.size()); }
  double &operator[](int i) { return values[i]; }
  double operator[](int i) const { return values[i]; }
};

inline GridFunction gf_from(const GridPtr &g, const std::function<double(double)> &f) {
  GridFunction u(g);
  for (int i = 0; i < u.size(); ++i) u[i] = f(g->midpoints[i]);
  return u;
}

inline GridFunction operator+(const GridFunction &x, const GridFunction &y) {
  require_same_grid(x.grid, y.grid, "operator+");
  GridFunction r(x.grid);
  for (int i = 0; i < r.size(); ++i) r[i] = x[i] + y[i];
  return r;
}

inline GridFunction operator-(const GridFunction &x, const GridFunction &y) {
  require_same_grid(x.grid, y.grid, "operator-");
  GridFunction r(x.grid);
  for (int i = 0; i < r.size(); ++i) r[i] = x[i] - y[i];
  return r;
}

inline GridFunction operator*(double s, const GridFunction &x) {
  GridFunction r(x.grid);
  for (int i = 0; i < r.size(); ++i) r[i] = s * x[i];
  return r;
}

inline GridFunction abs(const GridFunction &x) {
  GridFunction r(x.grid);
  for (int i = 0; i < r.size(); ++i) r[i] = std::fabs(x[i]);
  return r;
}

inline GridFunction pointwise_max(const GridFunction &x, const GridFunction &y) {
  require_same_grid(x.grid, y.grid, "pointwise_max");
  GridFunction r(x.grid);
  for (int i = 0; i < r.size(); ++i) r[i] = std::max(x[i], y[i]);
  return r;
}

inline GridFunction pointwise_min(const GridFunction &x, const GridFunction &y) {
  require_same_grid(x.grid, y.grid, "pointwise_min");
  GridFunction r(x.grid);
  for (int i = 0; i < r.size(); ++i) r[i] = std::min(x[i], y[i]);
  return r;
}

// Weighted L2 inner product ⟨u, v⟩ = sum_i w_i u_i v_i.
inline double inner_product(const GridFunction &x, const GridFunction &y) {
  require_same_grid(x.grid, y.grid, "inner_product");
  double s = 0.0;
  for (int i = 0; i < x.size(); ++i) s += x.grid->weights[i] * x[i] * y[i];
  return s;
}

inline double norm_l2(const GridFunction &x) { return std::sqrt(inner_product(x, x)); }

inline double norm_l1(const GridFunction &x) {
  double s = 0.0;
  for (int i = 0; i < x.size(); ++i) s += x.grid->weights[i] * std::fabs(x[i]);
  return s;
}

inline double norm_linf(const GridFunction &x) {
  double s = 0.0;
  for (double v : x.values) s = std::max(s, std::fabs(v));
  return s;
}

// Subset of cells of a grid, stored as a 0/1 mask.
struct CellSet {
  GridPtr grid;
  std::vector<std::uint8_t> mask;

  CellSet() = default;
  explicit CellSet(GridPtr g, bool fill = false)
      : grid(std::move(g)), mask(grid ? grid->size() : 0, fill ? 1 : 0) {}

  int size() const { return static_cast<int>(mask.size()); }
  bool contains(int i) const { return mask[i] != 0; }
  void add(int i) { mask[i] = 1; }

  int count() const {
    int c = 0;
    for (auto m : mask) c += (m != 0);
    return c;
  }

  double measure() const {
    double s = 0.0;
    for (int i = 0; i < size(); ++i)
      if (mask[i]) s += grid->weights[i];
    return s;
  }

  std::vector<int> indices() const {
    std::vector<int> ix;
    for (int i = 0; i < size(); ++i)
      if (mask[i]) ix.push_back(i);
    return ix;
  }
};

inline CellSet set_from_indices(const GridPtr &g, const std::vector<int> &ix) {
  CellSet s(g);
  for (int i : ix) {
    if (i < 0 || i >= s.size())
      throw error(errc::invalid_argument, "cell index out of range");
    s.add(i);
  }
  return s;
}

inline CellSet set_complement(const CellSet &s) {
  CellSet r(s.grid);
  for (int i = 0; i < r.size(); ++i) r.mask[i] = s.mask[i] ? 0 : 1;
  return r;
}

inline CellSet set_union(const CellSet &x, const CellSet &y) {
  require_same_grid(x.grid, y.grid, "set_union");
  CellSet r(x.grid);
  for (int i = 0; i < r.size(); ++i) r.mask[i] = (x.mask[i] || y.mask[i]) ? 1 : 0;
  return r;
}

inline CellSet set_intersect(const CellSet &x, const CellSet &y) {
  require_same_grid(x.grid, y.grid, "set_intersect");
  CellSet r(x.grid);
  for (int i = 0; i < r.size(); ++i) r.mask[i] = (x.mask[i] && y.mask[i]) ? 1 : 0;
  return r;
}

inline CellSet set_minus(const CellSet &x, const CellSet &y) {
  require_same_grid(x.grid, y.grid, "set_minus");
  CellSet r(x.grid);
  for (int i = 0; i < r.size(); ++i) r.mask[i] = (x.mask[i] && !y.mask[i]) ? 1 : 0;
  return r;
}

inline bool set_subset(const CellSet &x, const CellSet &y) {
  require_same_grid(x.grid, y.grid, "set_subset");
  for (int i = 0; i < x.size(); ++i)
    if (x.mask[i] && !y.mask[i]) return false;
  return true;
}

// Indicator as a grid function (1 on the set, 0 elsewhere).
inline GridFunction indicator(const CellSet &s) {
  GridFunction r(s.grid);
  for (int i = 0; i < r.size(); ++i) r[i] = s.mask[i] ? 1.0 : 0.0;
  return r;
}

// Round-trip safe double formatting (17 significant digits).
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// CSV layout: one header line "midpoint,value", then one row per cell.
inline void write_csv(std::ostream &os, const GridFunction &u) {
  os << "midpoint,value\n";
  for (int i = 0; i < u.size(); ++i)
    os << format_double(u.grid->midpoints[i]) << ',' << format_double(u[i]) << '\n';
}

// Reads a function back onto an existing grid; the midpoint column must match
// the grid bit-for-bit after round-trip formatting.
inline GridFunction read_csv(const GridPtr &g, std::istream &is) {
  std::string line;
  if (!std::getline(is, line) || line != "midpoint,value")
    throw error(errc::invalid_argument, "csv: missing midpoint,value header");
  GridFunction u(g);
  int i = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (i >= u.size()) throw error(errc::invalid_argument, "csv: too many rows for grid");
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw error(errc::invalid_argument, "csv: malformed row '" + line + "'");
    char *end = nullptr;
    const std::string mid_s = line.substr(0, comma);
    const std::string val_s = line.substr(comma + 1);
    const double mid = std::strtod(mid_s.c_str(), &end);
    if (end == mid_s.c_str()) throw error(errc::invalid_argument, "csv: bad midpoint");
    const double val = std::strtod(val_s.c_str(), &end);
    if (end == val_s.c_str()) throw error(errc::invalid_argument, "csv: bad value");
    if (mid != g->midpoints[i])
      throw error(errc::invalid_argument, "csv: midpoint mismatch at row " + std::to_string(i));
    u[i] = val;
    ++i;
  }
  if (i != u.size()) throw error(errc::invalid_argument, "csv: too few rows for grid");
  return u;
}

namespace detail {

// splitmix64, used wherever reproducible pseudo-randomness is needed so that
// reports stay byte-identical across runs and toolchains.
struct SplitMix64 {
  std::uint64_t state;
  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

  // uniform in [lo, hi)
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // uniform integer in [0, n)
  int next_below(int n) { return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n)); }
};

}  // namespace detail

}  // namespace mstat
