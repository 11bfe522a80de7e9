#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ioc_problem.hpp"
#include "mpcc_lin.hpp"

namespace mstat {

inline void write_text_file(const std::string &path, const std::string &content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw error(errc::invalid_argument, "cannot open for writing: " + path);
  os << content;
  if (!os) throw error(errc::invalid_argument, "write failed: " + path);
}

inline std::string read_text_file(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw error(errc::invalid_argument, "cannot open: " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

// ---------------------------------------------------------------------------
// Problem files: a strict line-based configuration with [section] headers and
// key = value pairs.  '#' starts a comment.  Sections: [grid], [operator],
// then either [mpcc_lin] with [sets], or [ioc]; costs live in [costs].
// Grid functions are inline value lists or csv:<path> references relative to
// the file.  Unknown sections or keys are rejected.
// ---------------------------------------------------------------------------

namespace detail {

struct ConfigSection {
  std::string name;
  std::vector<std::pair<std::string, std::string>> entries;
  mutable std::vector<char> used;
};

struct Config {
  std::vector<ConfigSection> sections;

  const ConfigSection *find(const std::string &name) const {
    for (const auto &s : sections)
      if (s.name == name) return &s;
    return nullptr;
  }
};

inline std::string trim(const std::string &s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline Config parse_config(const std::string &text) {
  Config cfg;
  std::istringstream is(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    const std::size_t hash = raw.find('#');
    std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw error(errc::invalid_argument,
                    "problem file line " + std::to_string(lineno) + ": malformed section header");
      const std::string name = trim(line.substr(1, line.size() - 2));
      if (cfg.find(name))
        throw error(errc::invalid_argument, "problem file: duplicate section [" + name + "]");
      cfg.sections.push_back({name, {}, {}});
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos || cfg.sections.empty())
      throw error(errc::invalid_argument,
                  "problem file line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw error(errc::invalid_argument,
                  "problem file line " + std::to_string(lineno) + ": empty key or value");
    ConfigSection &sec = cfg.sections.back();
    for (const auto &[k, v] : sec.entries)
      if (k == key)
        throw error(errc::invalid_argument,
                    "problem file: duplicate key '" + key + "' in [" + sec.name + "]");
    sec.entries.emplace_back(std::move(key), std::move(value));
  }
  for (auto &s : cfg.sections) s.used.assign(s.entries.size(), 0);
  return cfg;
}

// Typed access that marks entries as consumed, so leftovers can be rejected.
class SectionReader {
 public:
  SectionReader(const Config &cfg, const std::string &name) : name_(name) {
    sec_ = cfg.find(name);
    if (!sec_) throw error(errc::invalid_argument, "problem file: missing section [" + name + "]");
  }

  const std::string *try_raw(const std::string &key) const {
    for (std::size_t i = 0; i < sec_->entries.size(); ++i)
      if (sec_->entries[i].first == key) {
        sec_->used[i] = 1;
        return &sec_->entries[i].second;
      }
    return nullptr;
  }

  std::string raw(const std::string &key) const {
    const std::string *v = try_raw(key);
    if (!v)
      throw error(errc::invalid_argument,
                  "problem file: missing key '" + key + "' in [" + name_ + "]");
    return *v;
  }

  double number(const std::string &key) const { return parse_number(raw(key), key); }

  int integer(const std::string &key) const {
    const double v = number(key);
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v)
      throw error(errc::invalid_argument, "problem file: key '" + key + "' must be an integer");
    return i;
  }

  std::vector<double> number_list(const std::string &key) const {
    return parse_number_list(raw(key), key);
  }

  std::vector<int> index_list(const std::string &key) const {
    std::vector<int> out;
    for (double v : parse_number_list(raw(key), key)) {
      const int i = static_cast<int>(v);
      if (static_cast<double>(i) != v)
        throw error(errc::invalid_argument,
                    "problem file: key '" + key + "' must list cell indices");
      out.push_back(i);
    }
    return out;
  }

  void reject_leftovers() const {
    for (std::size_t i = 0; i < sec_->entries.size(); ++i)
      if (!sec_->used[i])
        throw error(errc::invalid_argument, "problem file: unknown key '" +
                                                sec_->entries[i].first + "' in [" + name_ + "]");
  }

  static double parse_number(const std::string &s, const std::string &key) {
    char *end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || trim(end).size() != 0)
      throw error(errc::invalid_argument, "problem file: key '" + key + "' is not a number");
    return v;
  }

  static std::vector<double> parse_number_list(const std::string &s, const std::string &key) {
    std::vector<double> out;
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) {
      char *end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str() || *end != '\0')
        throw error(errc::invalid_argument,
                    "problem file: key '" + key + "' has a non-numeric entry '" + tok + "'");
      out.push_back(v);
    }
    if (out.empty())
      throw error(errc::invalid_argument, "problem file: key '" + key + "' lists no values");
    return out;
  }

 private:
  const ConfigSection *sec_ = nullptr;
  std::string name_;
};

inline GridFunction grid_function_value(const SectionReader &sec, const std::string &key,
                                        const GridPtr &g, const std::filesystem::path &base_dir) {
  const std::string v = sec.raw(key);
  if (v.rfind("csv:", 0) == 0) {
    const std::filesystem::path p = base_dir / v.substr(4);
    std::ifstream is(p, std::ios::binary);
    if (!is) throw error(errc::invalid_argument, "cannot open csv reference: " + p.string());
    return read_csv(g, is);
  }
  std::vector<double> vals = SectionReader::parse_number_list(v, key);
  if (static_cast<int>(vals.size()) != g->size())
    throw error(errc::invalid_argument, "problem file: key '" + key + "' lists " +
                                            std::to_string(vals.size()) + " values for " +
                                            std::to_string(g->size()) + " cells");
  return GridFunction(g, std::move(vals));
}

inline CellSet cell_set_value(const SectionReader &sec, const std::string &key, const GridPtr &g,
                              bool required = true) {
  if (!required && !sec.try_raw(key)) return CellSet(g);
  std::vector<int> ix = sec.index_list(key);
  // an empty set is not expressible as an empty value, so it is spelled as
  // the lone sentinel index -1
  if (ix.size() == 1 && ix[0] == -1) return CellSet(g);
  return set_from_indices(g, ix);
}

inline LinOp operator_value(const SectionReader &sec, int n) {
  const std::string kind = sec.raw("kind");
  if (kind == "scaled_identity") return op_scaled_identity(sec.number("factor"));
  if (kind == "scaled_id_plus_average")
    return op_id_plus_average(sec.number("d1"), sec.number("d2"));
  if (kind == "average") return op_average(sec.number("c"));
  if (kind == "inv_dirichlet_laplacian") return op_inverse_laplacian();
  if (kind == "matrix") {
    std::vector<double> entries = sec.number_list("entries");
    if (static_cast<int>(entries.size()) != n * n)
      throw error(errc::invalid_argument,
                  "problem file: matrix operator needs n*n row-major entries");
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = entries[i * n + j];
    return op_matrix(std::move(m));
  }
  throw error(errc::invalid_argument, "problem file: unknown operator kind '" + kind + "'");
}

}  // namespace detail

struct LoadedProblem {
  enum class Kind { MpccLin, Ioc };
  Kind kind = Kind::MpccLin;
  MpccLinProblem lin;
  IocProblem ioc;
};

inline LoadedProblem load_problem_text(const std::string &text,
                                       const std::filesystem::path &base_dir) {
  const detail::Config cfg = detail::parse_config(text);
  for (const auto &s : cfg.sections)
    if (s.name != "grid" && s.name != "operator" && s.name != "mpcc_lin" && s.name != "ioc" &&
        s.name != "sets" && s.name != "costs")
      throw error(errc::invalid_argument, "problem file: unknown section [" + s.name + "]");
  const bool has_lin = cfg.find("mpcc_lin") != nullptr;
  const bool has_ioc = cfg.find("ioc") != nullptr;
  if (has_lin == has_ioc)
    throw error(errc::invalid_argument,
                "problem file: need exactly one of [mpcc_lin] and [ioc]");

  detail::SectionReader grid_sec(cfg, "grid");
  const double a = grid_sec.number("a");
  const double b = grid_sec.number("b");
  const int n = grid_sec.integer("n");
  grid_sec.reject_leftovers();
  GridPtr g = build_uniform_grid(a, b, n);

  detail::SectionReader op_sec(cfg, "operator");
  LinOp op = detail::operator_value(op_sec, n);
  op_sec.reject_leftovers();

  detail::SectionReader costs(cfg, "costs");
  LoadedProblem out;
  if (has_lin) {
    out.kind = LoadedProblem::Kind::MpccLin;
    detail::SectionReader marker(cfg, "mpcc_lin");
    marker.reject_leftovers();
    detail::SectionReader sets(cfg, "sets");
    MpccLinProblem &p = out.lin;
    p.grid = g;
    p.a_op = std::move(op);
    p.f_u = detail::grid_function_value(costs, "f_u", g, base_dir);
    p.f_w = detail::grid_function_value(costs, "f_w", g, base_dir);
    p.f_xi = detail::grid_function_value(costs, "f_xi", g, base_dir);
    costs.reject_leftovers();
    p.strongly_active = detail::cell_set_value(sets, "strongly_active", g);
    p.biactive = detail::cell_set_value(sets, "biactive", g);
    p.inactive = detail::cell_set_value(sets, "inactive", g);
    p.w_bound_set = detail::cell_set_value(sets, "w_bound_set", g, /*required=*/false);
    sets.reject_leftovers();
    validate_problem(p);
    return out;
  }

  out.kind = LoadedProblem::Kind::Ioc;
  if (cfg.find("sets"))
    throw error(errc::invalid_argument,
                "problem file: [sets] is derived for [ioc] problems, remove it");
  detail::SectionReader ioc_sec(cfg, "ioc");
  IocProblem &ioc = out.ioc;
  ioc.grid = g;
  ioc.s_op = std::move(op);
  ioc.alpha = ioc_sec.number("alpha");
  ioc.y_d = detail::grid_function_value(ioc_sec, "y_d", g, base_dir);
  ioc.u_a = detail::grid_function_value(ioc_sec, "u_a", g, base_dir);
  ioc.w_a = detail::grid_function_value(ioc_sec, "w_a", g, base_dir);
  ioc.zeta = detail::grid_function_value(ioc_sec, "zeta", g, base_dir);
  ioc_sec.reject_leftovers();
  const std::string cost_kind = costs.raw("kind");
  if (cost_kind == "linear") {
    ioc.f = cost_linear(detail::grid_function_value(costs, "c", g, base_dir));
  } else if (cost_kind == "tracking") {
    ioc.f = cost_tracking(detail::grid_function_value(costs, "u_ref", g, base_dir));
  } else {
    throw error(errc::invalid_argument, "problem file: unknown cost kind '" + cost_kind + "'");
  }
  costs.reject_leftovers();
  validate_ioc(ioc);
  return out;
}

inline LoadedProblem load_problem_file(const std::string &path) {
  return load_problem_text(read_text_file(path), std::filesystem::path(path).parent_path());
}

}  // namespace mstat
