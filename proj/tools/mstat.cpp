#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <mstat/mstat.hpp>

using namespace mstat;

namespace {

struct GlobalOpts {
  double tol = 1e-9;
  int cap = 12;
  std::string out;
  bool all_patterns = false;
  bool no_timestamp = false;
};

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double lap() {
    const auto t1 = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(t1 - t0).count();
    t0 = t1;
    return s;
  }
};

const char *kkt_status_name(KktSolveStatus s) {
  return s == KktSolveStatus::Found ? "found" : "infeasible";
}

// A report file keeps the .json name; side CSV artifacts swap the extension.
std::string side_path(const std::string &out, const std::string &suffix) {
  std::filesystem::path p(out);
  p.replace_extension();
  return p.string() + suffix;
}

int emit(RunReport &rep, const GlobalOpts &g, bool verdict,
         const std::vector<std::pair<std::string, std::string>> &side_files = {}) {
  rep.with_timestamp = !g.no_timestamp;
  const std::string text = rep.render();
  if (g.out.empty()) {
    std::fputs(text.c_str(), stdout);
  } else {
    write_text_file(g.out, text);
    for (const auto &[suffix, content] : side_files)
      if (!content.empty()) write_text_file(side_path(g.out, suffix), content);
  }
  return verdict ? 0 : 2;
}

LoadedProblem load_absorbing(RunReport &rep, const std::string &path) {
  const std::string bytes = read_text_file(path);
  rep.absorb_input(bytes);
  return load_problem_text(bytes, std::filesystem::path(path).parent_path());
}

GridFunction read_w_csv(RunReport &rep, const GridPtr &g, const std::string &path) {
  const std::string bytes = read_text_file(path);
  rep.absorb_input(bytes);
  std::istringstream is(bytes);
  return read_csv(g, is);
}

// The three single-code sign systems: one pattern code imposed on every
// biactive cell on top of the weak sign classes.
MultiplierSigns uniform_pattern_signs(const MpccLinProblem &p, PatternCode code) {
  MultiplierSigns s = signs_weak(p);
  for (int i = 0; i < p.grid->size(); ++i) {
    if (!p.biactive.mask[i]) continue;
    switch (code) {
      case PatternCode::BothNonpositive:
        s.mu[i] = SignClass::NonPos;
        s.nu[i] = SignClass::NonPos;
        break;
      case PatternCode::MuZero: s.mu[i] = SignClass::Zero; break;
      case PatternCode::NuZero: s.nu[i] = SignClass::Zero; break;
    }
  }
  return s;
}

// Full per-cell pattern scan; averaging-type operators are rescaled to the
// unit form first, which preserves pattern feasibility (the multiplier map
// is diagonal with positive factors).
std::vector<PatternReport> scan_all_patterns(const MpccLinProblem &prob, int cap) {
  if (const auto *s = std::get_if<ScaledIdPlusAverage>(&prob.a_op.v);
      s && s->d1 > 0.0 && s->d2 > 0.0 && !is_unit_average_op(prob.a_op)) {
    const detail::RescaledProblem re = detail::rescale_to_unit_average(prob, s->d1, s->d2);
    return scan_patterns(enumerate_family(re.prob, cap));
  }
  return scan_patterns(enumerate_family(prob, cap));
}

std::string pattern_table_csv(const std::vector<PatternReport> &reports) {
  std::string csv = "pattern,feasible\n";
  for (const PatternReport &r : reports) {
    std::string cell;
    for (PatternCode c : r.pattern) {
      if (!cell.empty()) cell += ' ';
      cell += pattern_code_name(c);
    }
    csv += cell + ',' + (r.feasible ? "true" : "false") + '\n';
  }
  return csv;
}

struct CertifyOpts {
  std::string problem;
  std::string w;
  std::string kind = "m";
  std::vector<int> beta;
};

int certify_lin(const MpccLinProblem &prob, const CertifyOpts &o, const GlobalOpts &g,
                RunReport &rep) {
  MultiplierSigns signs;
  CertKind kind = CertKind::Weak;
  if (o.kind == "s") {
    signs = signs_strong(prob);
    kind = CertKind::S;
  } else if (o.kind == "weak") {
    signs = signs_weak(prob);
  } else if (o.kind == "branch") {
    CellSet bs = set_from_indices(prob.grid, o.beta);
    signs = signs_for_beta(prob, bs);
    kind = CertKind::Branch;
  } else {
    throw error(errc::invalid_argument, "unknown certificate kind '" + o.kind + "'");
  }
  const KktSolveResult res = solve_kkt_signs(prob, signs);

  StationarityCertificate c;
  c.kind = kind;
  c.tol = g.tol;
  c.verdict = res.status == KktSolveStatus::Found;
  c.m = c.verdict ? res.m : zero_multipliers(prob.grid);
  if (c.verdict) c.residuals = kkt_signs_residuals(prob, signs, c.m);
  if (kind == CertKind::Branch) c.beta = o.beta;
  rep.results["certificate"] = certificate_json(c);
  if (!c.verdict) rep.results["phase1_infeasibility"] = res.phase1_infeasibility;
  return emit(rep, g, c.verdict);
}

int cmd_certify(const CertifyOpts &o, const GlobalOpts &g, RunReport &rep) {
  if (o.kind != "branch" && !o.beta.empty())
    throw error(errc::invalid_argument, "--beta only applies to --kind branch");
  Timer timer;
  LoadedProblem lp = load_absorbing(rep, o.problem);

  if (lp.kind == LoadedProblem::Kind::MpccLin) {
    if (!o.w.empty())
      throw error(errc::invalid_argument, "only bilevel problems take --w");
    rep.timings.emplace_back("load", timer.lap());
    if (o.kind != "m") return certify_lin(lp.lin, o, g, rep);
    const StationarityCertificate cert = certify_m(lp.lin, g.cap, g.tol);
    rep.timings.emplace_back("solve", timer.lap());
    rep.results["certificate"] = certificate_json(cert);
    return emit(rep, g, cert.verdict);
  }

  if (o.w.empty())
    throw error(errc::invalid_argument, "bilevel problems need --w with the parameter iterate");
  const GridFunction w = read_w_csv(rep, lp.ioc.grid, o.w);
  rep.timings.emplace_back("load", timer.lap());
  if (o.kind == "m") {
    const IocCertificate cert = certify_ioc(lp.ioc, w, g.cap, g.tol);
    rep.timings.emplace_back("solve", timer.lap());
    rep.results["certificate"] = ioc_certificate_json(cert);
    return emit(rep, g, cert.lin.verdict);
  }
  const KktrPoint pt = build_kktr_point(lp.ioc, w);
  const MpccLinProblem lin = linearize(lp.ioc, pt, g.tol);
  return certify_lin(lin, o, g, rep);
}

struct ScenarioOpts {
  std::string name;
  int n = 0;  // 0 means the scenario default
  double alpha = 0.25;
  std::string variant = "averaging";
  int bands = 3;
};

int cmd_scenario_nostrong(const ScenarioOpts &o, const GlobalOpts &g, RunReport &rep) {
  const int n = o.n > 0 ? o.n : 64;
  NostrongVariant variant;
  if (o.variant == "averaging") {
    variant = NostrongVariant::Averaging;
  } else if (o.variant == "nonneg-matrix") {
    variant = NostrongVariant::NonnegMatrix;
  } else {
    throw error(errc::invalid_argument, "unknown variant '" + o.variant + "'");
  }
  std::ostringstream params;
  params << "nostrong n=" << n << " alpha=" << format_double(o.alpha) << " variant=" << o.variant;
  rep.absorb_input(params.str());

  Timer timer;
  const IocProblem ioc = scenario_nostrong(n, o.alpha, variant);
  const GridFunction w0(ioc.grid);
  const KktrPoint pt = build_kktr_point(ioc, w0);
  // the whole battery runs on the unit-coefficient normalization, the form
  // whose multiplier bound is p <= 1
  const MpccLinProblem unscaled = linearize_unscaled(ioc, pt, g.tol);
  rep.timings.emplace_back("assemble", timer.lap());

  Json R = Json::object();
  R["scenario"] = "nostrong";
  R["n"] = n;
  R["alpha"] = o.alpha;
  R["variant"] = nostrong_variant_name(variant);
  bool ok = true;

  const KktSolveResult strong = solve_kkt_signs(unscaled, signs_strong(unscaled));
  R["strong"] = {{"status", kkt_status_name(strong.status)},
                 {"phase1_infeasibility", strong.phase1_infeasibility}};
  ok = ok && strong.status == KktSolveStatus::Infeasible;

  const KktSolveResult weak = solve_kkt_signs(unscaled, signs_weak(unscaled));
  R["weak"] = {{"status", kkt_status_name(weak.status)}};
  ok = ok && weak.status == KktSolveStatus::Found;

  // the closed-form multipliers (p, nu, mu, lambda) = (0, 0, 1, -1) on the
  // unit-coefficient normalization
  KktMultipliers em = zero_multipliers(unscaled.grid);
  for (int i = 0; i < n; ++i) {
    em.mu[i] = 1.0;
    em.lam[i] = -1.0;
  }
  const StationarityCertificate mc = check_m(unscaled, em, g.tol);
  R["explicit_m"] = {{"verdict", mc.verdict}, {"worst", mc.worst()}};
  ok = ok && mc.verdict;

  const KktSolveResult mz =
      solve_kkt_signs(unscaled, uniform_pattern_signs(unscaled, PatternCode::MuZero));
  R["mu_zero_uniform"] = {{"status", kkt_status_name(mz.status)},
                          {"phase1_infeasibility", mz.phase1_infeasibility}};
  ok = ok && mz.status == KktSolveStatus::Infeasible;

  if (variant == NostrongVariant::Averaging) {
    // with mu wiped out the adjoint system pins p to the constant
    // 1/(alpha + alpha^2), which breaks the bound p <= 1
    const double pc = 1.0 / (o.alpha + o.alpha * o.alpha);
    const GridFunction pf(unscaled.grid, pc);
    const GridFunction ap = apply_adjoint(unscaled.a_op, pf);
    double r1 = 0.0;
    for (int i = 0; i < n; ++i) r1 = std::max(r1, std::fabs(unscaled.f_u[i] + ap[i]));
    R["mu_zero_candidate"] = {{"p", pc},
                              {"stationarity_residual", r1},
                              {"upper_bound_excess", pc - 1.0}};
    ok = ok && r1 <= 1e-8 && pc > 1.0;
  }
  rep.timings.emplace_back("battery", timer.lap());

  std::string csv;
  if (g.all_patterns) {
    Json table = Json::array();
    csv = "pattern,feasible\n";
    for (PatternCode code :
         {PatternCode::BothNonpositive, PatternCode::MuZero, PatternCode::NuZero}) {
      const KktSolveResult r = solve_kkt_signs(unscaled, uniform_pattern_signs(unscaled, code));
      const bool feasible = r.status == KktSolveStatus::Found;
      table.push_back({{"pattern", pattern_code_name(code)}, {"feasible", feasible}});
      csv += std::string(pattern_code_name(code)) + ',' + (feasible ? "true" : "false") + '\n';
    }
    R["patterns"] = std::move(table);
    R["csv"] = csv;
    rep.timings.emplace_back("patterns", timer.lap());
  }

  R["battery_passed"] = ok;
  rep.results = std::move(R);
  return emit(rep, g, ok, {{".csv", csv}});
}

int cmd_scenario_ex48(const ScenarioOpts &o, const GlobalOpts &g, RunReport &rep) {
  const int n_max = o.n > 0 ? o.n : 256;
  if (n_max < 64 || (n_max & (n_max - 1)) != 0)
    throw error(errc::invalid_argument,
                "the battery doubles the grid from 64, so --n must be a power of two >= 64");
  std::ostringstream params;
  params << "ex48 n=" << n_max << " bands=" << o.bands;
  rep.absorb_input(params.str());

  Json R = Json::object();
  R["scenario"] = "ex48";
  R["n"] = n_max;
  R["bands"] = o.bands;
  Json runs = Json::array();
  std::string csv = "n,min_l1_status,min_l1_p\n";
  std::map<int, std::vector<double>> residuals_by_band;
  std::vector<double> ml_values;
  bool all_found = true;
  bool lp_ok = true;
  Timer timer;

  for (int n = 64; n <= n_max; n *= 2) {
    // deepest band whose thin edge still spans a full cell at this width
    int resolvable = 1;
    while ((std::int64_t{1} << (2 * resolvable + 4)) <= n) ++resolvable;
    const int bands = std::min(o.bands, resolvable);
    const Ex48Scenario sc = scenario_ex48(n, bands);

    Json jr = Json::object();
    jr["n"] = n;
    jr["bands"] = bands;
    Json bres = Json::array();
    for (int k = 0; k < bands; ++k) {
      MpccLinProblem prob_k = sc.problem;
      prob_k.f_u = sc.bands[k].f_u;
      KktMultipliers mk{sc.bands[k].p, sc.bands[k].mu, sc.bands[k].p, sc.bands[k].p};
      const double res = kkt_beta_residuals(prob_k, sc.problem.biactive, mk).max();
      bres.push_back(res);
      residuals_by_band[sc.bands[k].k].push_back(res);
    }
    jr["band_residuals"] = std::move(bres);

    const PrimalLpResult lp = solve_lp_beta(sc.problem, sc.problem.biactive);
    jr["lp_beta"] = {{"status", lp_status_name(lp.status)}, {"value", lp.value}};
    lp_ok = lp_ok && lp.status == LpStatus::Optimal && std::fabs(lp.value) <= 1e-8;

    const MinL1Result ml = min_l1_multiplier(sc.problem, sc.problem.biactive);
    const bool found = ml.status == KktSolveStatus::Found;
    jr["min_l1"] = {{"status", kkt_status_name(ml.status)},
                    {"value", found ? Json(ml.value) : Json()}};
    csv += std::to_string(n) + ',' + kkt_status_name(ml.status) + ',' +
           (found ? format_double(ml.value) : "nan") + '\n';
    all_found = all_found && found;
    if (found) ml_values.push_back(ml.value);
    runs.push_back(std::move(jr));
    rep.timings.emplace_back("n" + std::to_string(n), timer.lap());
  }

  bool order_ok = true;
  Json orders = Json::object();
  for (const auto &[k, res] : residuals_by_band) {
    Json seq = Json::array();
    for (std::size_t i = 0; i + 1 < res.size(); ++i) {
      const double ord = std::log2(res[i] / res[i + 1]);
      seq.push_back(ord);
      order_ok = order_ok && ord >= 0.9;
    }
    orders["band" + std::to_string(k)] = std::move(seq);
  }
  bool increasing = all_found && ml_values.size() >= 2;
  for (std::size_t i = 0; increasing && i + 1 < ml_values.size(); ++i)
    increasing = ml_values[i] < ml_values[i + 1];
  if (!all_found) increasing = false;

  R["runs"] = std::move(runs);
  R["residual_orders"] = std::move(orders);
  R["csv"] = csv;
  R["checks"] = {{"lp_value_zero", lp_ok},
                 {"branch_residual_order", order_ok},
                 {"min_l1_increasing", increasing}};
  const bool ok = lp_ok && order_ok && increasing;
  R["battery_passed"] = ok;
  rep.results = std::move(R);
  return emit(rep, g, ok, {{".csv", csv}});
}

struct RegpathOpts {
  std::string problem;
  std::string w;
  double gamma0 = 1.0;
  double factor = 10.0;
  int steps = 9;
};

int cmd_regpath(const RegpathOpts &o, const GlobalOpts &g, RunReport &rep) {
  Timer timer;
  LoadedProblem lp = load_absorbing(rep, o.problem);
  if (lp.kind != LoadedProblem::Kind::Ioc)
    throw error(errc::invalid_argument, "the regularization path needs an [ioc] problem");
  const GridFunction w = read_w_csv(rep, lp.ioc.grid, o.w);
  rep.timings.emplace_back("load", timer.lap());

  RegSchedule sched;
  sched.gamma0 = o.gamma0;
  sched.factor = o.factor;
  sched.steps = o.steps;
  const RegPathReport path = run_reg_path(lp.ioc, w, sched);
  rep.timings.emplace_back("solve", timer.lap());

  const std::string csv = regpath_csv(path);
  rep.results["path"] = regpath_json(path);
  rep.results["csv"] = csv;
  return emit(rep, g, true, {{".csv", csv}});
}

struct ProblemWOpts {
  std::string problem;
  std::string w;
};

int cmd_lower_solve(const ProblemWOpts &o, const GlobalOpts &g, RunReport &rep) {
  Timer timer;
  LoadedProblem lp = load_absorbing(rep, o.problem);
  if (lp.kind != LoadedProblem::Kind::Ioc)
    throw error(errc::invalid_argument, "the lower-level solver needs an [ioc] problem");
  const GridFunction w = read_w_csv(rep, lp.ioc.grid, o.w);
  rep.timings.emplace_back("load", timer.lap());
  const LowerLevelSolution sol = solve_oc(lp.ioc, w);
  rep.timings.emplace_back("solve", timer.lap());

  rep.results["u"] = values_json(sol.u);
  rep.results["xi"] = values_json(sol.xi);
  rep.results["vi_residual"] = sol.vi_residual;
  rep.results["active"] = {{"strongly_active", sol.active_sets.strongly_active.count()},
                           {"biactive", sol.active_sets.biactive.count()},
                           {"inactive", sol.active_sets.inactive.count()}};
  return emit(rep, g, true,
              {{".u.csv", gridfunction_csv(sol.u)}, {".xi.csv", gridfunction_csv(sol.xi)}});
}

struct KktBetaOpts {
  std::string problem;
  std::vector<int> beta;
  bool min_l1 = false;
};

int cmd_kkt_beta(const KktBetaOpts &o, const GlobalOpts &g, RunReport &rep) {
  Timer timer;
  LoadedProblem lp = load_absorbing(rep, o.problem);
  if (lp.kind != LoadedProblem::Kind::MpccLin)
    throw error(errc::invalid_argument, "the branch solver needs an [mpcc_lin] problem");
  const MpccLinProblem &prob = lp.lin;
  const CellSet bs = set_from_indices(prob.grid, o.beta);
  rep.timings.emplace_back("load", timer.lap());

  const KktSolveResult res = solve_kkt_beta(prob, bs);
  StationarityCertificate c;
  c.kind = CertKind::Branch;
  c.tol = g.tol;
  c.verdict = res.status == KktSolveStatus::Found;
  c.m = c.verdict ? res.m : zero_multipliers(prob.grid);
  if (c.verdict) c.residuals = kkt_beta_residuals(prob, bs, c.m);
  c.beta = o.beta;
  rep.results["certificate"] = certificate_json(c);
  if (!c.verdict) rep.results["phase1_infeasibility"] = res.phase1_infeasibility;

  if (o.min_l1) {
    const MinL1Result ml = min_l1_multiplier(prob, bs);
    Json j = Json::object();
    j["status"] = kkt_status_name(ml.status);
    if (ml.status == KktSolveStatus::Found) {
      j["value"] = ml.value;
      j["multipliers"] = multipliers_json(ml.m);
    }
    rep.results["min_l1"] = std::move(j);
  }
  rep.timings.emplace_back("solve", timer.lap());
  return emit(rep, g, c.verdict);
}

struct SynthesizeOpts {
  std::string problem;
};

int cmd_synthesize(const SynthesizeOpts &o, const GlobalOpts &g, RunReport &rep) {
  Timer timer;
  LoadedProblem lp = load_absorbing(rep, o.problem);
  if (lp.kind != LoadedProblem::Kind::MpccLin)
    throw error(errc::invalid_argument, "synthesis needs an [mpcc_lin] problem");
  rep.timings.emplace_back("load", timer.lap());

  const StationarityCertificate cert = certify_m(lp.lin, g.cap, g.tol);
  rep.timings.emplace_back("solve", timer.lap());
  rep.results["certificate"] = certificate_json(cert);

  std::string csv;
  if (g.all_patterns) {
    const std::vector<PatternReport> reports = scan_all_patterns(lp.lin, g.cap);
    rep.results["patterns"] = pattern_reports_json(reports);
    csv = pattern_table_csv(reports);
    rep.results["csv"] = csv;
    rep.timings.emplace_back("patterns", timer.lap());
  }
  return emit(rep, g, cert.verdict, {{".csv", csv}});
}

int classify_exit(errc c) {
  switch (c) {
    case errc::invalid_argument:
    case errc::invalid_point:
    case errc::problem_too_large:
    case errc::unsupported_operator: return 3;
    default: return 2;
  }
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"stationarity certificates for discretized complementarity programs"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--tol", g.tol, "feasibility tolerance for certificates");
  app.add_option("--cap", g.cap, "largest biactive-cell count the branch enumeration accepts");
  app.add_option("--out", g.out, "write the JSON report here instead of standard output");
  app.add_flag("--all-patterns", g.all_patterns, "include the sign-pattern feasibility table");
  app.add_flag("--no-timestamp", g.no_timestamp,
               "omit timestamp and timings so identical runs are byte-identical");

  CertifyOpts co;
  CLI::App *certify = app.add_subcommand("certify", "certify stationarity of a problem file");
  certify->fallthrough();
  certify->add_option("--problem", co.problem, "problem file")->required();
  certify->add_option("--w", co.w, "parameter iterate CSV (bilevel problems)");
  certify->add_option("--kind", co.kind, "certificate kind: m, s, weak, branch");
  certify->add_option("--beta", co.beta, "biactive subset for --kind branch");

  ScenarioOpts so;
  CLI::App *scenario = app.add_subcommand("scenario", "run a built-in instance battery");
  scenario->fallthrough();
  scenario->add_option("name", so.name, "scenario name: nostrong or ex48")->required();
  scenario->add_option("--n", so.n, "grid cells (ex48: largest grid of the doubling battery)");
  scenario->add_option("--alpha", so.alpha, "control cost weight (nostrong)");
  scenario->add_option("--variant", so.variant, "nostrong variant: averaging or nonneg-matrix");
  scenario->add_option("--bands", so.bands, "requested band count (ex48)");

  RegpathOpts ro;
  CLI::App *regpath = app.add_subcommand("regpath", "trace the penalization path");
  regpath->fallthrough();
  regpath->add_option("--problem", ro.problem, "problem file ([ioc])")->required();
  regpath->add_option("--w", ro.w, "parameter iterate CSV")->required();
  regpath->add_option("--gamma0", ro.gamma0, "initial penalty weight");
  regpath->add_option("--factor", ro.factor, "geometric growth factor");
  regpath->add_option("--steps", ro.steps, "number of penalty stages");

  ProblemWOpts lo;
  CLI::App *lower = app.add_subcommand("lower-solve", "solve the lower-level problem at w");
  lower->fallthrough();
  lower->add_option("--problem", lo.problem, "problem file ([ioc])")->required();
  lower->add_option("--w", lo.w, "parameter iterate CSV")->required();

  KktBetaOpts ko;
  CLI::App *kktb = app.add_subcommand("kkt-beta", "solve one branch multiplier system");
  kktb->fallthrough();
  kktb->add_option("--problem", ko.problem, "problem file ([mpcc_lin])")->required();
  kktb->add_option("--beta", ko.beta, "biactive subset defining the branch");
  kktb->add_flag("--min-l1", ko.min_l1, "also minimize the weighted l1 norm of p");

  SynthesizeOpts yo;
  CLI::App *synth = app.add_subcommand("synthesize", "build combined multipliers via branches");
  synth->fallthrough();
  synth->add_option("--problem", yo.problem, "problem file ([mpcc_lin])")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 3;
  }

  RunReport rep;
  for (int i = 1; i < argc; ++i) {
    if (i > 1) rep.command += ' ';
    rep.command += argv[i];
  }

  try {
    if (certify->parsed()) return cmd_certify(co, g, rep);
    if (scenario->parsed()) {
      if (so.name == "nostrong") return cmd_scenario_nostrong(so, g, rep);
      if (so.name == "ex48") return cmd_scenario_ex48(so, g, rep);
      throw error(errc::invalid_argument, "unknown scenario '" + so.name + "'");
    }
    if (regpath->parsed()) return cmd_regpath(ro, g, rep);
    if (lower->parsed()) return cmd_lower_solve(lo, g, rep);
    if (kktb->parsed()) return cmd_kkt_beta(ko, g, rep);
    if (synth->parsed()) return cmd_synthesize(yo, g, rep);
  } catch (const error &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return classify_exit(e.code());
  } catch (const std::exception &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 3;
}
