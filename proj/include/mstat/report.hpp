#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ioc.hpp"
#include "regularization.hpp"
#include "synthesis.hpp"

namespace mstat {

using Json = nlohmann::ordered_json;

inline Json values_json(const GridFunction &u) {
  Json a = Json::array();
  for (double v : u.values) a.push_back(v);
  return a;
}

inline Json multipliers_json(const KktMultipliers &m) {
  Json j = Json::object();
  j["p"] = values_json(m.p);
  j["mu"] = values_json(m.mu);
  j["nu"] = values_json(m.nu);
  j["lambda"] = values_json(m.lam);
  return j;
}

inline Json residuals_json(const KktSystemResiduals &r) {
  Json j = Json::object();
  j["stat_u"] = r.stat_u;
  j["stat_w"] = r.stat_w;
  j["stat_xi"] = r.stat_xi;
  j["mu_zero"] = r.mu_zero;
  j["mu_sign"] = r.mu_sign;
  j["nu_zero"] = r.nu_zero;
  j["nu_sign"] = r.nu_sign;
  j["lambda_zero"] = r.lambda_zero;
  j["lambda_sign"] = r.lambda_sign;
  return j;
}

inline Json certificate_json(const StationarityCertificate &c) {
  Json j = Json::object();
  j["kind"] = cert_kind_name(c.kind);
  j["verdict"] = c.verdict;
  j["tol"] = c.tol;
  Json res = residuals_json(c.residuals);
  if (c.kind == CertKind::M) res["m_condition"] = c.m_condition;
  j["residuals"] = std::move(res);
  j["multipliers"] = multipliers_json(c.m);
  if (c.kind == CertKind::Branch) j["beta"] = c.beta;
  return j;
}

inline Json ioc_certificate_json(const IocCertificate &c) {
  Json j = Json::object();
  j["kind"] = "ioc-m";
  j["verdict"] = c.lin.verdict;
  j["tol"] = c.lin.tol;
  Json res = Json::object();
  res["linearized_worst"] = c.lin.worst();
  res["reformulation"] = c.kktr_residual;
  j["residuals"] = std::move(res);
  j["multipliers"] = multipliers_json(c.kktr);
  j["route"] = existence_route_name(c.route);
  j["assumptions_unverified"] = c.assumptions_unverified;
  j["linearized"] = certificate_json(c.lin);
  return j;
}

inline Json pattern_reports_json(const std::vector<PatternReport> &reports) {
  Json out = Json::array();
  for (const PatternReport &r : reports) {
    Json j = Json::object();
    Json pat = Json::array();
    for (PatternCode c : r.pattern) pat.push_back(pattern_code_name(c));
    j["pattern"] = std::move(pat);
    j["feasible"] = r.feasible;
    if (r.feasible) {
      Json w = Json::array();
      for (double v : r.weights) w.push_back(v);
      j["weights"] = std::move(w);
    }
    out.push_back(std::move(j));
  }
  return out;
}

inline std::string regpath_csv(const RegPathReport &r) {
  std::ostringstream os;
  os << "gamma,error,newton_iters\n";
  for (std::size_t i = 0; i < r.gammas.size(); ++i)
    os << format_double(r.gammas[i]) << ',' << format_double(r.errors_to_vi[i]) << ','
       << r.newton_iters[i] << '\n';
  return os.str();
}

inline Json regpath_json(const RegPathReport &r) {
  Json j = Json::object();
  j["gamma"] = r.gammas;
  j["error"] = r.errors_to_vi;
  j["newton_iters"] = r.newton_iters;
  j["adjoint_norm"] = r.adjoint_norms;
  j["final_w"] = values_json(r.final_w);
  return j;
}

inline std::string gridfunction_csv(const GridFunction &u) {
  std::ostringstream os;
  write_csv(os, u);
  return os.str();
}

// 64-bit FNV-1a over raw bytes, used to fingerprint command inputs.
inline std::uint64_t fnv1a(const std::string &bytes, std::uint64_t seed = 14695981039346656037ull) {
  std::uint64_t h = seed;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hash_hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string now_iso8601() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Top-level run report.  With timestamps disabled the rendered bytes depend
// only on the inputs and flags, which is what the determinism tests pin down.
struct RunReport {
  std::string command;
  std::string tool_version = "0.1.0";
  std::uint64_t input_hash = fnv1a("");
  bool with_timestamp = true;
  std::vector<std::pair<std::string, double>> timings;
  Json results = Json::object();

  void absorb_input(const std::string &bytes) { input_hash = fnv1a(bytes, input_hash); }

  Json to_json() const {
    Json j = Json::object();
    j["tool"] = "mstat";
    j["version"] = tool_version;
    j["command"] = command;
    j["input_hash"] = hash_hex(input_hash);
    if (with_timestamp) {
      j["timestamp"] = now_iso8601();
      Json t = Json::object();
      for (const auto &[name, seconds] : timings) t[name] = seconds;
      j["timings"] = std::move(t);
    }
    j["results"] = results;
    return j;
  }

  std::string render() const { return to_json().dump(2) + "\n"; }
};

}  // namespace mstat
