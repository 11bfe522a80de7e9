#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mstat {

enum class errc {
  invalid_argument,
  invalid_point,
  solver_failure,
  convergence_failure,
  problem_too_large,
  not_a_forall_stationary,
  synthesis_failed,
  no_member_in_a_alpha,
  unsupported_operator,
  internal_error,
};

inline const char *errc_name(errc c) {
  switch (c) {
    case errc::invalid_argument: return "invalid-argument";
    case errc::invalid_point: return "invalid-point";
    case errc::solver_failure: return "solver-failure";
    case errc::convergence_failure: return "convergence-failure";
    case errc::problem_too_large: return "problem-too-large";
    case errc::not_a_forall_stationary: return "not-a-forall-stationary";
    case errc::synthesis_failed: return "synthesis-failed";
    case errc::no_member_in_a_alpha: return "no-member-in-Aalpha";
    case errc::unsupported_operator: return "unsupported-operator";
    case errc::internal_error: return "internal-error";
  }
  return "unknown";
}

class error : public std::runtime_error {
 public:
  error(errc code, const std::string &msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}
  errc code() const { return code_; }

 private:
  errc code_;
};

// Raised by enumerate_family when some KKT(beta) system is infeasible; carries
// the offending beta as a cell index list so callers can report the witness.
class not_a_forall_error : public error {
 public:
  not_a_forall_error(std::vector<int> beta, const std::string &msg)
      : error(errc::not_a_forall_stationary, msg), witness_beta(std::move(beta)) {}
  std::vector<int> witness_beta;
};

}  // namespace mstat
