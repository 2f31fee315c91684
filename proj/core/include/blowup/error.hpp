#pragma once

#include <stdexcept>
#include <string>

namespace blowup {

// Library-level failure codes. Severity picks the process exit code in the
// CLI: config -> 1, domain -> 2, numerical -> 3.
enum class ErrorCode {
  config_invalid,
  bracket_invalid,
  unclassified,
  target_count_unreachable,
  missing_C0,
  post_T,
  insufficient_data,
  empty_level_set,
  p_equals_3,
  no_transition_found,
  no_convergence,
  no_cycle,
  escaped,
  singular_locus,
  monotonicity_breach,
  degenerate_gradient,
  step_underflow,
};

enum class ErrorSeverity { config, domain, numerical };

constexpr ErrorSeverity severity_of(ErrorCode c) {
  switch (c) {
    case ErrorCode::config_invalid:
      return ErrorSeverity::config;
    case ErrorCode::bracket_invalid:
    case ErrorCode::unclassified:
    case ErrorCode::target_count_unreachable:
    case ErrorCode::missing_C0:
    case ErrorCode::post_T:
    case ErrorCode::insufficient_data:
    case ErrorCode::empty_level_set:
    case ErrorCode::p_equals_3:
    case ErrorCode::no_transition_found:
      return ErrorSeverity::domain;
    default:
      return ErrorSeverity::numerical;
  }
}

const char* error_code_name(ErrorCode c);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const { return code_; }
  ErrorSeverity severity() const { return severity_of(code_); }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace blowup
