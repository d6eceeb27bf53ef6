#pragma once

#include <stdexcept>
#include <string>

namespace modnls {

/// Failure categories shared by the C++ core and the C API (see modnls.h).
enum class ErrorCode : int {
  invalid_argument = 1,
  dimension_mismatch = 2,
  zero_norm = 3,
  hypothesis_violation = 4,
  support_violation = 5,
  unresolved_cell = 6,
  cutoff_exceeded = 7,
  spectral_overflow = 8,
  spec_mismatch = 9,
  undersampled_stft = 10,
  domain_too_small = 11,
  not_converged = 12,
  schema = 13,
  io = 14,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace modnls
