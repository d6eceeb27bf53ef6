#include "modnls/error.hpp"

namespace modnls {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid argument";
    case ErrorCode::dimension_mismatch: return "dimension mismatch";
    case ErrorCode::zero_norm: return "zero-norm input";
    case ErrorCode::hypothesis_violation: return "hypothesis violation";
    case ErrorCode::support_violation: return "support violation";
    case ErrorCode::unresolved_cell: return "unresolved cell";
    case ErrorCode::cutoff_exceeded: return "cutoff exceeded";
    case ErrorCode::spectral_overflow: return "spectral overflow";
    case ErrorCode::spec_mismatch: return "spec mismatch";
    case ErrorCode::undersampled_stft: return "undersampled STFT";
    case ErrorCode::domain_too_small: return "domain too small";
    case ErrorCode::not_converged: return "not converged";
    case ErrorCode::schema: return "config schema violation";
    case ErrorCode::io: return "I/O error";
  }
  return "unknown error";
}

}  // namespace modnls
