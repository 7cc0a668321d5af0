#include "netprobe/error.hpp"

namespace netprobe {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::Schema: return "schema_error";
    case ErrorCode::Io: return "io_error";
    case ErrorCode::Disconnected: return "disconnected";
    case ErrorCode::NotPositiveDefinite: return "not_positive_definite";
    case ErrorCode::RankDeficient: return "rank_deficient";
    case ErrorCode::DegenerateSpacing: return "degenerate_spacing";
    case ErrorCode::DegenerateContrast: return "degenerate_contrast";
    case ErrorCode::SignFlip: return "sign_flip";
    case ErrorCode::GridTooCoarse: return "grid_too_coarse";
    case ErrorCode::InsufficientEigenfrequencies: return "insufficient_eigenfrequencies";
  }
  return "unknown";
}

bool is_numerical(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::Schema:
    case ErrorCode::Io:
      return false;
    default:
      return true;
  }
}

}  // namespace netprobe
