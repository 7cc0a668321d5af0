#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace netprobe {

enum class ErrorCode {
  InvalidArgument,
  Schema,
  Io,
  Disconnected,
  NotPositiveDefinite,
  RankDeficient,
  DegenerateSpacing,
  DegenerateContrast,
  SignFlip,
  GridTooCoarse,
  InsufficientEigenfrequencies,
};

std::string_view to_string(ErrorCode code) noexcept;

// Numerical failures (as opposed to bad input) map to a distinct CLI exit code.
bool is_numerical(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace netprobe
