#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lirlab {

enum class ErrorCode {
  InvalidArgument,
  ZeroNormToken,
  FormatError,
  IoError,
  InvalidSpec,
  DimensionMismatch,
  WindowOutOfRange,
  WindowExhausted,
  AgentUnavailable,
  EmptyResponse,
  TemplateError,
  TieDetected,
  NonBijectiveSigma,
  InvalidConfig,
  MissingSubset,
  MissingQuery,
  ChecksumMismatch,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exception carrying a stable error code. Every failure surfaced by the
/// library is an Error; the CLI maps codes onto process exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void raise(ErrorCode code, const std::string& message);

}  // namespace lirlab
