#include "lirlab/error.hpp"

namespace lirlab {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ZeroNormToken: return "ZeroNormToken";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::WindowOutOfRange: return "WindowOutOfRange";
    case ErrorCode::WindowExhausted: return "WindowExhausted";
    case ErrorCode::AgentUnavailable: return "AgentUnavailable";
    case ErrorCode::EmptyResponse: return "EmptyResponse";
    case ErrorCode::TemplateError: return "TemplateError";
    case ErrorCode::TieDetected: return "TieDetected";
    case ErrorCode::NonBijectiveSigma: return "NonBijectiveSigma";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::MissingSubset: return "MissingSubset";
    case ErrorCode::MissingQuery: return "MissingQuery";
    case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
  }
  return "Unknown";
}

void raise(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace lirlab
