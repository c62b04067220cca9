#pragma once

#include <stdexcept>
#include <string>

namespace vidprobe {

enum class ErrorCode {
  NoFrames,
  InvalidFeature,
  DimensionMismatch,
  UnsupportedFormat,
  CorruptStore,
  DuplicateRecord,
  InvariantViolation,
  InvalidArgument,
  UnknownSource,
  MissingSource,
  MissingEmbeddings,
  DegenerateLabels,
  Io,
  Config,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NoFrames: return "no frames";
    case ErrorCode::InvalidFeature: return "invalid feature";
    case ErrorCode::DimensionMismatch: return "dimension mismatch";
    case ErrorCode::UnsupportedFormat: return "unsupported format";
    case ErrorCode::CorruptStore: return "corrupt store";
    case ErrorCode::DuplicateRecord: return "duplicate record";
    case ErrorCode::InvariantViolation: return "invariant violation";
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::UnknownSource: return "unknown source";
    case ErrorCode::MissingSource: return "missing source";
    case ErrorCode::MissingEmbeddings: return "missing embeddings";
    case ErrorCode::DegenerateLabels: return "degenerate labels";
    case ErrorCode::Io: return "i/o error";
    case ErrorCode::Config: return "config error";
  }
  return "error";
}

/// Every failure raised by the library. The message always starts with the
/// error class name so that callers and logs can match on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(detail.empty() ? std::string(to_string(code))
                                          : std::string(to_string(code)) + ": " + detail),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace vidprobe
