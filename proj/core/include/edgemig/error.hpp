#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace edgemig {

enum class Errc {
  OutOfBounds,
  UnknownServer,
  NegativeHops,
  ZeroCapacity,
  ZeroRate,
  ZeroBandwidth,
  TraceTooShort,
  EpisodeFinished,
  MalformedLine,
  IoError,
  ShapeMismatch,
  IndexOutOfRange,
  NonFiniteLogits,
  NotInitialized,
  UnknownArm,
  EmptyBatch,
  LengthMismatch,
  MissingBehaviorLogProb,
  EmptyTestSet,
  ConfigInvalid,
  TraceSourceMissing,
  MissingMetrics,
  BadCheckpoint,
  FairnessViolation,
};

std::string_view to_string(Errc code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit-code mapping) can branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace edgemig
