#include "edgemig/error.hpp"

namespace edgemig {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::OutOfBounds: return "OutOfBounds";
    case Errc::UnknownServer: return "UnknownServer";
    case Errc::NegativeHops: return "NegativeHops";
    case Errc::ZeroCapacity: return "ZeroCapacity";
    case Errc::ZeroRate: return "ZeroRate";
    case Errc::ZeroBandwidth: return "ZeroBandwidth";
    case Errc::TraceTooShort: return "TraceTooShort";
    case Errc::EpisodeFinished: return "EpisodeFinished";
    case Errc::MalformedLine: return "MalformedLine";
    case Errc::IoError: return "IoError";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::NonFiniteLogits: return "NonFiniteLogits";
    case Errc::NotInitialized: return "NotInitialized";
    case Errc::UnknownArm: return "UnknownArm";
    case Errc::EmptyBatch: return "EmptyBatch";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::MissingBehaviorLogProb: return "MissingBehaviorLogProb";
    case Errc::EmptyTestSet: return "EmptyTestSet";
    case Errc::ConfigInvalid: return "ConfigInvalid";
    case Errc::TraceSourceMissing: return "TraceSourceMissing";
    case Errc::MissingMetrics: return "MissingMetrics";
    case Errc::BadCheckpoint: return "BadCheckpoint";
    case Errc::FairnessViolation: return "FairnessViolation";
  }
  return "Unknown";
}

}  // namespace edgemig
