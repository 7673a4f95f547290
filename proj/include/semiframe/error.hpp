#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace semiframe {

using Complex = std::complex<double>;
using CVector = std::vector<Complex>;

enum class ErrorKind {
  NotHermitian,
  NotPSD,
  OutOfRange,
  DimensionMismatch,
  InvalidArgument,
  InconsistentGenerator,
  SingularFrameOperator,
  MajorizationViolated,
  UnsatisfiableBound,
  DualityViolated,
  ReconstructionFailed,
  NotCoercive,
  NotAFrame,
  ZeroWeight,
  NotMetric,
  PartitionMissing,
  NotPSDKernel,
  BoundViolated,
  ParseError,
  ValidationError,
  IoError,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::NotPSD: return "NotPSD";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::InconsistentGenerator: return "InconsistentGenerator";
    case ErrorKind::SingularFrameOperator: return "SingularFrameOperator";
    case ErrorKind::MajorizationViolated: return "MajorizationViolated";
    case ErrorKind::UnsatisfiableBound: return "UnsatisfiableBound";
    case ErrorKind::DualityViolated: return "DualityViolated";
    case ErrorKind::ReconstructionFailed: return "ReconstructionFailed";
    case ErrorKind::NotCoercive: return "NotCoercive";
    case ErrorKind::NotAFrame: return "NotAFrame";
    case ErrorKind::ZeroWeight: return "ZeroWeight";
    case ErrorKind::NotMetric: return "NotMetric";
    case ErrorKind::PartitionMissing: return "PartitionMissing";
    case ErrorKind::NotPSDKernel: return "NotPSDKernel";
    case ErrorKind::BoundViolated: return "BoundViolated";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the library. `witness` carries a vector that
/// demonstrates the failure when one exists (e.g. a kernel vector violating
/// a majorization), `index` the offending 1-based sequence index.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, CVector witness = {},
        std::optional<std::size_t> index = std::nullopt)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind),
        message_(message),
        witness_(std::move(witness)),
        index_(index) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// The message without the kind prefix.
  const std::string& message() const noexcept { return message_; }
  const CVector& witness() const noexcept { return witness_; }
  std::optional<std::size_t> index() const noexcept { return index_; }

 private:
  ErrorKind kind_;
  std::string message_;
  CVector witness_;
  std::optional<std::size_t> index_;
};

}  // namespace semiframe
