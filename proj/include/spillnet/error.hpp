#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spillnet {

enum class ErrorCode {
  InvalidGeometry,
  ZeroVarianceShape,
  EmptyInput,
  BadMagic,
  UnsupportedShape,
  TruncatedFile,
  CorruptRecord,
  SchemaError,
  GeometryError,
  ParseError,
  InsufficientData,
  UnknownScenario,
  ShapeMismatch,
  NotScalarLoss,
  NumericalError,
  EmptyDataset,
  ZeroMean,
  LengthMismatch,
  ZeroVariance,
  TooFewNonzero,
  AlignmentError,
  UnknownAgent,
  EmptyFleet,
  MalformedMessage,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the typed codes above so
/// callers (and the CLI's exit-code mapping) can branch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace spillnet
