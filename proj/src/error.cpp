#include "spillnet/error.hpp"

namespace spillnet {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidGeometry: return "InvalidGeometry";
    case ErrorCode::ZeroVarianceShape: return "ZeroVarianceShape";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::UnsupportedShape: return "UnsupportedShape";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::CorruptRecord: return "CorruptRecord";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::GeometryError: return "GeometryError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::UnknownScenario: return "UnknownScenario";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NotScalarLoss: return "NotScalarLoss";
    case ErrorCode::NumericalError: return "NumericalError";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::ZeroMean: return "ZeroMean";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::TooFewNonzero: return "TooFewNonzero";
    case ErrorCode::AlignmentError: return "AlignmentError";
    case ErrorCode::UnknownAgent: return "UnknownAgent";
    case ErrorCode::EmptyFleet: return "EmptyFleet";
    case ErrorCode::MalformedMessage: return "MalformedMessage";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace spillnet
