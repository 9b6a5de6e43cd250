#include "rsmlqr/error.hpp"

namespace rsmlqr {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonSquare: return "NonSquare";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NotPSD: return "NotPSD";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::NotStabilizable: return "NotStabilizable";
    case ErrorCode::NotHurwitz: return "NotHurwitz";
    case ErrorCode::RNotPD: return "RNotPD";
    case ErrorCode::RSingular: return "RSingular";
    case ErrorCode::WeightNotPSD: return "WeightNotPSD";
    case ErrorCode::WeightNotPD: return "WeightNotPD";
    case ErrorCode::DuplicateSharedIndex: return "DuplicateSharedIndex";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::DimensionError: return "DimensionError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace rsmlqr
