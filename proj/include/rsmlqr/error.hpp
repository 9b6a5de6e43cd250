#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rsmlqr {

enum class ErrorCode {
  NonSquare,
  NotSymmetric,
  NotPSD,
  ShapeMismatch,
  DimensionMismatch,
  NumericalFailure,
  NotStabilizable,
  NotHurwitz,
  RNotPD,
  RSingular,
  WeightNotPSD,
  WeightNotPD,
  DuplicateSharedIndex,
  IndexOutOfRange,
  FileNotFound,
  ParseError,
  SchemaError,
  DimensionError,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so the
/// C API can map it onto a status value without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rsmlqr
