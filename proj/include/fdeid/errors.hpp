#pragma once

#include <stdexcept>
#include <string>

namespace fdeid {

enum class ErrorCode {
  Io,
  Format,
  OutOfBounds,
  InvalidSize,
  DegenerateLandmarks,
  SingularTransform,
  InvalidKernel,
  DimensionMismatch,
  KTooLarge,
  OracleFailure,
  ShapeMismatch,
  TooSmall,
  NumericalError,
  EmptyPairs,
  MissingColumn,
  ZeroInterOcular,
  WeightError,
  NoViableMethod,
  UnknownAttribute,
  ParseError,
  UnknownKey,
  MissingFile,
  MissingDetection,
  InvalidArgument,
};

const char* error_code_name(ErrorCode code);

/// Library-wide exception; `code()` identifies the contract that was violated.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace fdeid
