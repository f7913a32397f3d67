#pragma once

#include <stdexcept>
#include <string>

namespace mmot {

enum class ErrorCode {
  MismatchedCounts,
  MismatchedDims,
  DimensionMismatch,
  NonFinite,
  IndexOutOfRange,
  SamePosition,
  TooFewPoints,
  TooLarge,
  ParseError,
  RaggedRows,
  EmptyFile,
  UnknownFamily,
  ZeroMassImage,
  BadMagic,
  TruncatedData,
  NumericalUnderflow,
  DegenerateTrace,
  IoError,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace mmot
