#pragma once

#include <stdexcept>
#include <string>

namespace hierdx {

enum class ErrorCode {
  SyntaxError,
  SchemaViolation,
  UnknownReference,
  UnknownElement,
  UnknownTestpoint,
  UnknownChipPair,
  InvalidDiagram,
  TooLarge,
  MissingInput,
  ConeTooWide,
  NoFaultObserved,
  AmbiguousRoot,
  EmptyAlternatives,
  NoChips,
  Exhausted,
  LengthMismatch,
  OracleUnavailable,
  AssumptionViolation,
  FileNotFound,
  InvalidArgument,
  WrongPhase,
  NotFound,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hierdx
