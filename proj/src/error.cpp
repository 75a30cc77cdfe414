#include "hierdx/error.hpp"

namespace hierdx {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::UnknownReference: return "UnknownReference";
    case ErrorCode::UnknownElement: return "UnknownElement";
    case ErrorCode::UnknownTestpoint: return "UnknownTestpoint";
    case ErrorCode::UnknownChipPair: return "UnknownChipPair";
    case ErrorCode::InvalidDiagram: return "InvalidDiagram";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::MissingInput: return "MissingInput";
    case ErrorCode::ConeTooWide: return "ConeTooWide";
    case ErrorCode::NoFaultObserved: return "NoFaultObserved";
    case ErrorCode::AmbiguousRoot: return "AmbiguousRoot";
    case ErrorCode::EmptyAlternatives: return "EmptyAlternatives";
    case ErrorCode::NoChips: return "NoChips";
    case ErrorCode::Exhausted: return "Exhausted";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::OracleUnavailable: return "OracleUnavailable";
    case ErrorCode::AssumptionViolation: return "AssumptionViolation";
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::WrongPhase: return "WrongPhase";
    case ErrorCode::NotFound: return "NotFound";
  }
  return "Error";
}

}  // namespace hierdx
