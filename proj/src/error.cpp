#include "pocp/error.hpp"

namespace pocp {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonPositive: return "NonPositive";
    case ErrorKind::NegativeAlpha: return "NegativeAlpha";
    case ErrorKind::MissingTarget: return "MissingTarget";
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::ZeroElements: return "ZeroElements";
    case ErrorKind::InvalidMesh: return "InvalidMesh";
    case ErrorKind::BadStepSum: return "BadStepSum";
    case ErrorKind::NonPositiveStep: return "NonPositiveStep";
    case ErrorKind::SizeMismatch: return "SizeMismatch";
    case ErrorKind::FactorizationFailed: return "FactorizationFailed";
    case ErrorKind::StepTooLarge: return "StepTooLarge";
    case ErrorKind::SingularW: return "SingularW";
    case ErrorKind::TooLargeForDense: return "TooLargeForDense";
    case ErrorKind::NotExactW: return "NotExactW";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::UnknownKey: return "UnknownKey";
    case ErrorKind::InvalidValue: return "InvalidValue";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message, std::string field)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message),
      kind_(kind),
      field_(std::move(field)) {}

}  // namespace pocp
