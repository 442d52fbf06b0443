#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pocp {

enum class ErrorKind {
  NonPositive,
  NegativeAlpha,
  MissingTarget,
  OutOfDomain,
  ZeroElements,
  InvalidMesh,
  BadStepSum,
  NonPositiveStep,
  SizeMismatch,
  FactorizationFailed,
  StepTooLarge,
  SingularW,
  TooLargeForDense,
  NotExactW,
  NoConvergence,
  ParseError,
  UnknownKey,
  InvalidValue,
  IoError,
};

std::string_view to_string(ErrorKind kind);

/// Library exception. `field()` names the offending input when one applies
/// (a problem parameter, a config key).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::string field = {});

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& field() const noexcept { return field_; }

 private:
  ErrorKind kind_;
  std::string field_;
};

}  // namespace pocp
