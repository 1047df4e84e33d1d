#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace safe_el {

enum class ErrorKind {
  NonFiniteDerivative,
  SingularJacobian,
  Infeasible,
  DegenerateConstraint,
  BoundViolated,
  TrackingErrorEscaped,
  GainConditionViolated,
  InitialConditionFailed,
  SafetyFilterInfeasible,
  SafetyViolated,
  UnknownPreset,
  InvalidConfig,
};

std::string_view to_string(ErrorKind kind);

// All library failures are reported through this type; `kind()` drives the
// CLI exit-code mapping.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace safe_el
