#include "safe_el/errors.hpp"

namespace safe_el {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonFiniteDerivative: return "NonFiniteDerivative";
    case ErrorKind::SingularJacobian: return "SingularJacobian";
    case ErrorKind::Infeasible: return "Infeasible";
    case ErrorKind::DegenerateConstraint: return "DegenerateConstraint";
    case ErrorKind::BoundViolated: return "BoundViolated";
    case ErrorKind::TrackingErrorEscaped: return "TrackingErrorEscaped";
    case ErrorKind::GainConditionViolated: return "GainConditionViolated";
    case ErrorKind::InitialConditionFailed: return "InitialConditionFailed";
    case ErrorKind::SafetyFilterInfeasible: return "SafetyFilterInfeasible";
    case ErrorKind::SafetyViolated: return "SafetyViolated";
    case ErrorKind::UnknownPreset: return "UnknownPreset";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

}  // namespace safe_el
