#include "acoubem/error.hpp"

namespace acoubem {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedHeader: return "malformed-header";
    case ErrorCode::DanglingNodeReference: return "dangling-node-reference";
    case ErrorCode::EmptyMesh: return "empty-mesh";
    case ErrorCode::ResolutionOverflow: return "resolution-overflow";
    case ErrorCode::InvalidMesh: return "invalid-mesh";
    case ErrorCode::InvalidScene: return "invalid-scene";
    case ErrorCode::NonpositiveKr: return "nonpositive-kr";
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::InvalidTheta: return "invalid-theta";
    case ErrorCode::DimensionMismatch: return "dimension-mismatch";
    case ErrorCode::CoincidentSurfaces: return "coincident-surfaces";
    case ErrorCode::SingularFactorisation: return "singular-factorisation";
    case ErrorCode::FormulationMismatch: return "formulation-mismatch";
    case ErrorCode::Breakdown: return "breakdown";
    case ErrorCode::ModeSystemSingular: return "mode-system-singular";
    case ErrorCode::PointOnSurface: return "point-on-surface";
    case ErrorCode::PoleAtZero: return "pole-at-zero";
    case ErrorCode::MaskMismatch: return "mask-mismatch";
    case ErrorCode::ConfigError: return "config-error";
  }
  return "unknown";
}

}  // namespace acoubem
