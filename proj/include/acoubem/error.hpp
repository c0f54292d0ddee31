#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace acoubem {

enum class ErrorCode {
  MalformedHeader,
  DanglingNodeReference,
  EmptyMesh,
  ResolutionOverflow,
  InvalidMesh,
  InvalidScene,
  NonpositiveKr,
  InvalidArgument,
  InvalidTheta,
  DimensionMismatch,
  CoincidentSurfaces,
  SingularFactorisation,
  FormulationMismatch,
  Breakdown,
  ModeSystemSingular,
  PointOnSurface,
  PoleAtZero,
  MaskMismatch,
  ConfigError,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-readable error kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace acoubem
