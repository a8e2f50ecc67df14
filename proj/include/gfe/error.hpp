#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gfe {

/// Failure categories raised by the library. Every throw site uses one of
/// these so callers (and the CLI exit-code mapping) can branch on the kind
/// instead of parsing messages.
enum class Errc {
  DimensionMismatch,
  InvalidPoint,
  CutLocus,
  ProjectionUndefined,
  SingularMatrix,
  NonConvergence,
  IndefiniteHessian,
  SingularSystem,
  Admissibility,
  OutsideElement,
  StencilOutsideElement,
  PointOutsideDomain,
  LineSearchFailure,
  InvalidArgument,
  Parse,
};

inline std::string_view errc_name(Errc e) {
  switch (e) {
    case Errc::DimensionMismatch: return "dimension mismatch";
    case Errc::InvalidPoint: return "invalid point";
    case Errc::CutLocus: return "cut locus";
    case Errc::ProjectionUndefined: return "projection undefined";
    case Errc::SingularMatrix: return "singular matrix";
    case Errc::NonConvergence: return "non-convergence";
    case Errc::IndefiniteHessian: return "indefinite hessian";
    case Errc::SingularSystem: return "singular system";
    case Errc::Admissibility: return "admissibility violation";
    case Errc::OutsideElement: return "outside element";
    case Errc::StencilOutsideElement: return "stencil outside element";
    case Errc::PointOutsideDomain: return "point outside domain";
    case Errc::LineSearchFailure: return "line search failure";
    case Errc::InvalidArgument: return "invalid argument";
    case Errc::Parse: return "parse error";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail)
      : std::runtime_error(std::string(errc_name(code)) + ": " + detail), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& detail) { throw Error(code, detail); }

}  // namespace gfe
