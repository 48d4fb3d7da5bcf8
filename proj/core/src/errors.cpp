#include "degenflow/errors.hpp"

namespace degenflow {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::AmbiguousClustering: return "AmbiguousClustering";
    case ErrorKind::SingularInput: return "SingularInput";
    case ErrorKind::SingularGram: return "SingularGram";
    case ErrorKind::StepTooLarge: return "StepTooLarge";
    case ErrorKind::ZeroVector: return "ZeroVector";
    case ErrorKind::DimensionOverflow: return "DimensionOverflow";
    case ErrorKind::DegenerateSpan: return "DegenerateSpan";
    case ErrorKind::NonConvergent: return "NonConvergent";
    case ErrorKind::TooShort: return "TooShort";
    case ErrorKind::SpectrumAmbiguity: return "SpectrumAmbiguity";
    case ErrorKind::NotStabilized: return "NotStabilized";
    case ErrorKind::IntersectionDefect: return "IntersectionDefect";
    case ErrorKind::RankBorderline: return "RankBorderline";
    case ErrorKind::DegreeOverflow: return "DegreeOverflow";
    case ErrorKind::ZeroSection: return "ZeroSection";
    case ErrorKind::IrrationalFiltration: return "IrrationalFiltration";
    case ErrorKind::TieDetected: return "TieDetected";
    case ErrorKind::NotFullDimensional: return "NotFullDimensional";
    case ErrorKind::UnstableExtrapolation: return "UnstableExtrapolation";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::NonConvexHessian: return "NonConvexHessian";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::StepUnstable: return "StepUnstable";
    case ErrorKind::DegenerateMetric: return "DegenerateMetric";
    case ErrorKind::QuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorKind::InputParseError: return "InputParseError";
  }
  return "Unknown";
}

}  // namespace degenflow
