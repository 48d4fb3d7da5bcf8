#pragma once

#include <stdexcept>
#include <string>

namespace degenflow {

// Every typed failure the library raises. The CLI maps these to exit code 1
// (analysis) or 2 (I/O and configuration).
enum class ErrorKind {
  NotHermitian,
  AmbiguousClustering,
  SingularInput,
  SingularGram,
  StepTooLarge,
  ZeroVector,
  DimensionOverflow,
  DegenerateSpan,
  NonConvergent,
  TooShort,
  SpectrumAmbiguity,
  NotStabilized,
  IntersectionDefect,
  RankBorderline,
  DegreeOverflow,
  ZeroSection,
  IrrationalFiltration,
  TieDetected,
  NotFullDimensional,
  UnstableExtrapolation,
  NoConvergence,
  NonConvexHessian,
  ConfigInvalid,
  StepUnstable,
  DegenerateMetric,
  QuadratureNotConverged,
  InputParseError,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string module, const std::string& what)
      : std::runtime_error(what), kind_(kind), module_(std::move(module)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& module() const noexcept { return module_; }
  const char* name() const noexcept { return to_string(kind_); }

  // I/O and configuration errors exit with 2, everything else with 1.
  bool is_io_error() const noexcept {
    return kind_ == ErrorKind::InputParseError || kind_ == ErrorKind::ConfigInvalid;
  }

 private:
  ErrorKind kind_;
  std::string module_;
};

}  // namespace degenflow
