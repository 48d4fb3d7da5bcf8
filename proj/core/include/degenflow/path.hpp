#pragma once

#include <vector>

#include "degenflow/linalg.hpp"

namespace degenflow::path {

/// Sampled path A(t_0)=I, A(t_1), ... of invertible operators.
///
/// Stored as step operators B_i = A_i A_{i-1}^{-1} (B_0 = I). Long
/// self-similar paths grow like e^{i|Lambda|}, so the cumulative products are
/// not representable in double precision; every consumer works with steps.
class OperatorPath {
 public:
  OperatorPath() = default;

  static OperatorPath from_cumulative(std::vector<double> times, const std::vector<Mat>& operators,
                                      linalg::HermitianForm reference);
  static OperatorPath from_steps(std::vector<double> times, std::vector<Mat> steps,
                                 linalg::HermitianForm reference);

  std::size_t size() const { return times_.size(); }
  Eigen::Index dim() const { return reference_.dim(); }
  const std::vector<double>& times() const { return times_; }
  const std::vector<Mat>& steps() const { return steps_; }
  const Mat& step(std::size_t i) const { return steps_[i]; }
  const linalg::HermitianForm& reference() const { return reference_; }

  /// A_i as a product of steps. May overflow for long paths.
  Mat cumulative(std::size_t i) const;
  /// A_j A_i^{-1} for i <= j.
  Mat transfer(std::size_t i, std::size_t j) const;
  /// True when every cumulative operator is finite with condition < 1e12.
  bool cumulative_representable() const;

  bool unit_spaced(double tol = 1e-9) const;

 private:
  void validate() const;

  std::vector<double> times_;
  std::vector<Mat> steps_;
  linalg::HermitianForm reference_;
};

/// Resamples to times t_0, t_0+1, ... <= t_last. Integer-offset samples are
/// taken as they are; a missing one is interpolated linearly between its two
/// neighbours.
OperatorPath resample_unit(const OperatorPath& path);

/// The same path in coordinates orthonormal for the reference form:
/// steps L^* B L^{-*} where H_0 = L L^*. Vectors map by v -> L^* v.
struct OrthonormalPath {
  OperatorPath path;
  Mat to_orthonormal;    // L^*
  Mat from_orthonormal;  // L^{-*}
};
OrthonormalPath to_orthonormal(const OperatorPath& path);

struct LiftOptions {
  double lift_tol = 1e-8;
  int max_halvings = 16;
  int initial_substeps = 4;
};

struct LiftResult {
  OperatorPath path;
  /// Max over sample times and probe vectors of
  /// | |A s|_{H_0} - |s|_{H_t} | / |s|_{H_0}.
  double max_residual = 0.0;
  int substeps_used = 0;
};

/// Solves A' A^{-1} Hermitian, A^* H_0 A = H_t with A(t_0) = I, taking the Gram
/// path piecewise linear between samples. RK4 with substep halving until the
/// isometry residual meets lift_tol.
LiftResult parallel_lift(const std::vector<double>& times, const std::vector<linalg::HermitianForm>& grams,
                         const LiftOptions& opts = {});

/// Isometry residual of a single operator against H_0 and H_t.
double isometry_residual(const Mat& a, const linalg::HermitianForm& h0, const linalg::HermitianForm& ht);

}  // namespace degenflow::path
