#include "degenflow/path.hpp"

#include <cmath>

#include "degenflow/errors.hpp"

namespace degenflow::path {
namespace {

constexpr const char* kModule = "linalg";

[[noreturn]] void fail(ErrorKind kind, const std::string& msg) { throw Error(kind, kModule, msg); }

double condition_number(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  return smin > 0.0 ? s(0) / smin : std::numeric_limits<double>::infinity();
}

}  // namespace

void OperatorPath::validate() const {
  if (times_.empty()) fail(ErrorKind::ConfigInvalid, "path has no samples");
  if (times_.size() != steps_.size()) fail(ErrorKind::ConfigInvalid, "times and operators differ in length");
  for (std::size_t i = 1; i < times_.size(); ++i)
    if (!(times_[i] > times_[i - 1])) fail(ErrorKind::ConfigInvalid, "times must be strictly increasing");
  reference_.validate();
  for (const Mat& b : steps_) {
    if (b.rows() != dim() || b.cols() != dim()) fail(ErrorKind::ConfigInvalid, "operator dimension mismatch");
    if (!b.allFinite()) fail(ErrorKind::SingularInput, "operator has non-finite entries");
    if (!(condition_number(b) < 1e12)) fail(ErrorKind::SingularInput, "step operator is singular");
  }
}

OperatorPath OperatorPath::from_steps(std::vector<double> times, std::vector<Mat> steps,
                                      linalg::HermitianForm reference) {
  OperatorPath p;
  p.times_ = std::move(times);
  p.steps_ = std::move(steps);
  p.reference_ = std::move(reference);
  if (!p.steps_.empty()) p.steps_[0] = Mat::Identity(p.reference_.dim(), p.reference_.dim());
  p.validate();
  return p;
}

OperatorPath OperatorPath::from_cumulative(std::vector<double> times, const std::vector<Mat>& operators,
                                           linalg::HermitianForm reference) {
  if (operators.empty()) fail(ErrorKind::ConfigInvalid, "path has no operators");
  const Eigen::Index n = reference.dim();
  for (const Mat& a : operators)
    if (a.rows() != n || a.cols() != n) fail(ErrorKind::ConfigInvalid, "operator dimension mismatch");
  if ((operators[0] - Mat::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-12)
    fail(ErrorKind::ConfigInvalid, "first operator must be the identity");
  std::vector<Mat> steps(operators.size());
  steps[0] = Mat::Identity(n, n);
  for (std::size_t i = 1; i < operators.size(); ++i) {
    if (!(condition_number(operators[i - 1]) < std::numeric_limits<double>::infinity()))
      fail(ErrorKind::SingularInput, "operator is singular");
    // B_i = A_i A_{i-1}^{-1}, i.e. B_i^* solves A_{i-1}^* X = A_i^*.
    steps[i] = operators[i - 1].adjoint().partialPivLu().solve(operators[i].adjoint()).adjoint();
  }
  return from_steps(std::move(times), std::move(steps), std::move(reference));
}

Mat OperatorPath::cumulative(std::size_t i) const { return transfer(0, i); }

Mat OperatorPath::transfer(std::size_t i, std::size_t j) const {
  Mat out = Mat::Identity(dim(), dim());
  for (std::size_t k = i + 1; k <= j; ++k) out = steps_[k] * out;
  return out;
}

bool OperatorPath::cumulative_representable() const {
  Mat a = Mat::Identity(dim(), dim());
  for (std::size_t k = 1; k < steps_.size(); ++k) {
    a = steps_[k] * a;
    if (!a.allFinite() || !(condition_number(a) < 1e12)) return false;
  }
  return true;
}

bool OperatorPath::unit_spaced(double tol) const {
  for (std::size_t i = 1; i < times_.size(); ++i)
    if (std::abs(times_[i] - times_[i - 1] - 1.0) > tol) return false;
  return true;
}

OperatorPath resample_unit(const OperatorPath& path) {
  if (path.unit_spaced()) return path;
  const auto& t = path.times();
  const Eigen::Index n = path.dim();
  const Mat id = Mat::Identity(n, n);
  const double t0 = t.front();
  const auto count = static_cast<std::size_t>(std::floor(t.back() - t0 + 1e-9)) + 1;

  // A(m) = F_m A_{j(m)} with j(m) the last sample at or before m.
  std::vector<double> times;
  std::vector<Mat> steps;
  std::size_t prev_j = 0;
  Mat prev_f = id;
  std::size_t j = 0;
  for (std::size_t m = 0; m < count; ++m) {
    const double tm = t0 + static_cast<double>(m);
    while (j + 1 < t.size() && t[j + 1] <= tm + 1e-9) ++j;
    Mat f = id;
    if (std::abs(t[j] - tm) > 1e-9 && j + 1 < t.size()) {
      const double theta = (tm - t[j]) / (t[j + 1] - t[j]);
      f = id + theta * (path.step(j + 1) - id);
    }
    times.push_back(tm);
    if (m == 0) {
      steps.push_back(id);
    } else {
      const Mat mid = path.transfer(prev_j, j);
      steps.push_back(f * mid * prev_f.partialPivLu().inverse());
    }
    prev_j = j;
    prev_f = f;
  }
  return OperatorPath::from_steps(std::move(times), std::move(steps), path.reference());
}

OrthonormalPath to_orthonormal(const OperatorPath& path) {
  const Eigen::Index n = path.dim();
  const Mat lstar = path.reference().cholesky_factor().adjoint();
  const Mat linv_star = lstar.triangularView<Eigen::Upper>().solve(Mat::Identity(n, n));
  std::vector<Mat> steps;
  steps.reserve(path.size());
  for (const Mat& b : path.steps()) steps.push_back(lstar * b * linv_star);
  return {OperatorPath::from_steps(path.times(), std::move(steps), linalg::HermitianForm::identity(n)), lstar,
          linv_star};
}

double isometry_residual(const Mat& a, const linalg::HermitianForm& h0, const linalg::HermitianForm& ht) {
  // Probe basis: H_0-orthonormal vectors L^{-*} e_j.
  const Mat l = h0.cholesky_factor();
  const Mat probes = l.adjoint().triangularView<Eigen::Upper>().solve(Mat::Identity(a.rows(), a.cols()));
  double worst = 0.0;
  for (Eigen::Index j = 0; j < probes.cols(); ++j) {
    const Vec s = probes.col(j);
    const double lhs = std::sqrt(std::max(0.0, std::real((a * s).dot(h0.gram * (a * s)))));
    const double rhs = std::sqrt(std::max(0.0, std::real(s.dot(ht.gram * s))));
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, rhs));
  }
  return worst;
}

namespace {

// d/dt X = 1/2 X^{-*} Gdot in H_0-orthonormal coordinates, where X^* X = G.
Mat lift_rhs(const Mat& x, const Mat& gdot) { return 0.5 * x.adjoint().partialPivLu().solve(gdot); }

Mat rk4_segment(Mat x, const Mat& gdot, double dt, int substeps) {
  const double h = dt / substeps;
  for (int s = 0; s < substeps; ++s) {
    const Mat k1 = lift_rhs(x, gdot);
    const Mat k2 = lift_rhs(x + 0.5 * h * k1, gdot);
    const Mat k3 = lift_rhs(x + 0.5 * h * k2, gdot);
    const Mat k4 = lift_rhs(x + h * k3, gdot);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return x;
}

double gram_residual(const Mat& x, const Mat& g) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double lhs = x.col(j).norm();
    const double rhs = std::sqrt(std::max(0.0, std::real(g(j, j))));
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, rhs));
  }
  return worst;
}

}  // namespace

LiftResult parallel_lift(const std::vector<double>& times, const std::vector<linalg::HermitianForm>& grams,
                         const LiftOptions& opts) {
  if (times.size() != grams.size() || times.empty()) fail(ErrorKind::ConfigInvalid, "Gram path is empty or ragged");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) fail(ErrorKind::ConfigInvalid, "times must be strictly increasing");
  for (const auto& g : grams) {
    if (g.dim() != grams[0].dim()) fail(ErrorKind::SingularGram, "Gram dimension mismatch");
    g.validate();
  }
  const Eigen::Index n = grams[0].dim();
  const Mat l = grams[0].cholesky_factor();
  const Mat lstar = l.adjoint();
  const Mat linv = l.triangularView<Eigen::Lower>().solve(Mat::Identity(n, n));
  const Mat linv_star = linv.adjoint();

  std::vector<Mat> g(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    g[i] = linv * grams[i].gram * linv_star;
    g[i] = 0.5 * (g[i] + g[i].adjoint()).eval();
  }

  LiftResult result;
  std::vector<Mat> steps{Mat::Identity(n, n)};
  Mat x = Mat::Identity(n, n);
  int substeps_max = 0;
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double dt = times[i] - times[i - 1];
    const Mat gdot = (g[i] - g[i - 1]) / dt;
    int substeps = opts.initial_substeps;
    Mat next;
    double residual = 0.0;
    int halvings = 0;
    for (;;) {
      next = rk4_segment(x, gdot, dt, substeps);
      residual = next.allFinite() ? gram_residual(next, g[i]) : std::numeric_limits<double>::infinity();
      if (residual <= opts.lift_tol) break;
      if (++halvings > opts.max_halvings) fail(ErrorKind::StepTooLarge, "integrator cannot meet lift_tol");
      substeps *= 2;
    }
    substeps_max = std::max(substeps_max, substeps);
    result.max_residual = std::max(result.max_residual, residual);
    // Step in reference coordinates: L^{-*} X_i X_{i-1}^{-1} L^*.
    const Mat rel = x.adjoint().partialPivLu().solve(next.adjoint()).adjoint();
    steps.push_back(linv_star * rel * lstar);
    x = next;
  }
  result.substeps_used = substeps_max;
  result.path = OperatorPath::from_steps(times, std::move(steps), grams[0]);
  return result;
}

}  // namespace degenflow::path
