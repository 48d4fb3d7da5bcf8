#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace degenflow {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

namespace linalg {

/// Positive-definite Gram matrix of an inner product in a fixed reference basis.
struct HermitianForm {
  Mat gram;

  static HermitianForm identity(Eigen::Index n) { return {Mat::Identity(n, n)}; }
  Eigen::Index dim() const { return gram.rows(); }

  /// Throws SingularGram unless Hermitian and positive-definite.
  void validate() const;
  /// Lower Cholesky factor L with gram = L L^*.
  Mat cholesky_factor() const;
};

/// A Hermitian operator together with its clustered spectral data.
///
/// Levels are sorted in descending order; `eigenspaces[s]` holds an orthonormal
/// basis (columns) of the eigenspace for `spectrum[s]`.
struct HermitianGenerator {
  Mat matrix;
  std::vector<double> spectrum;
  std::vector<Mat> eigenspaces;
  std::vector<int> multiplicities;

  Eigen::Index dim() const { return matrix.rows(); }
  std::size_t levels() const { return spectrum.size(); }
  Mat projector(std::size_t s) const { return eigenspaces[s] * eigenspaces[s].adjoint(); }
  /// Orthonormal basis of the sum of eigenspaces first..last (inclusive).
  Mat span_of_levels(std::size_t first, std::size_t last) const;
  /// Eigenvalues repeated by multiplicity, descending.
  std::vector<double> eigenvalues() const;
  /// Unitary whose columns are the concatenated eigenspace bases.
  Mat eigenbasis() const;
  double norm() const;
};

/// Default clustering tolerance 1e-6 * ||H|| (spectral norm, floored at 1e-300).
double default_cluster_tol(const Mat& h);

/// Spectral decomposition of a Hermitian matrix with eigenvalues grouped into
/// levels. Two eigenvalues share a level iff their gap is below `cluster_tol`;
/// a negative tolerance selects the default.
///
/// Throws NotHermitian when ||H - H^*|| > 1e-12 max(1, ||H||), and
/// AmbiguousClustering when a chained level spans at least `cluster_tol`
/// (single- and complete-linkage clusterings then disagree).
HermitianGenerator spectral_decompose(const Mat& h, double cluster_tol = -1.0);

/// Builds a generator from levels and orthonormal eigenspace bases.
HermitianGenerator make_generator(std::vector<double> spectrum, std::vector<Mat> eigenspaces);

/// Diagonal generator diag(values) with levels clustered at `cluster_tol`.
HermitianGenerator diagonal_generator(const std::vector<double>& values, double cluster_tol = 1e-9);

struct PolarFactors {
  Mat unitary;
  Mat positive;
};

/// B = unitary * positive with `positive` Hermitian positive-definite and
/// `unitary` an isometry, both with respect to the reference form `h0`.
/// Throws SingularInput when the condition number exceeds 1e12.
PolarFactors polar_positive_part(const Mat& b, const HermitianForm& h0);
PolarFactors polar_positive_part(const Mat& b);

/// exp(t H) and log(P) for Hermitian H and Hermitian positive-definite P.
Mat hermitian_exp(const Mat& h, double t = 1.0);
Mat hermitian_log(const Mat& p);
/// Principal square root of a Hermitian positive semidefinite matrix.
Mat hermitian_sqrt(const Mat& p);
/// exp(K) for skew-Hermitian K, computed through the Hermitian matrix iK.
Mat unitary_exp(const Mat& skew);

/// Unitary factor of the polar decomposition (closest unitary).
Mat closest_unitary(const Mat& m);

/// Orthonormal basis of the column span (thin QR with rank detection at `tol`
/// relative to the largest column norm).
Mat orthonormal_basis(const Mat& columns, double tol = 1e-12);

/// Sines of principal angles between two column spans (ascending). Spans of
/// different dimension compare the smaller one against the larger.
std::vector<double> principal_angle_sines(const Mat& a, const Mat& b);
/// Largest principal angle sine; 0 means identical spans.
double subspace_distance(const Mat& a, const Mat& b);

/// Intersection of two spans, given orthonormal bases. Directions whose
/// principal angle sine is below `tol` are kept.
Mat subspace_intersection(const Mat& a, const Mat& b, double tol);

/// Orthonormal basis of the kernel of `m`, with singular values below `tol`
/// (absolute) treated as zero.
Mat null_space(const Mat& m, double tol);

/// Fubini-Study distance arccos(|<v,w>| / (|v||w|)) in [0, pi/2], evaluated
/// in the numerically stable atan2 form. Throws ZeroVector.
double fs_distance(const Vec& v, const Vec& w);

/// Angle between the line [v] and the projective subspace P(span(basis)),
/// where `basis` has orthonormal columns.
double angle_to_subspace(const Vec& v, const Mat& basis);

/// Fixed pairwise-tree summation; results do not depend on thread count.
double pairwise_sum(const double* data, std::size_t n);
cplx pairwise_sum(const cplx* data, std::size_t n);

double spectral_norm(const Mat& m);

}  // namespace linalg
}  // namespace degenflow
