#include "degenflow/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "degenflow/errors.hpp"

namespace degenflow::linalg {
namespace {

constexpr const char* kModule = "linalg";

[[noreturn]] void fail(ErrorKind kind, const std::string& msg) { throw Error(kind, kModule, msg); }

template <typename T>
T pairwise_impl(const T* data, std::size_t n) {
  if (n <= 8) {
    T acc{};
    for (std::size_t i = 0; i < n; ++i) acc += data[i];
    return acc;
  }
  const std::size_t half = n / 2;
  return pairwise_impl(data, half) + pairwise_impl(data + half, n - half);
}

}  // namespace

double pairwise_sum(const double* data, std::size_t n) { return pairwise_impl(data, n); }
cplx pairwise_sum(const cplx* data, std::size_t n) { return pairwise_impl(data, n); }

double spectral_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  // Largest eigenvalue of the smaller Gram matrix; accurate relative to |m|,
  // which is all a norm needs, and much cheaper than a Jacobi SVD.
  const Mat g = m.rows() <= m.cols() ? Mat(m * m.adjoint()) : Mat(m.adjoint() * m);
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (g + g.adjoint()), Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues()(es.eigenvalues().size() - 1)));
}

void HermitianForm::validate() const {
  if (gram.rows() != gram.cols() || gram.rows() == 0) fail(ErrorKind::SingularGram, "Gram matrix must be square and nonempty");
  if (!gram.allFinite()) fail(ErrorKind::SingularGram, "Gram matrix has non-finite entries");
  const double scale = std::max(1.0, gram.cwiseAbs().maxCoeff());
  if ((gram - gram.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    fail(ErrorKind::SingularGram, "Gram matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Mat> es(gram, Eigen::EigenvaluesOnly);
  if (!(es.eigenvalues()(0) > 0.0)) fail(ErrorKind::SingularGram, "Gram matrix is not positive-definite");
}

Mat HermitianForm::cholesky_factor() const {
  Eigen::LLT<Mat> llt(gram);
  if (llt.info() != Eigen::Success) fail(ErrorKind::SingularGram, "Cholesky factorization failed");
  return llt.matrixL();
}

Mat HermitianGenerator::span_of_levels(std::size_t first, std::size_t last) const {
  Eigen::Index cols = 0;
  for (std::size_t s = first; s <= last && s < eigenspaces.size(); ++s) cols += eigenspaces[s].cols();
  Mat out(dim(), cols);
  Eigen::Index at = 0;
  for (std::size_t s = first; s <= last && s < eigenspaces.size(); ++s) {
    out.middleCols(at, eigenspaces[s].cols()) = eigenspaces[s];
    at += eigenspaces[s].cols();
  }
  return out;
}

std::vector<double> HermitianGenerator::eigenvalues() const {
  std::vector<double> out;
  for (std::size_t s = 0; s < spectrum.size(); ++s)
    out.insert(out.end(), static_cast<std::size_t>(multiplicities[s]), spectrum[s]);
  return out;
}

Mat HermitianGenerator::eigenbasis() const {
  return levels() == 0 ? Mat(dim(), 0) : span_of_levels(0, levels() - 1);
}

double HermitianGenerator::norm() const {
  double n = 0.0;
  for (double v : spectrum) n = std::max(n, std::abs(v));
  return n;
}

double default_cluster_tol(const Mat& h) { return std::max(1e-6 * spectral_norm(h), 1e-300); }

HermitianGenerator make_generator(std::vector<double> spectrum, std::vector<Mat> eigenspaces) {
  HermitianGenerator gen;
  const Eigen::Index n = eigenspaces.empty() ? 0 : eigenspaces.front().rows();
  gen.matrix = Mat::Zero(n, n);
  for (std::size_t s = 0; s < spectrum.size(); ++s) {
    gen.matrix += spectrum[s] * eigenspaces[s] * eigenspaces[s].adjoint();
    gen.multiplicities.push_back(static_cast<int>(eigenspaces[s].cols()));
  }
  gen.matrix = 0.5 * (gen.matrix + gen.matrix.adjoint()).eval();
  gen.spectrum = std::move(spectrum);
  gen.eigenspaces = std::move(eigenspaces);
  return gen;
}

HermitianGenerator spectral_decompose(const Mat& h, double cluster_tol) {
  if (h.rows() != h.cols() || h.rows() == 0) fail(ErrorKind::NotHermitian, "operator must be square and nonempty");
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  if ((h - h.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    fail(ErrorKind::NotHermitian, "operator is not Hermitian within 1e-12");
  if (cluster_tol < 0.0) cluster_tol = default_cluster_tol(h);

  const Mat sym = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> es(sym);
  const Eigen::Index n = sym.rows();
  // Descending order.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = n - 1 - i;

  std::vector<std::vector<Eigen::Index>> clusters;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const double value = es.eigenvalues()(order[k]);
    if (k == 0 || es.eigenvalues()(order[k - 1]) - value >= cluster_tol) clusters.emplace_back();
    clusters.back().push_back(order[k]);
  }

  std::vector<double> spectrum;
  std::vector<Mat> spaces;
  for (const auto& cluster : clusters) {
    const double hi = es.eigenvalues()(cluster.front());
    const double lo = es.eigenvalues()(cluster.back());
    if (hi - lo >= cluster_tol)
      fail(ErrorKind::AmbiguousClustering, "eigenvalue chain spans more than the clustering tolerance");
    double mean = 0.0;
    Mat basis(n, static_cast<Eigen::Index>(cluster.size()));
    for (std::size_t j = 0; j < cluster.size(); ++j) {
      mean += es.eigenvalues()(cluster[j]);
      basis.col(static_cast<Eigen::Index>(j)) = es.eigenvectors().col(cluster[j]);
    }
    spectrum.push_back(mean / static_cast<double>(cluster.size()));
    spaces.push_back(std::move(basis));
  }
  return make_generator(std::move(spectrum), std::move(spaces));
}

HermitianGenerator diagonal_generator(const std::vector<double>& values, double cluster_tol) {
  const auto n = static_cast<Eigen::Index>(values.size());
  Mat d = Mat::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) d(i, i) = values[static_cast<std::size_t>(i)];
  // Keep the eigenspaces aligned with coordinate axes rather than whatever
  // basis the eigensolver returns inside a degenerate level.
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    return values[static_cast<std::size_t>(a)] > values[static_cast<std::size_t>(b)];
  });
  std::vector<double> spectrum;
  std::vector<std::vector<Eigen::Index>> groups;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const double v = values[static_cast<std::size_t>(idx[k])];
    if (k == 0 || values[static_cast<std::size_t>(idx[k - 1])] - v >= cluster_tol) {
      groups.emplace_back();
      spectrum.push_back(v);
    }
    groups.back().push_back(idx[k]);
  }
  std::vector<Mat> spaces;
  for (const auto& g : groups) {
    Mat basis = Mat::Zero(n, static_cast<Eigen::Index>(g.size()));
    for (std::size_t j = 0; j < g.size(); ++j) basis(g[j], static_cast<Eigen::Index>(j)) = 1.0;
    spaces.push_back(std::move(basis));
  }
  return make_generator(std::move(spectrum), std::move(spaces));
}

PolarFactors polar_positive_part(const Mat& b, const HermitianForm& h0) {
  if (b.rows() != b.cols() || b.rows() != h0.dim()) fail(ErrorKind::SingularInput, "dimension mismatch");
  if (!b.allFinite()) fail(ErrorKind::SingularInput, "operator has non-finite entries");
  const Mat l = h0.cholesky_factor();
  const Mat lstar = l.adjoint();
  // Orthonormal coordinates y = L^* x.
  const Mat linv_star = lstar.triangularView<Eigen::Upper>().solve(Mat::Identity(b.rows(), b.cols()));
  const Mat bo = lstar * b * linv_star;
  Eigen::JacobiSVD<Mat> svd(bo, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  if (!(smin > 0.0) || sv(0) / smin > 1e12) fail(ErrorKind::SingularInput, "condition number exceeds 1e12");
  const Mat u = svd.matrixU() * svd.matrixV().adjoint();
  const Mat p = svd.matrixV() * sv.cast<cplx>().asDiagonal() * svd.matrixV().adjoint();
  return {linv_star * u * lstar, linv_star * (0.5 * (p + p.adjoint())) * lstar};
}

PolarFactors polar_positive_part(const Mat& b) { return polar_positive_part(b, HermitianForm::identity(b.rows())); }

namespace {

template <typename F>
Mat hermitian_function(const Mat& h, F f) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (h + h.adjoint()));
  RVec mapped(es.eigenvalues().size());
  for (Eigen::Index i = 0; i < mapped.size(); ++i) mapped(i) = f(es.eigenvalues()(i));
  const Mat& v = es.eigenvectors();
  return v * mapped.cast<cplx>().asDiagonal() * v.adjoint();
}

}  // namespace

Mat hermitian_exp(const Mat& h, double t) {
  return hermitian_function(h, [t](double x) { return std::exp(t * x); });
}

Mat hermitian_log(const Mat& p) {
  return hermitian_function(p, [](double x) {
    if (!(x > 0.0)) throw Error(ErrorKind::SingularInput, kModule, "logarithm of a non-positive operator");
    return std::log(x);
  });
}

Mat hermitian_sqrt(const Mat& p) {
  return hermitian_function(p, [](double x) { return std::sqrt(std::max(x, 0.0)); });
}

Mat unitary_exp(const Mat& skew) {
  // K = -i H with H = iK Hermitian, so exp(K) = V exp(-i diag) V^*.
  const Mat h = cplx(0.0, 1.0) * skew;
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (h + h.adjoint()));
  Vec phases(es.eigenvalues().size());
  for (Eigen::Index i = 0; i < phases.size(); ++i) phases(i) = std::exp(cplx(0.0, -es.eigenvalues()(i)));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

Mat closest_unitary(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

Mat orthonormal_basis(const Mat& columns, double tol) {
  if (columns.cols() == 0) return Mat(columns.rows(), 0);
  Eigen::ColPivHouseholderQR<Mat> cp(columns);
  cp.setThreshold(tol);
  const Eigen::Index rank = cp.rank();
  if (rank == columns.cols()) {
    Eigen::HouseholderQR<Mat> qr(columns);
    return qr.householderQ() * Mat::Identity(columns.rows(), rank);
  }
  return cp.householderQ() * Mat::Identity(columns.rows(), rank);
}

std::vector<double> principal_angle_sines(const Mat& a, const Mat& b) {
  Mat qa = orthonormal_basis(a);
  Mat qb = orthonormal_basis(b);
  if (qa.cols() > qb.cols()) std::swap(qa, qb);
  const Mat residual = qa - qb * (qb.adjoint() * qa);
  std::vector<double> out;
  if (residual.cols() == 0) return out;
  Eigen::JacobiSVD<Mat> svd(residual);
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) out.push_back(std::min(1.0, svd.singularValues()(i)));
  std::sort(out.begin(), out.end());
  return out;
}

double subspace_distance(const Mat& a, const Mat& b) {
  if (a.cols() != b.cols()) return 1.0;
  const auto s = principal_angle_sines(a, b);
  return s.empty() ? 0.0 : s.back();
}

Mat subspace_intersection(const Mat& a, const Mat& b, double tol) {
  const Mat qa = orthonormal_basis(a);
  const Mat qb = orthonormal_basis(b);
  if (qa.cols() == 0 || qb.cols() == 0) return Mat(a.rows(), 0);
  const Mat residual = qa - qb * (qb.adjoint() * qa);
  Eigen::JacobiSVD<Mat> svd(residual, Eigen::ComputeFullV);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) < tol) keep.push_back(i);
  // Directions beyond the thin SVD (wide residual) have zero singular value.
  for (Eigen::Index i = svd.singularValues().size(); i < qa.cols(); ++i) keep.push_back(i);
  Mat out(a.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = qa * svd.matrixV().col(keep[k]);
  return orthonormal_basis(out);
}

Mat null_space(const Mat& m, double tol) {
  if (m.cols() == 0) return Mat(0, 0);
  if (m.rows() == 0) return Mat::Identity(m.cols(), m.cols());
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < m.cols(); ++i)
    if (i >= sv.size() || sv(i) < tol) keep.push_back(i);
  Mat out(m.cols(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = svd.matrixV().col(keep[k]);
  return out;
}

double fs_distance(const Vec& v, const Vec& w) {
  const double nv = v.norm();
  const double nw = w.norm();
  if (!(nv > 0.0) || !(nw > 0.0)) fail(ErrorKind::ZeroVector, "Fubini-Study distance of a zero vector");
  const Vec a = v / nv;
  const Vec b = w / nw;
  const cplx overlap = a.dot(b);  // a^* b
  const double sine = (b - overlap * a).norm();
  return std::atan2(sine, std::abs(overlap));
}

double angle_to_subspace(const Vec& v, const Mat& basis) {
  const double nv = v.norm();
  if (!(nv > 0.0)) fail(ErrorKind::ZeroVector, "angle of a zero vector");
  if (basis.cols() == 0) return M_PI / 2;
  const Vec proj = basis * (basis.adjoint() * v);
  return std::atan2((v - proj).norm(), proj.norm());
}

}  // namespace degenflow::linalg
