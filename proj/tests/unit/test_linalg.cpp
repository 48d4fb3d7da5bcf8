#include <gtest/gtest.h>

#include <cmath>

#include "degenflow/flows.hpp"
#include "degenflow/linalg.hpp"

using namespace degenflow;

namespace {

Mat random_matrix(Eigen::Index n, std::uint64_t seed) {
  return flows::random_hermitian(n, seed) + cplx(0.0, 1.0) * flows::random_hermitian(n, seed + 1);
}

}  // namespace

TEST(Linalg, ExpLogRoundTrip) {
  const Mat h = flows::random_hermitian(5, 3);
  const Mat p = linalg::hermitian_exp(h);
  EXPECT_LT((linalg::hermitian_log(p) - h).norm(), 1e-10);
  const Mat r = linalg::hermitian_sqrt(p);
  EXPECT_LT((r * r - p).norm(), 1e-10 * p.norm());
}

TEST(Linalg, PolarReconstructs) {
  const Mat b = random_matrix(4, 11) + 4.0 * Mat::Identity(4, 4);
  const auto pf = linalg::polar_positive_part(b);
  EXPECT_LT((pf.unitary * pf.positive - b).norm(), 1e-10 * b.norm());
  EXPECT_LT((pf.unitary.adjoint() * pf.unitary - Mat::Identity(4, 4)).norm(), 1e-12);
  EXPECT_LT((pf.positive - pf.positive.adjoint()).norm(), 1e-12);
}

TEST(Linalg, SpectralDecomposeClustersLevels) {
  const auto g = linalg::diagonal_generator({2.0, 1.0, 1.0, -0.5});
  ASSERT_EQ(g.levels(), 3u);
  EXPECT_EQ(g.eigenspaces[1].cols(), 2);
  const Mat resum = 2.0 * g.projector(0) + 1.0 * g.projector(1) - 0.5 * g.projector(2);
  EXPECT_LT((resum - g.matrix).norm(), 1e-12);
}

TEST(Linalg, SubspaceDistanceInvariantUnderBasisChange) {
  const Mat a = random_matrix(6, 21).leftCols(3);
  const Mat mix = random_matrix(3, 5) + 3.0 * Mat::Identity(3, 3);
  EXPECT_LT(linalg::subspace_distance(a, a * mix), 1e-10);
  const Mat b = random_matrix(6, 41).leftCols(3);
  EXPECT_GT(linalg::subspace_distance(a, b), 1e-3);
}

TEST(Linalg, IntersectionOfOverlappingSpans) {
  Mat a = Mat::Zero(4, 2), b = Mat::Zero(4, 2);
  a(0, 0) = a(1, 1) = 1.0;
  b(1, 0) = b(2, 1) = 1.0;
  const Mat c = linalg::subspace_intersection(a, b, 1e-9);
  ASSERT_EQ(c.cols(), 1);
  EXPECT_NEAR(std::abs(c(1, 0)), 1.0, 1e-12);
}

TEST(Linalg, SpectralNormMatchesSvd) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Mat m = random_matrix(5, seed * 3).leftCols(3);
    Eigen::JacobiSVD<Mat> svd(m);
    EXPECT_NEAR(linalg::spectral_norm(m), svd.singularValues()(0), 1e-12 * svd.singularValues()(0));
  }
}

TEST(Linalg, FubiniStudyIgnoresPhase) {
  const Vec v = flows::random_vector(4, 8);
  EXPECT_LT(linalg::fs_distance(v, std::polar(2.0, 0.7) * v), 1e-7);
  EXPECT_GT(linalg::fs_distance(v, flows::random_vector(4, 9)), 1e-3);
}

TEST(Linalg, PairwiseSumIsAccurate) {
  std::vector<double> xs(1 << 16, 0.1);
  EXPECT_NEAR(linalg::pairwise_sum(xs.data(), xs.size()), 0.1 * static_cast<double>(xs.size()), 1e-9);
}
