#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "degenflow/errors.hpp"
#include "degenflow/flows.hpp"
#include "degenflow/linalg.hpp"
#include "degenflow/reps.hpp"

using namespace degenflow;

namespace {

Mat random_invertible(Eigen::Index n, std::uint64_t seed) {
  return flows::random_hermitian(n, seed) + cplx(0.0, 1.0) * flows::random_hermitian(n, seed + 1) +
         3.0 * Mat::Identity(n, n);
}

std::vector<reps::RepDescriptor> sample_reps() {
  using reps::RepDescriptor;
  return {RepDescriptor::standard(), RepDescriptor::dual(), RepDescriptor::sym(2), RepDescriptor::sym(3),
          RepDescriptor::ext(2),
          RepDescriptor::tensor({RepDescriptor::sym(2), RepDescriptor::dual()})};
}

}  // namespace

TEST(Reps, ParsePrintRoundTrip) {
  for (const std::string text : {"std", "dual", "sym:3", "ext:2", "tensor(sym:2,dual)"}) {
    EXPECT_EQ(reps::RepDescriptor::parse(text).to_string(), text);
  }
  EXPECT_THROW(reps::RepDescriptor::parse("sym:"), Error);
  EXPECT_THROW(reps::RepDescriptor::parse("bogus"), Error);
}

TEST(Reps, Dimensions) {
  EXPECT_EQ(reps::RepDescriptor::sym(2).dim(3), 6);
  EXPECT_EQ(reps::RepDescriptor::ext(2).dim(4), 6);
  EXPECT_EQ(reps::RepDescriptor::tensor({reps::RepDescriptor::sym(2), reps::RepDescriptor::dual()}).dim(3), 18);
}

// Property: induce is a group homomorphism.
TEST(Reps, InduceIsMultiplicative) {
  const Mat a = random_invertible(3, 5), b = random_invertible(3, 9);
  for (const auto& d : sample_reps()) {
    const Mat lhs = reps::induce(d, a * b);
    const Mat rhs = reps::induce(d, a) * reps::induce(d, b);
    EXPECT_LT((lhs - rhs).norm(), 1e-9 * lhs.norm()) << d.to_string();
  }
}

// Property: unitaries induce unitaries (orthonormal bases of the induced spaces).
TEST(Reps, InducePreservesUnitarity) {
  const Mat u = linalg::closest_unitary(random_invertible(4, 13));
  for (const auto& d : sample_reps()) {
    const Mat v = reps::induce(d, u);
    EXPECT_LT((v.adjoint() * v - Mat::Identity(v.cols(), v.cols())).norm(), 1e-10) << d.to_string();
  }
}

// Property: the Lie action is the derivative of the group action.
TEST(Reps, LieActionIsDerivative) {
  const Mat x = flows::random_hermitian(3, 31);
  const double h = 1e-6;
  for (const auto& d : sample_reps()) {
    const Mat fd = (reps::induce(d, linalg::hermitian_exp(x, h)) - reps::induce(d, linalg::hermitian_exp(x, -h))) /
                   (2.0 * h);
    const Mat lie = reps::induce_lie(d, x);
    EXPECT_LT((fd - lie).norm(), 1e-6 * std::max(1.0, lie.norm())) << d.to_string();
  }
}

// Property: induced diagonal action has eigenvalues e^{basis weights}.
TEST(Reps, BasisWeightsMatchDiagonalAction) {
  const std::vector<double> mu{0.7, -0.2, 0.1};
  RVec d(3);
  for (int i = 0; i < 3; ++i) d(i) = mu[static_cast<std::size_t>(i)];
  const Mat diag = d.cast<cplx>().asDiagonal();
  for (const auto& rep : sample_reps()) {
    const Mat ind = reps::induce_lie(rep, diag);
    const auto w = reps::basis_weights(rep, mu);
    ASSERT_EQ(static_cast<Eigen::Index>(w.size()), ind.rows());
    for (Eigen::Index i = 0; i < ind.rows(); ++i) EXPECT_NEAR(ind(i, i).real(), w[static_cast<std::size_t>(i)], 1e-12);
    EXPECT_LT((ind - Mat(ind.diagonal().asDiagonal())).norm(), 1e-12);
  }
}

TEST(Reps, PluckerSatisfiesRelations) {
  const Mat span = random_invertible(5, 41).leftCols(2);
  const auto pv = reps::plucker(span);
  EXPECT_LT(reps::plucker_residual(pv.coordinates, 5, 2), 1e-10);
  Vec bogus = Vec::Zero(pv.coordinates.size());
  bogus(0) = 1.0;
  bogus(bogus.size() - 1) = 1.0;  // e12 + e45 is not decomposable
  EXPECT_GT(reps::plucker_residual(bogus, 5, 2), 0.1);
  Mat dep(5, 2);
  dep.col(0) = span.col(0);
  dep.col(1) = 2.0 * span.col(0);
  EXPECT_THROW(reps::plucker(dep), Error);
}
