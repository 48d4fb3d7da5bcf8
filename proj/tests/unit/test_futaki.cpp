#include <gtest/gtest.h>

#include <cmath>

#include "degenflow/errors.hpp"
#include "degenflow/futaki.hpp"

using namespace degenflow;

namespace {

futaki::PolytopeData polygon(std::initializer_list<std::pair<double, double>> vs, int kmax) {
  futaki::PolytopeData p;
  p.dim = 2;
  p.kmax = kmax;
  p.vertices.resize(static_cast<Eigen::Index>(vs.size()), 2);
  Eigen::Index i = 0;
  for (auto [x, y] : vs) {
    p.vertices(i, 0) = x;
    p.vertices(i, 1) = y;
    ++i;
  }
  return p;
}

futaki::PolytopeData p2(int kmax) { return polygon({{-1, -1}, {2, -1}, {-1, 2}}, kmax); }
futaki::PolytopeData bl1p2(int kmax) { return polygon({{-1, -1}, {2, -1}, {0, 1}, {-1, 1}}, kmax); }

// Brute-force count of integer points (x, y) in k P for the blow-up polygon:
// y >= -k, x >= -k, y <= k, x + y <= k.
long long bl1p2_count(int k) {
  long long c = 0;
  for (int x = -3 * k; x <= 3 * k; ++x)
    for (int y = -3 * k; y <= 3 * k; ++y)
      if (y >= -k && x >= -k && y <= k && x + y <= k) ++c;
  return c;
}

// Exact integral of x_i over the blow-up polygon, sliced in y: for y in
// [-1, 1] the slice is x in [-1, 1 - y].
double bl1p2_moment(int i) {
  // int ((1 - y)^2 - 1) / 2 dy = 1/3 and int y (2 - y) dy = -2/3.
  return i == 0 ? 1.0 / 3.0 : -2.0 / 3.0;
}

}  // namespace

TEST(Polytope, IntervalCountsAreOddNumbers) {
  futaki::PolytopeData p;
  p.dim = 1;
  p.kmax = 8;
  p.vertices = RMat(2, 1);
  p.vertices << -1, 1;
  const auto t = futaki::weights_from_polytope(p);
  for (int k = 1; k <= 8; ++k) EXPECT_EQ(t.count(k), 2 * k + 1);
  EXPECT_TRUE(t.ehrhart_exact);
}

TEST(Polytope, ProjectivePlaneHasTenCubics) {
  const auto t = futaki::weights_from_polytope(p2(6));
  EXPECT_EQ(t.count(1), 10);
  for (int k = 1; k <= 6; ++k) EXPECT_EQ(t.count(k), (3 * k + 1) * (3 * k + 2) / 2);
}

TEST(Polytope, BlowUpCountsMatchBruteForceAndArea) {
  const auto p = bl1p2(8);
  const auto t = futaki::weights_from_polytope(p);
  for (int k = 1; k <= 8; ++k) EXPECT_EQ(t.count(k), bl1p2_count(k)) << k;
  EXPECT_EQ(t.count(1), 9);
  EXPECT_TRUE(t.ehrhart_exact);
  EXPECT_LT(t.hilbert_fit_residual, 1e-12);
  EXPECT_NEAR(futaki::polytope_volume(p), 4.0, 1e-12);
}

TEST(Polytope, FlatPolytopeIsRejected) {
  auto p = polygon({{0, 0}, {1, 1}, {2, 2}}, 3);
  try {
    futaki::weights_from_polytope(p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotFullDimensional);
  }
}

TEST(TraceExp, SmallCases) {
  futaki::PolytopeData p;
  p.dim = 1;
  p.kmax = 2;
  p.vertices = RMat(2, 1);
  p.vertices << -1, 1;
  const auto t = futaki::weights_from_polytope(p);
  RVec v(1);
  v << 0.3;
  EXPECT_NEAR(futaki::trace_exp(t, v, 1), std::exp(-0.3) + 1.0 + std::exp(0.3), 1e-15);
  EXPECT_DOUBLE_EQ(futaki::trace_exp(t, RVec::Zero(1), 2), 5.0);
  EXPECT_THROW(futaki::trace_exp(t, v, 3), Error);
}

TEST(Futaki, ProjectivePlaneVanishes) {
  const auto t = futaki::weights_from_polytope(p2(30));
  for (int i = 0; i < 2; ++i) {
    const auto f = futaki::futaki_limit(t, RVec::Zero(2), RVec::Unit(2, i));
    EXPECT_LT(std::abs(f.value), 1e-8);
  }
}

// The lattice sums of a lattice polygon are polynomials whose top coefficient is
// the moment of P, so Fut_0(e_i) = -int_P x_i.
TEST(Futaki, BlowUpMatchesExactMoments) {
  const auto t = futaki::weights_from_polytope(bl1p2(24));
  for (int i = 0; i < 2; ++i) {
    const auto f = futaki::futaki_limit(t, RVec::Zero(2), RVec::Unit(2, i));
    EXPECT_NEAR(f.value, -bl1p2_moment(i), 1e-9) << i;
  }
}

TEST(Futaki, LinearityAndShiftInvariance) {
  const auto t = futaki::weights_from_polytope(bl1p2(24));
  RVec a(2), b(2);
  a << 0.7, -1.3;
  b << -0.2, 2.1;
  const RVec v = RVec::Zero(2);
  const double fa = futaki::futaki_limit(t, v, a).value;
  const double fb = futaki::futaki_limit(t, v, b).value;
  EXPECT_NEAR(futaki::futaki_limit(t, v, 2.0 * a - 3.0 * b).value, 2.0 * fa - 3.0 * fb, 1e-9);

  // Extra coordinate acting by a constant on every basis element.
  futaki::TorusWeightTable ext = t;
  ext.rank = 3;
  for (auto& d : ext.degrees) {
    RMat e(d.rows(), 3);
    e << d, RVec::Constant(d.rows(), 1.0);
    d = e;
  }
  ext.validate();
  RVec shift = RVec::Zero(3);
  shift(2) = 5.0;
  EXPECT_NEAR(futaki::futaki_limit(ext, RVec::Zero(3), shift).value, 0.0, 1e-9);
}

TEST(Soliton, ProjectivePlaneGivesZero) {
  const auto t = futaki::weights_from_polytope(p2(12));
  const auto s = futaki::soliton_vector(t);
  EXPECT_LT(s.v.norm(), 1e-8);
}

TEST(Soliton, BlowUpConvergesOnSymmetryAxis) {
  const auto t24 = futaki::weights_from_polytope(bl1p2(24));
  const auto s = futaki::soliton_vector(t24);
  EXPECT_LT(s.residual, 1e-8);
  EXPECT_NEAR(s.v(0), 0.0, 1e-8);
  EXPECT_GT(std::abs(s.v(1)), 1e-2);
  for (double e : s.min_hessian_eigenvalue) EXPECT_GT(e, 0.0);
  for (std::size_t i = 1; i < s.objective_history.size(); ++i)
    EXPECT_LE(s.objective_history[i], s.objective_history[i - 1] + 1e-12);

  const double bis = futaki::soliton_bisection(t24, RVec::Unit(2, 1));
  EXPECT_NEAR(bis, s.v(1), 1e-7);

  const auto t48 = futaki::weights_from_polytope(bl1p2(48));
  const auto s48 = futaki::soliton_vector(t48);
  EXPECT_LT((s48.v - s.v).cwiseAbs().maxCoeff(), 1e-5);
  std::printf("soliton v = (%.12g, %.12g), kmax 48: (%.12g, %.12g)\n", s.v(0), s.v(1), s48.v(0), s48.v(1));
}

// Conic degeneration: R_k has weights 0..k on x^a y^{k-a} and 0 on the k
// monomials y^b z^c with c >= 1, so Tr A_k = k(k+1)/2 and
// Tr A_k^2 = k(k+1)(2k+1)/6 with N(k) = 2k + 1.
TEST(DonaldsonFutaki, ConicMatchesClosedForm) {
  std::vector<RVec> gen;
  for (int k = 1; k <= 20; ++k) {
    RVec a = RVec::Zero(2 * k + 1);
    for (int i = 0; i <= k; ++i) a(i) = i;
    gen.push_back(a);
  }
  const auto rep = futaki::df_and_n2(1, gen);
  EXPECT_NEAR(rep.fut, -0.5, 1e-10);
  EXPECT_NEAR(rep.n2 * rep.n2, 5.0 / 24.0, 1e-10);
  ASSERT_TRUE(rep.ratio.has_value());

  std::vector<RVec> shifted = gen;
  for (auto& a : shifted) a.array() += 3.0;
  const auto rep2 = futaki::df_and_n2(1, shifted);
  EXPECT_NEAR(rep2.fut, rep.fut, 1e-9);
  EXPECT_NEAR(rep2.n2, rep.n2, 1e-9);

  std::vector<RVec> zero;
  for (const auto& a : gen) zero.push_back(RVec::Zero(a.size()));
  const auto rep0 = futaki::df_and_n2(1, zero);
  EXPECT_EQ(rep0.fut, 0.0);
  EXPECT_EQ(rep0.n2, 0.0);
  EXPECT_FALSE(rep0.ratio.has_value());
}
