#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "degenflow/asymptotics.hpp"
#include "degenflow/errors.hpp"
#include "degenflow/flows.hpp"
#include "degenflow/reps.hpp"
#include "fixtures.hpp"

using namespace degenflow;

namespace {

flows::SynthPath three_level_path(std::uint64_t seed, double noise) {
  flows::SynthPathConfig cfg;
  cfg.lambda = fixtures::planted_generator({1.0, 0.0, -0.5}, {1, 2, 1}, seed);
  cfg.theta = 0.7;
  cfg.noise = noise;
  cfg.steps = 400;
  cfg.seed = seed;
  return flows::synth_path(cfg);
}

}  // namespace

TEST(Splitting, ComplementsAreTransverseAndInsideTheFiltration) {
  for (std::uint64_t seed : {3u, 4u, 5u}) {
    SCOPED_TRACE(seed);
    const auto synth = three_level_path(seed, 0.2);
    const auto gauge = asymptotics::estimate_gauge(synth.path);
    auto filt = asymptotics::splitting(synth.path, gauge, asymptotics::filtration(synth.path, gauge));
    ASSERT_EQ(filt.splitting.size(), 3u);
    EXPECT_GT(filt.direct_sum_margin, 0.1);
    for (std::size_t s = 0; s < 3; ++s) {
      EXPECT_EQ(filt.splitting[s].cols(), gauge.lambda.multiplicities[s]);
      for (Eigen::Index c = 0; c < filt.splitting[s].cols(); ++c)
        EXPECT_LT(linalg::angle_to_subspace(filt.splitting[s].col(c), filt.subspaces[s]), 1e-6);
    }
  }
}

TEST(OneParam, FiltrationDoesNotDependOnTheSplitting) {
  const auto synth = three_level_path(11, 0.1);
  const auto gauge = asymptotics::estimate_gauge(synth.path);
  const auto filt = asymptotics::filtration(synth.path, gauge);
  const auto a = asymptotics::one_param(asymptotics::splitting(synth.path, gauge, filt, 1), gauge);
  const auto b = asymptotics::one_param(asymptotics::splitting(synth.path, gauge, filt, 4), gauge);
  EXPECT_TRUE(asymptotics::equal_filtration(a.xi, b.xi));
  const auto of = asymptotics::filtration_of_generator(a.xi);
  ASSERT_EQ(of.jumps.size(), 3u);
  for (std::size_t s = 0; s < 3; ++s) {
    EXPECT_NEAR(of.jumps[s], gauge.lambda.spectrum[s], 1e-9);
    EXPECT_LT(linalg::subspace_distance(of.subspaces[s], filt.subspaces[s]), 1e-6);
  }
  // lambda(t) = C_0^{-1} e^{t Lambda} C_0.
  EXPECT_LT((a.lambda_t(0.7) - a.conjugated(0.7)).norm(), 1e-9 * a.lambda_t(0.7).norm());
}

// Second differences of t -> log |e^{t Lambda} v| are nonnegative; they vanish
// for eigenvectors.
TEST(LogNormConvexity, RandomGeneratorsAndEigenvectors) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 5;
    const auto lambda = linalg::spectral_decompose(flows::random_hermitian(n, 500 + trial) * 2.0);
    const Vec v = flows::random_vector(n, 900 + trial);
    const auto f = asymptotics::log_norm_series(lambda, v, 30);
    for (std::size_t t = 1; t + 1 < f.size(); ++t) EXPECT_GE(f[t + 1] - 2 * f[t] + f[t - 1], -1e-10);
    const Vec e = lambda.eigenspaces[0].col(0);
    const auto g = asymptotics::log_norm_series(lambda, e, 30);
    for (std::size_t t = 1; t + 1 < g.size(); ++t) EXPECT_LT(std::abs(g[t + 1] - 2 * g[t] + g[t - 1]), 1e-12);
  }
}

TEST(Threshold, IncrementsOnceAboveStayAbove) {
  EXPECT_TRUE(asymptotics::threshold_holds({0.1, 0.5, 0.9, 1.0, 1.0}, 0.7, 0));
  EXPECT_FALSE(asymptotics::threshold_holds({0.1, 0.9, 0.5, 1.0}, 0.7, 0));
  EXPECT_TRUE(asymptotics::threshold_holds({0.1, 0.2}, 0.7, 0));
}

TEST(Stabilizer, EigenvectorVersusGenericVector) {
  const auto lambda = linalg::diagonal_generator({2.0, 1.0, 0.0});
  const auto std_rep = reps::RepDescriptor::standard();
  EXPECT_EQ(asymptotics::stabilizer_dim(Vec::Unit(3, 0), lambda, std_rep), 3);
  Vec g(3);
  g << 1.0, cplx(0.3, 0.2), -0.7;
  EXPECT_EQ(asymptotics::stabilizer_dim(g, lambda, std_rep), 1);
}

TEST(EstimateGauge, TooShortPathIsRejected) {
  flows::SynthPathConfig cfg;
  cfg.lambda = linalg::diagonal_generator({1.0, 0.0});
  cfg.steps = 10;
  const auto synth = flows::synth_path(cfg);
  try {
    asymptotics::estimate_gauge(synth.path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TooShort);
  }
}
