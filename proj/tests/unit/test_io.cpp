#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "degenflow/errors.hpp"
#include "degenflow/flows.hpp"
#include "degenflow/io.hpp"

using namespace degenflow;
using io::json;

namespace {

path::OperatorPath small_path() {
  flows::SynthPathConfig cfg;
  cfg.lambda = linalg::diagonal_generator({1.0, 0.0, -0.5});
  cfg.steps = 40;
  cfg.noise = 0.3;
  cfg.seed = 5;
  return flows::synth_path(cfg).path;
}

bool bitwise_equal(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (a.data()[i] != b.data()[i]) return false;
  return true;
}

}  // namespace

// Property: write then read reproduces every step bit for bit.
TEST(Io, PathRoundTripIsLossless) {
  const auto p = small_path();
  const auto q = io::path_from_json(json::parse(io::path_to_json(p).dump(2)));
  ASSERT_EQ(p.size(), q.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    EXPECT_EQ(p.times()[i], q.times()[i]);
    EXPECT_TRUE(bitwise_equal(p.step(i), q.step(i))) << "step " << i;
  }
  EXPECT_TRUE(bitwise_equal(p.reference().gram, q.reference().gram));
}

TEST(Io, CumulativeAndIncrementFormsAgree) {
  const auto p = small_path();
  json cum = {{"dim", p.dim()}, {"kind", "cumulative"}, {"times", p.times()}, {"matrices", json::array()}};
  for (std::size_t i = 0; i < p.size(); ++i) cum["matrices"].push_back(io::matrix_to_json(p.cumulative(i)));
  const auto q = io::path_from_json(cum);
  for (std::size_t i = 0; i < p.size(); i += 7)
    EXPECT_LT((q.cumulative(i) - p.cumulative(i)).norm(), 1e-9 * p.cumulative(i).norm());
}

TEST(Io, MatrixAcceptsRowsOrFlat) {
  const json rows = json::parse(R"([[[1,0],[2,0]],[[0,1],3]])");
  const Mat m = io::matrix_from_json(rows, 2, 2);
  EXPECT_EQ(m(0, 1), cplx(2.0, 0.0));
  EXPECT_EQ(m(1, 0), cplx(0.0, 1.0));
  EXPECT_EQ(m(1, 1), cplx(3.0, 0.0));
  EXPECT_TRUE(bitwise_equal(io::matrix_from_json(io::matrix_to_json(m), 2, 2), m));
  EXPECT_THROW(io::matrix_from_json(rows, 3, 3), Error);
}

TEST(Io, RationalsAndLists) {
  EXPECT_DOUBLE_EQ(io::parse_rational("1/3"), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(io::parse_rational("-2"), -2.0);
  EXPECT_DOUBLE_EQ(io::parse_rational(0.25), 0.25);
  EXPECT_THROW(io::parse_rational("1/0"), Error);
  EXPECT_THROW(io::parse_rational("x"), Error);
  EXPECT_EQ(io::parse_real_list("2,1,0"), (std::vector<double>{2.0, 1.0, 0.0}));
  EXPECT_EQ(io::parse_int_list("1, 2,3"), (std::vector<int>{1, 2, 3}));
  try {
    io::parse_real_list("1,,2");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ConfigInvalid);
  }
}

TEST(Io, NonFiniteAndMissingInputAreParseErrors) {
  json j = {{"a", {1.0, std::numeric_limits<double>::quiet_NaN()}}};
  try {
    io::require_finite(j, "test");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InputParseError);
    EXPECT_TRUE(e.is_io_error());
  }
  EXPECT_THROW(io::read_json_file("/nonexistent/degenflow.json"), Error);
  EXPECT_THROW(io::path_from_json(json::parse(R"({"dim": 2, "matrices": []})")), Error);
}

TEST(Io, DataFilesLoad) {
  const auto p = io::path_from_json(io::read_json_file(std::string(DEGENFLOW_DATA_DIR) + "/geodesic.json"));
  EXPECT_EQ(p.dim(), 3);
  EXPECT_EQ(p.size(), 201u);
  const auto poly = io::polytope_from_json(io::read_json_file(std::string(DEGENFLOW_DATA_DIR) + "/p2.json"));
  EXPECT_EQ(poly.dim, 2);
  const auto ring = io::ring_from_json(io::read_json_file(std::string(DEGENFLOW_DATA_DIR) + "/conic.json"));
  EXPECT_EQ(ring.truncation(), 6);
  EXPECT_EQ(ring.generators().size(), 1u);
}
