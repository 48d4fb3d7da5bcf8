#pragma once

#include <string>
#include <vector>

#include "degenflow/linalg.hpp"

namespace degenflow::reps {

inline constexpr Eigen::Index kDefaultDimCap = 20000;

/// Functorial construction applied to the standard representation E.
struct RepDescriptor {
  enum class Shape { Standard, Dual, Sym, Ext, Tensor };

  Shape shape = Shape::Standard;
  int param = 0;  // k for sym, p for ext
  std::vector<RepDescriptor> factors;

  static RepDescriptor standard() { return {}; }
  static RepDescriptor dual() { return {Shape::Dual, 0, {}}; }
  static RepDescriptor sym(int k) { return {Shape::Sym, k, {}}; }
  static RepDescriptor ext(int p) { return {Shape::Ext, p, {}}; }
  static RepDescriptor tensor(std::vector<RepDescriptor> fs) { return {Shape::Tensor, 0, std::move(fs)}; }

  /// "std", "dual", "sym:k", "ext:p", "tensor(a,b,...)". Throws InputParseError.
  static RepDescriptor parse(const std::string& text);
  std::string to_string() const;

  /// dim V for dim E = n; saturates at cap + 1 instead of overflowing.
  Eigen::Index dim(Eigen::Index n, Eigen::Index cap = kDefaultDimCap) const;
  /// Throws ConfigInvalid for out-of-range parameters and DimensionOverflow
  /// when dim V exceeds the cap.
  void validate(Eigen::Index n, Eigen::Index cap = kDefaultDimCap) const;
};

/// Degree-k exponent vectors in graded-lex order (x_1^k first).
std::vector<std::vector<int>> sym_monomials(int n, int k);
/// p-subsets of {0..n-1} in lexicographic order.
std::vector<std::vector<int>> ext_subsets(int n, int p);

/// Induced group action. Sym uses the orthonormal basis x^a / sqrt(a!), ext
/// the wedge basis e_I, dual the dual basis (A^{-T}), tensor the Kronecker
/// product with the first factor outermost.
Mat induce(const RepDescriptor& desc, const Mat& a, Eigen::Index cap = kDefaultDimCap);
/// Induced Lie algebra action (derivative of induce at the identity).
Mat induce_lie(const RepDescriptor& desc, const Mat& x, Eigen::Index cap = kDefaultDimCap);

/// Weight of each basis vector of V when E carries a basis with weights mu.
std::vector<double> basis_weights(const RepDescriptor& desc, const std::vector<double>& mu);

struct WeightDecomposition {
  std::vector<double> weights;  // descending
  std::vector<Mat> subspaces;   // orthonormal bases
  std::vector<int> multiplicities;

  Eigen::Index dim() const;
  /// Index of the level equal to `w` within tol, or -1.
  int level_of(double w, double tol) const;
};

WeightDecomposition induced_weights(const linalg::HermitianGenerator& lambda, const RepDescriptor& desc,
                                    double cluster_tol = 1e-9, Eigen::Index cap = kDefaultDimCap);

struct PluckerVector {
  RepDescriptor rep;
  Vec coordinates;
};

/// Wedge of the columns of `span` in lexicographic subset coordinates.
/// Throws DegenerateSpan when the columns are dependent.
PluckerVector plucker(const Mat& span);

/// Largest violation of the quadratic Plucker relations after scaling the
/// vector to unit norm.
double plucker_residual(const Vec& coordinates, int n, int p);

}  // namespace degenflow::reps
