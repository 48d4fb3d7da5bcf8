#pragma once

#include <map>
#include <optional>
#include <vector>

#include "degenflow/linalg.hpp"

namespace degenflow::ringfilt {

using Exponent = std::vector<int>;

struct Term {
  Exponent exponent;
  cplx coeff;
};

/// Homogeneous polynomial as a sparse term list.
struct Polynomial {
  std::vector<Term> terms;

  int degree() const;
  Polynomial operator*(const Polynomial& other) const;
  static Polynomial monomial(Exponent e, cplx c = 1.0);
};

/// Monomial basis of Sym^k in graded-lex order with a reverse index.
struct MonomialBasis {
  int vars = 0;
  int degree = 0;
  std::vector<Exponent> monomials;
  std::map<Exponent, Eigen::Index> index;

  static MonomialBasis make(int vars, int degree);
  Eigen::Index size() const { return static_cast<Eigen::Index>(monomials.size()); }
  Vec coordinates(const Polynomial& p) const;
  Polynomial polynomial(const Vec& c, double drop_tol = 0.0) const;
};

/// C[x_1..x_m]/I truncated at degree K. Coordinates on Sym^k are plain
/// monomial coefficients.
class GradedRingPresentation {
 public:
  static GradedRingPresentation build(int vars, std::vector<Polynomial> generators, int truncation,
                                      std::optional<std::vector<int>> hilbert = std::nullopt);

  int vars() const { return vars_; }
  int truncation() const { return truncation_; }
  const std::vector<Polynomial>& generators() const { return generators_; }
  const std::optional<std::vector<int>>& hilbert() const { return hilbert_; }
  const MonomialBasis& monomials(int k) const;
  /// Orthonormal basis of I_k (columns in monomial coordinates).
  const Mat& ideal(int k) const;
  Eigen::Index ring_dim(int k) const;

 private:
  int vars_ = 0;
  int truncation_ = 0;
  std::vector<Polynomial> generators_;
  std::optional<std::vector<int>> hilbert_;
  std::vector<MonomialBasis> bases_;
  std::vector<Mat> ideals_;
};

/// Weight-echelon form of I_k: monomials grouped into blocks of equal weight
/// (ties within 1e-9), highest first. leading[b] spans the vectors of I_k whose
/// top block is b, restricted to blocks <= b in weight.
struct WeightEchelon {
  std::vector<double> block_weights;                 // descending
  std::vector<std::vector<Eigen::Index>> blocks;     // monomial indices per block
  std::vector<Mat> leading;                          // full coordinates, one set per block
  std::vector<std::vector<Eigen::Index>> standard;   // complement monomials per block
  std::vector<double> monomial_weights;

  /// Normal form: reduces f modulo I_k so that only standard monomials remain.
  Vec normal_form(const Vec& f) const;
  /// Top weight of the normal form; throws ZeroSection if f lies in I_k.
  double top_weight(const Vec& f) const;
  Eigen::Index dim_initial() const;
};

WeightEchelon weight_echelon(const GradedRingPresentation& ring, int k, const std::vector<double>& var_weights);

/// Schur complement: Gram on the classes of the columns of `complement`
/// for the quotient metric of H by span(ideal).
linalg::HermitianForm quotient_norm(const linalg::HermitianForm& h, const Mat& ideal, const Mat& complement);
/// Quotient metric through a surjection M: Sym -> R, (M H^{-1} M^*)^{-1}.
linalg::HermitianForm quotient_norm_map(const linalg::HermitianForm& h, const Mat& m);

/// Gram on Sym^k of the metric induced by H on R_1, plain monomial basis.
linalg::HermitianForm sym_gram(const linalg::HermitianForm& h, int k);

/// Minimal top weight over the coset s + I_k. Degree 0 gives 0.
double section_weight(const GradedRingPresentation& ring, const std::vector<double>& var_weights, const Polynomial& s);

struct DegreeFiltration {
  int degree = 0;
  std::vector<Exponent> basis;   // standard monomials, an adapted basis of R_k
  std::vector<double> weights;   // d of each basis element
  std::vector<double> jumps;     // distinct weights ascending
  std::vector<Eigen::Index> piece_dims;
};

struct RingFiltrationData {
  std::vector<double> var_weights;
  std::vector<DegreeFiltration> degrees;  // k = 0..K
  double multiplicativity_defect = 0.0;   // max d(s1 s2) - d(s1) - d(s2) over sampled products
  double semigroup_defect = 0.0;          // max distance of a jump to the weight semigroup
  std::size_t products_checked = 0;
};

RingFiltrationData ring_filtration(const GradedRingPresentation& ring, const std::vector<double>& var_weights);

struct InitialIdealData {
  std::vector<Mat> bases;                 // orthonormal basis of the initial space per degree
  std::vector<Eigen::Index> quotient_dims;
  std::vector<bool> flat;
  /// False in degree k when the initial forms of the generators together with
  /// lower-degree initial spaces do not span the degree-k initial space.
  std::vector<bool> generated_by_generator_forms;
  std::vector<Polynomial> generator_initial_forms;
};

InitialIdealData initial_ideal(const GradedRingPresentation& ring, const std::vector<double>& var_weights);

struct Rational {
  long long num = 0;
  long long den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

/// Continued-fraction reconstruction with denominator <= max_den; nullopt when
/// no convergent is within tol.
std::optional<Rational> rationalize(double x, long long max_den = 1000000, double tol = 1e-9);

struct ReesGenerator {
  Polynomial element;
  int degree = 0;
  long long level = 0;
};

struct ReesData {
  double underline_lambda = 0.0;
  long long denominator = 1;
  std::vector<Rational> shifted_weights;
  std::vector<std::vector<long long>> levels;   // per degree, per basis element
  std::vector<ReesGenerator> generators;
  bool positive = true;                         // F'_0 R_k = 0 for k >= 1
};

ReesData regrade(const GradedRingPresentation& ring, const RingFiltrationData& filt);

struct PerturbResult {
  std::vector<Rational> gamma;
  double distance = 0.0;     // sup-norm distance to the input weights
  bool same_initial_ideal = true;
};

PerturbResult perturb_rational(const GradedRingPresentation& ring, const std::vector<double>& var_weights);

struct H2Result {
  std::vector<double> c;     // C_k(t) per sample
  double sup = 0.0;
  bool bounded = false;
};

/// C_k(t) = max(lambda_max, 1 / lambda_min) of the pencil of H_t^* against the
/// reference Grams on R_k. quotient is a surjection Sym^k R_1 -> R_k.
H2Result h2_check(const std::vector<linalg::HermitianForm>& sym_grams, const Mat& quotient,
                  const std::vector<linalg::HermitianForm>& reference);

/// Last-quartile increase of the running sup below 5%.
bool stabilizes(const std::vector<double>& values);

/// Multiplication map Sym^k C^{n+1} -> C^{nk+1}, x_j -> z^j.
Mat veronese_quotient(int n, int k);

}  // namespace degenflow::ringfilt
