#include "degenflow/ringfilt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "degenflow/errors.hpp"
#include "degenflow/reps.hpp"

namespace degenflow::ringfilt {
namespace {

constexpr const char* kModule = "ringfilt";
constexpr double kRankTol = 1e-9;
constexpr double kTieTol = 1e-9;

[[noreturn]] void fail(ErrorKind kind, const std::string& msg) { throw Error(kind, kModule, msg); }

double exponent_weight(const Exponent& e, const std::vector<double>& w) {
  double acc = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) acc += e[i] * w[i];
  return acc;
}

// Orthonormal basis of the span of the columns after normalizing each one.
Mat span_of(const Mat& cols) {
  Mat scaled = cols;
  Eigen::Index kept = 0;
  for (Eigen::Index j = 0; j < cols.cols(); ++j) {
    const double n = cols.col(j).norm();
    if (n > 0.0) scaled.col(kept++) = cols.col(j) / n;
  }
  return linalg::orthonormal_basis(scaled.leftCols(kept), kRankTol);
}

Eigen::Index rank_of(const Mat& cols) { return span_of(cols).cols(); }

void check_weights(const GradedRingPresentation& ring, const std::vector<double>& w) {
  if (static_cast<int>(w.size()) != ring.vars()) fail(ErrorKind::ConfigInvalid, "one weight per variable required");
  for (double x : w)
    if (!std::isfinite(x)) fail(ErrorKind::ConfigInvalid, "weights must be finite");
}

void check_degree(const GradedRingPresentation& ring, int k) {
  if (k < 0 || k > ring.truncation()) fail(ErrorKind::DegreeOverflow, "degree exceeds the truncation");
}

// Products of the columns (degree-k1 polynomials) with every monomial of
// degree k - k1, in degree-k coordinates.
Mat multiply_up(const Mat& cols, const MonomialBasis& from, const MonomialBasis& to) {
  const int shift = to.degree - from.degree;
  const auto mons = reps::sym_monomials(from.vars, shift);
  Mat out = Mat::Zero(to.size(), cols.cols() * static_cast<Eigen::Index>(mons.size()));
  Eigen::Index c = 0;
  for (Eigen::Index j = 0; j < cols.cols(); ++j) {
    for (const auto& m : mons) {
      for (Eigen::Index i = 0; i < from.size(); ++i) {
        if (cols(i, j) == cplx(0.0)) continue;
        Exponent e = from.monomials[static_cast<std::size_t>(i)];
        for (std::size_t v = 0; v < e.size(); ++v) e[v] += m[v];
        out(to.index.at(e), c) += cols(i, j);
      }
      ++c;
    }
  }
  return out;
}

}  // namespace

int Polynomial::degree() const {
  if (terms.empty()) return 0;
  return std::accumulate(terms[0].exponent.begin(), terms[0].exponent.end(), 0);
}

Polynomial Polynomial::operator*(const Polynomial& other) const {
  std::map<Exponent, cplx> acc;
  for (const auto& a : terms)
    for (const auto& b : other.terms) {
      Exponent e = a.exponent;
      for (std::size_t i = 0; i < e.size(); ++i) e[i] += b.exponent[i];
      acc[e] += a.coeff * b.coeff;
    }
  Polynomial out;
  for (auto& [e, c] : acc)
    if (c != cplx(0.0)) out.terms.push_back({e, c});
  return out;
}

Polynomial Polynomial::monomial(Exponent e, cplx c) { return {{{std::move(e), c}}}; }

MonomialBasis MonomialBasis::make(int vars, int degree) {
  MonomialBasis b;
  b.vars = vars;
  b.degree = degree;
  b.monomials = reps::sym_monomials(vars, degree);
  for (std::size_t i = 0; i < b.monomials.size(); ++i) b.index[b.monomials[i]] = static_cast<Eigen::Index>(i);
  return b;
}

Vec MonomialBasis::coordinates(const Polynomial& p) const {
  Vec out = Vec::Zero(size());
  for (const auto& t : p.terms) {
    auto it = index.find(t.exponent);
    if (it == index.end()) fail(ErrorKind::ConfigInvalid, "polynomial is not homogeneous of the expected degree");
    out(it->second) += t.coeff;
  }
  return out;
}

Polynomial MonomialBasis::polynomial(const Vec& c, double drop_tol) const {
  Polynomial p;
  for (Eigen::Index i = 0; i < size(); ++i)
    if (std::abs(c(i)) > drop_tol) p.terms.push_back({monomials[static_cast<std::size_t>(i)], c(i)});
  return p;
}

GradedRingPresentation GradedRingPresentation::build(int vars, std::vector<Polynomial> generators, int truncation,
                                                     std::optional<std::vector<int>> hilbert) {
  if (vars < 1) fail(ErrorKind::ConfigInvalid, "ring needs at least one variable");
  if (truncation < 0) fail(ErrorKind::ConfigInvalid, "truncation degree must be nonnegative");
  if (reps::RepDescriptor::sym(truncation).dim(vars) > reps::kDefaultDimCap)
    fail(ErrorKind::DimensionOverflow, "Sym^K is too large");
  for (auto& g : generators) {
    if (g.terms.empty()) fail(ErrorKind::ConfigInvalid, "generator has no terms");
    const int d = g.degree();
    for (const auto& t : g.terms) {
      if (static_cast<int>(t.exponent.size()) != vars) fail(ErrorKind::ConfigInvalid, "exponent length mismatch");
      if (std::any_of(t.exponent.begin(), t.exponent.end(), [](int e) { return e < 0; }))
        fail(ErrorKind::ConfigInvalid, "negative exponent");
      if (std::accumulate(t.exponent.begin(), t.exponent.end(), 0) != d)
        fail(ErrorKind::ConfigInvalid, "generator is not homogeneous");
      if (!std::isfinite(t.coeff.real()) || !std::isfinite(t.coeff.imag()))
        fail(ErrorKind::ConfigInvalid, "non-finite coefficient");
    }
    if (d < 1) fail(ErrorKind::ConfigInvalid, "generators must have positive degree");
  }
  GradedRingPresentation r;
  r.vars_ = vars;
  r.truncation_ = truncation;
  r.generators_ = std::move(generators);
  r.hilbert_ = std::move(hilbert);
  for (int k = 0; k <= truncation; ++k) {
    r.bases_.push_back(MonomialBasis::make(vars, k));
    std::vector<Mat> pieces;
    for (const auto& g : r.generators_) {
      const int d = g.degree();
      if (d > k) continue;
      const auto& from = r.bases_[static_cast<std::size_t>(d)];
      pieces.push_back(multiply_up(from.coordinates(g), from, r.bases_.back()));
    }
    Eigen::Index cols = 0;
    for (const auto& p : pieces) cols += p.cols();
    Mat all(r.bases_.back().size(), cols);
    Eigen::Index at = 0;
    for (const auto& p : pieces) {
      all.middleCols(at, p.cols()) = p;
      at += p.cols();
    }
    r.ideals_.push_back(span_of(all));
  }
  if (r.hilbert_) {
    for (std::size_t k = 0; k < r.hilbert_->size() && static_cast<int>(k) <= truncation; ++k)
      if (r.ring_dim(static_cast<int>(k)) != (*r.hilbert_)[k])
        fail(ErrorKind::ConfigInvalid, "declared Hilbert function disagrees with the ideal in degree " + std::to_string(k));
  }
  return r;
}

const MonomialBasis& GradedRingPresentation::monomials(int k) const {
  check_degree(*this, k);
  return bases_[static_cast<std::size_t>(k)];
}

const Mat& GradedRingPresentation::ideal(int k) const {
  check_degree(*this, k);
  return ideals_[static_cast<std::size_t>(k)];
}

Eigen::Index GradedRingPresentation::ring_dim(int k) const { return monomials(k).size() - ideal(k).cols(); }

WeightEchelon weight_echelon(const GradedRingPresentation& ring, int k, const std::vector<double>& var_weights) {
  check_weights(ring, var_weights);
  const auto& basis = ring.monomials(k);
  WeightEchelon ech;
  for (const auto& m : basis.monomials) ech.monomial_weights.push_back(exponent_weight(m, var_weights));

  std::vector<Eigen::Index> order(static_cast<std::size_t>(basis.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return ech.monomial_weights[static_cast<std::size_t>(a)] > ech.monomial_weights[static_cast<std::size_t>(b)];
  });
  for (Eigen::Index idx : order) {
    const double w = ech.monomial_weights[static_cast<std::size_t>(idx)];
    const double tol = kTieTol * std::max(1.0, std::abs(w));
    if (ech.blocks.empty() || ech.block_weights.back() - w > tol) {
      ech.block_weights.push_back(w);
      ech.blocks.emplace_back();
    }
    ech.blocks.back().push_back(idx);
  }
  for (auto& b : ech.blocks) std::sort(b.begin(), b.end());

  Mat rem = ring.ideal(k);
  for (const auto& block : ech.blocks) {
    const auto bsize = static_cast<Eigen::Index>(block.size());
    Mat restricted(bsize, rem.cols());
    for (Eigen::Index i = 0; i < bsize; ++i) restricted.row(i) = rem.row(block[static_cast<std::size_t>(i)]);
    Eigen::Index rho = 0;
    Mat lead(basis.size(), 0);
    if (rem.cols() > 0) {
      Eigen::JacobiSVD<Mat> svd(restricted, Eigen::ComputeFullV);
      const auto& s = svd.singularValues();
      while (rho < s.size() && s(rho) > kRankTol) ++rho;
      const Mat v = svd.matrixV();
      lead = rem * v.leftCols(rho);
      Mat rest = rem * v.rightCols(rem.cols() - rho);
      for (Eigen::Index idx : block) rest.row(idx).setZero();
      rem = rest;
    }
    // Standard monomials: a well-conditioned complement of the leading block.
    std::vector<Eigen::Index> standard;
    if (rho < bsize) {
      Mat lead_b(bsize, rho);
      for (Eigen::Index i = 0; i < bsize; ++i) lead_b.row(i) = lead.row(block[static_cast<std::size_t>(i)]);
      Mat comp;
      if (rho == 0) {
        comp = Mat::Identity(bsize, bsize);
      } else {
        Eigen::JacobiSVD<Mat> svd(lead_b, Eigen::ComputeFullU);
        comp = svd.matrixU().rightCols(bsize - rho);
      }
      Eigen::ColPivHouseholderQR<Mat> qr(comp.transpose());
      const auto& perm = qr.colsPermutation().indices();
      for (Eigen::Index i = 0; i < bsize - rho; ++i) standard.push_back(block[static_cast<std::size_t>(perm(i))]);
      std::sort(standard.begin(), standard.end());
    }
    ech.leading.push_back(lead);
    ech.standard.push_back(standard);
  }
  return ech;
}

Vec WeightEchelon::normal_form(const Vec& f) const {
  Vec g = f;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const Mat& lead = leading[b];
    if (lead.cols() == 0) continue;
    std::vector<Eigen::Index> pivots;
    for (Eigen::Index idx : blocks[b])
      if (!std::binary_search(standard[b].begin(), standard[b].end(), idx)) pivots.push_back(idx);
    const auto r = static_cast<Eigen::Index>(pivots.size());
    Mat a(r, lead.cols());
    Vec rhs(r);
    for (Eigen::Index i = 0; i < r; ++i) {
      a.row(i) = lead.row(pivots[static_cast<std::size_t>(i)]);
      rhs(i) = g(pivots[static_cast<std::size_t>(i)]);
    }
    g -= lead * a.partialPivLu().solve(rhs);
    for (Eigen::Index idx : pivots) g(idx) = 0.0;
  }
  return g;
}

double WeightEchelon::top_weight(const Vec& f) const {
  const Vec g = normal_form(f);
  const double scale = std::max(1.0, f.cwiseAbs().maxCoeff());
  for (std::size_t b = 0; b < blocks.size(); ++b)
    for (Eigen::Index idx : standard[b])
      if (std::abs(g(idx)) > 1e-9 * scale) return block_weights[b];
  fail(ErrorKind::ZeroSection, "section is zero in the quotient ring");
}

Eigen::Index WeightEchelon::dim_initial() const {
  Eigen::Index acc = 0;
  for (const auto& l : leading) acc += l.cols();
  return acc;
}

linalg::HermitianForm quotient_norm(const linalg::HermitianForm& h, const Mat& ideal, const Mat& complement) {
  h.validate();
  if (ideal.rows() != h.dim() || complement.rows() != h.dim()) fail(ErrorKind::ConfigInvalid, "dimension mismatch");
  Mat g;
  if (ideal.cols() == 0) {
    g = complement.adjoint() * h.gram * complement;
  } else {
    const Mat hq = h.gram * ideal;
    const Mat qhq = ideal.adjoint() * hq;
    Eigen::LLT<Mat> llt(0.5 * (qhq + qhq.adjoint()));
    if (llt.info() != Eigen::Success) fail(ErrorKind::SingularGram, "ideal block is not positive-definite");
    const Mat chq = complement.adjoint() * hq;
    g = complement.adjoint() * h.gram * complement - chq * llt.solve(chq.adjoint());
  }
  linalg::HermitianForm out{0.5 * (g + g.adjoint())};
  out.validate();
  return out;
}

linalg::HermitianForm quotient_norm_map(const linalg::HermitianForm& h, const Mat& m) {
  h.validate();
  if (m.cols() != h.dim()) fail(ErrorKind::ConfigInvalid, "quotient map has the wrong width");
  Eigen::LLT<Mat> llt(h.gram);
  const Mat inner = m * llt.solve(m.adjoint());
  Eigen::LLT<Mat> llt2(0.5 * (inner + inner.adjoint()));
  if (llt2.info() != Eigen::Success) fail(ErrorKind::SingularGram, "quotient map is not surjective");
  const Mat g = llt2.solve(Mat::Identity(m.rows(), m.rows()));
  linalg::HermitianForm out{0.5 * (g + g.adjoint())};
  out.validate();
  return out;
}

linalg::HermitianForm sym_gram(const linalg::HermitianForm& h, int k) {
  h.validate();
  const auto n = static_cast<int>(h.dim());
  const Mat s = reps::induce(reps::RepDescriptor::sym(k), h.cholesky_factor().adjoint());
  const auto mons = reps::sym_monomials(n, k);
  RVec d(static_cast<Eigen::Index>(mons.size()));
  for (std::size_t i = 0; i < mons.size(); ++i) {
    double lf = 0.0;
    for (int e : mons[i]) lf += std::lgamma(e + 1.0);
    d(static_cast<Eigen::Index>(i)) = std::exp(0.5 * lf);
  }
  Mat g = d.asDiagonal() * (s.adjoint() * s) * d.asDiagonal();
  return {0.5 * (g + g.adjoint())};
}

double section_weight(const GradedRingPresentation& ring, const std::vector<double>& var_weights, const Polynomial& s) {
  check_weights(ring, var_weights);
  if (s.terms.empty()) fail(ErrorKind::ZeroSection, "section has no terms");
  const int k = s.degree();
  check_degree(ring, k);
  if (k == 0) return 0.0;
  const auto ech = weight_echelon(ring, k, var_weights);
  return ech.top_weight(ring.monomials(k).coordinates(s));
}

RingFiltrationData ring_filtration(const GradedRingPresentation& ring, const std::vector<double>& var_weights) {
  check_weights(ring, var_weights);
  RingFiltrationData out;
  out.var_weights = var_weights;
  std::vector<WeightEchelon> echs;
  for (int k = 0; k <= ring.truncation(); ++k) {
    echs.push_back(weight_echelon(ring, k, var_weights));
    const auto& ech = echs.back();
    DegreeFiltration df;
    df.degree = k;
    std::vector<std::pair<double, Exponent>> items;
    for (std::size_t b = 0; b < ech.blocks.size(); ++b)
      for (Eigen::Index idx : ech.standard[b])
        items.push_back({k == 0 ? 0.0 : ech.block_weights[b], ring.monomials(k).monomials[static_cast<std::size_t>(idx)]});
    std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [w, e] : items) {
      df.basis.push_back(e);
      df.weights.push_back(w);
      if (df.jumps.empty() || w - df.jumps.back() > kTieTol * std::max(1.0, std::abs(w))) {
        df.jumps.push_back(w);
        df.piece_dims.push_back(0);
      }
      ++df.piece_dims.back();
    }
    // Distance of each jump to the weights of degree-k monomials.
    for (double j : df.jumps) {
      double best = std::numeric_limits<double>::infinity();
      for (double w : ech.monomial_weights) best = std::min(best, std::abs(j - w));
      if (k == 0) best = std::abs(j);
      out.semigroup_defect = std::max(out.semigroup_defect, best);
    }
    out.degrees.push_back(std::move(df));
  }

  // Multiplicativity on basis products and seeded random combinations.
  std::mt19937_64 rng(20240531);
  std::normal_distribution<double> nd;
  constexpr std::size_t kMaxPairs = 400;
  for (int k1 = 1; k1 <= ring.truncation(); ++k1) {
    for (int k2 = k1; k1 + k2 <= ring.truncation(); ++k2) {
      const auto& d1 = out.degrees[static_cast<std::size_t>(k1)];
      const auto& d2 = out.degrees[static_cast<std::size_t>(k2)];
      const auto& target = ring.monomials(k1 + k2);
      const auto& ech = echs[static_cast<std::size_t>(k1 + k2)];
      const std::size_t pairs = d1.basis.size() * d2.basis.size();
      const std::size_t stride = std::max<std::size_t>(1, pairs / kMaxPairs);
      for (std::size_t p = 0; p < pairs; p += stride) {
        const std::size_t a = p / d2.basis.size();
        const std::size_t b = p % d2.basis.size();
        const Polynomial prod = Polynomial::monomial(d1.basis[a]) * Polynomial::monomial(d2.basis[b]);
        const Vec c = target.coordinates(prod);
        if (ech.normal_form(c).cwiseAbs().maxCoeff() <= 1e-9) continue;  // product vanishes in R
        out.multiplicativity_defect =
            std::max(out.multiplicativity_defect, ech.top_weight(c) - d1.weights[a] - d2.weights[b]);
        ++out.products_checked;
      }
      for (int trial = 0; trial < 4; ++trial) {
        Polynomial s1, s2;
        for (const auto& e : d1.basis) s1.terms.push_back({e, cplx(nd(rng), nd(rng))});
        for (const auto& e : d2.basis) s2.terms.push_back({e, cplx(nd(rng), nd(rng))});
        const Vec c = target.coordinates(s1 * s2);
        if (ech.normal_form(c).cwiseAbs().maxCoeff() <= 1e-9) continue;
        const double w1 = d1.weights.back();
        const double w2 = d2.weights.back();
        out.multiplicativity_defect = std::max(out.multiplicativity_defect, ech.top_weight(c) - w1 - w2);
        ++out.products_checked;
      }
    }
  }
  return out;
}

InitialIdealData initial_ideal(const GradedRingPresentation& ring, const std::vector<double>& var_weights) {
  check_weights(ring, var_weights);
  InitialIdealData out;
  for (const auto& g : ring.generators()) {
    double top = -std::numeric_limits<double>::infinity();
    for (const auto& t : g.terms) top = std::max(top, exponent_weight(t.exponent, var_weights));
    Polynomial in;
    for (const auto& t : g.terms)
      if (top - exponent_weight(t.exponent, var_weights) <= kTieTol * std::max(1.0, std::abs(top))) in.terms.push_back(t);
    out.generator_initial_forms.push_back(std::move(in));
  }
  for (int k = 0; k <= ring.truncation(); ++k) {
    const auto ech = weight_echelon(ring, k, var_weights);
    const auto& basis = ring.monomials(k);
    Mat forms(basis.size(), ech.dim_initial());
    Eigen::Index at = 0;
    for (std::size_t b = 0; b < ech.blocks.size(); ++b) {
      for (Eigen::Index j = 0; j < ech.leading[b].cols(); ++j) {
        Vec col = Vec::Zero(basis.size());
        for (Eigen::Index idx : ech.blocks[b]) col(idx) = ech.leading[b](idx, j);
        forms.col(at++) = col;
      }
    }
    out.bases.push_back(span_of(forms));
    const Eigen::Index qdim = basis.size() - out.bases.back().cols();
    out.quotient_dims.push_back(qdim);
    bool flat = qdim == ring.ring_dim(k);
    if (ring.hilbert() && static_cast<std::size_t>(k) < ring.hilbert()->size())
      flat = flat && qdim == (*ring.hilbert())[static_cast<std::size_t>(k)];
    out.flat.push_back(flat);

    std::vector<Mat> pieces;
    if (k > 0) pieces.push_back(multiply_up(out.bases[static_cast<std::size_t>(k - 1)], ring.monomials(k - 1), basis));
    for (const auto& in : out.generator_initial_forms)
      if (in.degree() == k) {
        Mat c(basis.size(), 1);
        c.col(0) = basis.coordinates(in);
        pieces.push_back(c);
      }
    Eigen::Index cols = 0;
    for (const auto& p : pieces) cols += p.cols();
    Mat all(basis.size(), cols);
    at = 0;
    for (const auto& p : pieces) {
      all.middleCols(at, p.cols()) = p;
      at += p.cols();
    }
    out.generated_by_generator_forms.push_back(rank_of(all) == out.bases.back().cols());
  }
  return out;
}

namespace {

// Continued-fraction convergents of x with denominators <= max_den.
std::vector<Rational> convergents(double x, long long max_den) {
  std::vector<Rational> out;
  long long h0 = 1, h1 = 0, k0 = 0, k1 = 1;  // h_{-1}, h_{-2}, k_{-1}, k_{-2}
  double r = x;
  for (int depth = 0; depth < 64; ++depth) {
    const double a_f = std::floor(r);
    if (std::abs(a_f) > 9e15) break;
    const auto a = static_cast<long long>(a_f);
    const long long h = a * h0 + h1;
    const long long k = a * k0 + k1;
    if (k > max_den) break;
    out.push_back({h, k});
    h1 = h0;
    h0 = h;
    k1 = k0;
    k0 = k;
    const double frac = r - a_f;
    if (frac < 1e-15) break;
    r = 1.0 / frac;
  }
  return out;
}

long long lcm_ll(long long a, long long b) { return a / std::gcd(a, b) * b; }

}  // namespace

std::optional<Rational> rationalize(double x, long long max_den, double tol) {
  if (!std::isfinite(x)) return std::nullopt;
  for (const auto& c : convergents(x, max_den))
    if (std::abs(c.value() - x) <= tol * std::max(1.0, std::abs(x))) return c;
  return std::nullopt;
}

ReesData regrade(const GradedRingPresentation& ring, const RingFiltrationData& filt) {
  check_weights(ring, filt.var_weights);
  ReesData out;
  const double wmin = *std::min_element(filt.var_weights.begin(), filt.var_weights.end());
  out.underline_lambda = std::floor(wmin) - 1.0;
  for (double w : filt.var_weights) {
    auto r = rationalize(w - out.underline_lambda);
    if (!r) fail(ErrorKind::IrrationalFiltration, "weight " + std::to_string(w) + " has no small-denominator fraction");
    out.shifted_weights.push_back(*r);
    out.denominator = lcm_ll(out.denominator, r->den);
    if (out.denominator > 1000000) fail(ErrorKind::IrrationalFiltration, "common denominator exceeds 1e6");
  }
  std::vector<long long> int_weights;
  for (const auto& r : out.shifted_weights) int_weights.push_back(r.num * (out.denominator / r.den));
  auto level_of = [&](const Exponent& e) {
    long long acc = 0;
    for (std::size_t i = 0; i < e.size(); ++i) acc += e[i] * int_weights[i];
    return acc;
  };

  std::vector<WeightEchelon> echs;
  for (const auto& df : filt.degrees) {
    echs.push_back(weight_echelon(ring, df.degree, filt.var_weights));
    std::vector<long long> lv;
    for (const auto& e : df.basis) lv.push_back(level_of(e));
    if (df.degree >= 1)
      for (long long l : lv)
        if (l <= 0) out.positive = false;
    out.levels.push_back(std::move(lv));
  }

  // Generators at bidegree (k, j): graded piece modulo products from lower degrees.
  for (std::size_t k = 1; k < filt.degrees.size(); ++k) {
    const auto& df = filt.degrees[k];
    const auto& basis = ring.monomials(static_cast<int>(k));
    std::map<long long, std::vector<std::size_t>> by_level;
    for (std::size_t i = 0; i < df.basis.size(); ++i) by_level[out.levels[k][i]].push_back(i);
    for (const auto& [level, members] : by_level) {
      std::vector<Eigen::Index> rows;
      for (std::size_t i : members) rows.push_back(basis.index.at(df.basis[i]));
      std::vector<Vec> products;
      for (std::size_t k1 = 1; 2 * k1 <= k; ++k1) {
        const std::size_t k2 = k - k1;
        const auto& d1 = filt.degrees[k1];
        const auto& d2 = filt.degrees[k2];
        for (std::size_t a = 0; a < d1.basis.size(); ++a)
          for (std::size_t b = 0; b < d2.basis.size(); ++b) {
            if (out.levels[k1][a] + out.levels[k2][b] != level) continue;
            const Polynomial prod = Polynomial::monomial(d1.basis[a]) * Polynomial::monomial(d2.basis[b]);
            const Vec nf = echs[k].normal_form(basis.coordinates(prod));
            Vec part(static_cast<Eigen::Index>(rows.size()));
            for (std::size_t r = 0; r < rows.size(); ++r) part(static_cast<Eigen::Index>(r)) = nf(rows[r]);
            if (part.norm() > 1e-9) products.push_back(part);
          }
      }
      Mat span(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(products.size()));
      for (std::size_t p = 0; p < products.size(); ++p) span.col(static_cast<Eigen::Index>(p)) = products[p];
      Eigen::Index rank = rank_of(span);
      for (std::size_t r = 0; r < rows.size() && rank < static_cast<Eigen::Index>(rows.size()); ++r) {
        Mat extended(span.rows(), span.cols() + 1);
        extended << span, Vec::Unit(span.rows(), static_cast<Eigen::Index>(r));
        if (rank_of(extended) > rank) {
          span = extended;
          ++rank;
          out.generators.push_back({Polynomial::monomial(df.basis[members[r]]), static_cast<int>(k), level});
        }
      }
    }
  }
  return out;
}

PerturbResult perturb_rational(const GradedRingPresentation& ring, const std::vector<double>& var_weights) {
  check_weights(ring, var_weights);
  // Each generator must have a strict top-weight part.
  std::vector<std::vector<bool>> top_terms;
  for (const auto& g : ring.generators()) {
    std::vector<double> ws;
    for (const auto& t : g.terms) ws.push_back(exponent_weight(t.exponent, var_weights));
    const double top = *std::max_element(ws.begin(), ws.end());
    std::vector<bool> is_top;
    int count = 0;
    for (double w : ws) {
      const bool t = top - w <= kTieTol * std::max(1.0, std::abs(top));
      is_top.push_back(t);
      count += t ? 1 : 0;
    }
    if (count > 1) fail(ErrorKind::TieDetected, "a generator has several monomials of top weight");
    top_terms.push_back(std::move(is_top));
  }

  auto preserves = [&](const std::vector<double>& gamma) {
    for (std::size_t g = 0; g < ring.generators().size(); ++g) {
      const auto& terms = ring.generators()[g].terms;
      double top = 0.0;
      for (std::size_t t = 0; t < terms.size(); ++t)
        if (top_terms[g][t]) top = exponent_weight(terms[t].exponent, gamma);
      for (std::size_t t = 0; t < terms.size(); ++t)
        if (!top_terms[g][t] && exponent_weight(terms[t].exponent, gamma) >= top - kTieTol) return false;
    }
    const auto a = initial_ideal(ring, var_weights);
    const auto b = initial_ideal(ring, gamma);
    for (std::size_t k = 0; k < a.bases.size(); ++k)
      if (a.bases[k].cols() != b.bases[k].cols() ||
          (a.bases[k].cols() > 0 && linalg::subspace_distance(a.bases[k], b.bases[k]) > 1e-8))
        return false;
    return true;
  };

  std::vector<std::vector<Rational>> conv;
  std::size_t max_depth = 0;
  for (double w : var_weights) {
    conv.push_back(convergents(w, 1000000));
    if (conv.back().empty()) fail(ErrorKind::IrrationalFiltration, "weight out of range");
    max_depth = std::max(max_depth, conv.back().size());
  }
  for (std::size_t depth = 0; depth < max_depth; ++depth) {
    PerturbResult out;
    std::vector<double> gamma;
    for (std::size_t i = 0; i < var_weights.size(); ++i) {
      const auto& c = conv[i];
      // Exactly representable weights keep their exact fraction.
      auto exact = rationalize(var_weights[i]);
      const Rational r = exact && exact->den <= c[std::min(depth, c.size() - 1)].den
                             ? *exact
                             : c[std::min(depth, c.size() - 1)];
      out.gamma.push_back(r);
      gamma.push_back(r.value());
      out.distance = std::max(out.distance, std::abs(r.value() - var_weights[i]));
    }
    if (preserves(gamma)) return out;
  }
  fail(ErrorKind::NonConvergent, "no rational weight within the denominator cap keeps the initial ideal");
}

bool stabilizes(const std::vector<double>& values) {
  if (values.size() < 4) return false;
  std::vector<double> run(values.size());
  double s = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < values.size(); ++i) run[i] = s = std::max(s, values[i]);
  const std::size_t q = 3 * (values.size() - 1) / 4;
  return (run.back() - run[q]) / std::abs(run[q]) < 0.05;
}

H2Result h2_check(const std::vector<linalg::HermitianForm>& sym_grams, const Mat& quotient,
                  const std::vector<linalg::HermitianForm>& reference) {
  if (sym_grams.size() != reference.size()) fail(ErrorKind::ConfigInvalid, "Gram paths differ in length");
  H2Result out;
  for (std::size_t i = 0; i < sym_grams.size(); ++i) {
    const auto hs = quotient_norm_map(sym_grams[i], quotient);
    if (reference[i].dim() != hs.dim()) fail(ErrorKind::ConfigInvalid, "reference Gram has the wrong dimension");
    const Mat l = reference[i].cholesky_factor();
    const Mat linv = l.triangularView<Eigen::Lower>().solve(Mat::Identity(l.rows(), l.cols()));
    const Mat pencil = linv * hs.gram * linv.adjoint();
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (pencil + pencil.adjoint()));
    const auto& ev = es.eigenvalues();
    if (!(ev(0) > 0.0)) fail(ErrorKind::SingularGram, "quotient metric is degenerate");
    out.c.push_back(std::max(ev(ev.size() - 1), 1.0 / ev(0)));
    out.sup = std::max(out.sup, out.c.back());
  }
  out.bounded = stabilizes(out.c);
  return out;
}

Mat veronese_quotient(int n, int k) {
  const auto mons = reps::sym_monomials(n + 1, k);
  Mat m = Mat::Zero(n * k + 1, static_cast<Eigen::Index>(mons.size()));
  for (std::size_t i = 0; i < mons.size(); ++i) {
    int deg = 0;
    for (int j = 0; j <= n; ++j) deg += j * mons[i][static_cast<std::size_t>(j)];
    m(deg, static_cast<Eigen::Index>(i)) = 1.0;
  }
  return m;
}

}  // namespace degenflow::ringfilt
