#include <cmath>
#include <sstream>

#include <degenflow/flows.hpp>
#include <degenflow/reps.hpp>
#include <degenflow/ringfilt.hpp>

#include "criteria.hpp"

using namespace degenflow;

namespace acceptance {

namespace {

using ringfilt::Exponent;
using ringfilt::Polynomial;

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(3);
  os << x;
  return os.str();
}

Polynomial binomial(Exponent a, Exponent b) {
  Polynomial p;
  p.terms.push_back({std::move(a), 1.0});
  p.terms.push_back({std::move(b), -1.0});
  return p;
}

struct BruteInitial {
  Eigen::Index ideal_rank = 0;
  Eigen::MatrixXd initial;  // columns span the initial space
};

// Spans I_k by all products m g, then for every weight level c takes the top
// parts of I_k cap (weight <= c). Plain Gaussian elimination, no echelon
// bookkeeping.
BruteInitial brute_initial(const ringfilt::GradedRingPresentation& ring, int k, const std::vector<double>& w) {
  const auto basis = ringfilt::MonomialBasis::make(ring.vars(), k);
  std::vector<Eigen::VectorXd> cols;
  for (const auto& g : ring.generators()) {
    const int d = g.degree();
    if (d > k) continue;
    for (const auto& m : ringfilt::MonomialBasis::make(ring.vars(), k - d).monomials) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(basis.size());
      for (const auto& t : g.terms) {
        Exponent e = t.exponent;
        for (std::size_t i = 0; i < e.size(); ++i) e[i] += m[i];
        v(basis.index.at(e)) += t.coeff.real();
      }
      cols.push_back(v);
    }
  }
  BruteInitial out;
  out.initial = Eigen::MatrixXd::Zero(basis.size(), 0);
  if (cols.empty()) return out;
  Eigen::MatrixXd gens(basis.size(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) gens.col(static_cast<Eigen::Index>(j)) = cols[j];
  Eigen::FullPivLU<Eigen::MatrixXd> lu(gens);
  lu.setThreshold(1e-10);
  out.ideal_rank = lu.rank();
  const Eigen::MatrixXd ideal = lu.image(gens);

  std::vector<double> mw(static_cast<std::size_t>(basis.size()));
  std::vector<double> levels;
  for (Eigen::Index i = 0; i < basis.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * basis.monomials[static_cast<std::size_t>(i)][j];
    mw[static_cast<std::size_t>(i)] = s;
    levels.push_back(s);
  }
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  std::vector<Eigen::VectorXd> tops;
  for (double c : levels) {
    // Coefficient vectors x with (ideal x) vanishing above weight c.
    std::vector<Eigen::Index> above;
    for (Eigen::Index i = 0; i < basis.size(); ++i)
      if (mw[static_cast<std::size_t>(i)] > c) above.push_back(i);
    Eigen::MatrixXd kernel;
    if (above.empty()) {
      kernel = Eigen::MatrixXd::Identity(ideal.cols(), ideal.cols());
    } else {
      Eigen::MatrixXd rows(static_cast<Eigen::Index>(above.size()), ideal.cols());
      for (std::size_t r = 0; r < above.size(); ++r) rows.row(static_cast<Eigen::Index>(r)) = ideal.row(above[r]);
      Eigen::FullPivLU<Eigen::MatrixXd> klu(rows);
      klu.setThreshold(1e-10);
      kernel = klu.kernel();
      if (klu.rank() == rows.cols()) continue;
    }
    const Eigen::MatrixXd elems = ideal * kernel;
    for (Eigen::Index j = 0; j < elems.cols(); ++j) {
      Eigen::VectorXd top = Eigen::VectorXd::Zero(basis.size());
      for (Eigen::Index i = 0; i < basis.size(); ++i)
        if (mw[static_cast<std::size_t>(i)] == c) top(i) = elems(i, j);
      if (top.norm() > 1e-9) tops.push_back(top);
    }
  }
  if (tops.empty()) return out;
  Eigen::MatrixXd all(basis.size(), static_cast<Eigen::Index>(tops.size()));
  for (std::size_t j = 0; j < tops.size(); ++j) all.col(static_cast<Eigen::Index>(j)) = tops[j];
  Eigen::FullPivLU<Eigen::MatrixXd> alu(all);
  alu.setThreshold(1e-10);
  out.initial = alu.image(all);
  return out;
}

// Largest principal-angle sine between two column spans, both orthonormalized.
double span_distance(const Eigen::MatrixXd& a, const Mat& b) {
  return linalg::subspace_distance(linalg::orthonormal_basis(a.cast<cplx>()), linalg::orthonormal_basis(b));
}

struct FlatCheck {
  bool ok = true;
  std::string detail;
};

FlatCheck check_ring(const char* name, const ringfilt::GradedRingPresentation& ring, const std::vector<double>& w,
                     int k_max, const std::function<Eigen::Index(int)>& expected) {
  FlatCheck fc;
  const auto init = ringfilt::initial_ideal(ring, w);
  double worst = 0.0;
  for (int k = 0; k <= k_max; ++k) {
    const auto brute = brute_initial(ring, k, w);
    const auto total = ring.monomials(k).size();
    const auto lib_q = init.quotient_dims[static_cast<std::size_t>(k)];
    const auto brute_q = total - brute.initial.cols();
    const bool flat_brute = brute.initial.cols() == brute.ideal_rank;
    const double dist = brute.initial.cols() == 0 ? 0.0 : span_distance(brute.initial, init.bases[static_cast<std::size_t>(k)]);
    worst = std::max(worst, dist);
    if (lib_q != expected(k) || brute_q != expected(k) || !flat_brute || !init.flat[static_cast<std::size_t>(k)] ||
        dist > 1e-9) {
      fc.ok = false;
      fc.detail += std::string(" ") + name + " k=" + std::to_string(k) + " lib " + std::to_string(lib_q) + " brute " +
                   std::to_string(brute_q) + " expected " + std::to_string(expected(k)) + ";";
    }
  }
  fc.detail = std::string(name) + " exact for k<=" + std::to_string(k_max) + " (span distance " + fmt(worst) + ")" +
              (fc.ok ? "" : ", mismatches:" + fc.detail);
  return fc;
}

}  // namespace

Outcome initial_ideal_flatness() {
  const auto conic = ringfilt::GradedRingPresentation::build(3, {binomial({1, 0, 1}, {0, 2, 0})}, 6);
  const auto cubic = ringfilt::GradedRingPresentation::build(
      4, {binomial({1, 0, 1, 0}, {0, 2, 0, 0}), binomial({1, 0, 0, 1}, {0, 1, 1, 0}), binomial({0, 1, 0, 1}, {0, 0, 2, 0})},
      4);
  const auto a = check_ring("conic", conic, {1, 0, 0}, 6, [](int k) { return Eigen::Index(2 * k + 1); });
  const auto b = check_ring("twisted cubic", cubic, {3, 2, 1, 0}, 4, [](int k) { return Eigen::Index(3 * k + 1); });

  // The conic's initial space is the monomial ideal (xz).
  bool monomial_ok = true;
  const auto init = ringfilt::initial_ideal(conic, {1, 0, 0});
  for (int k = 2; k <= 6; ++k) {
    const auto basis = ringfilt::MonomialBasis::make(3, k);
    std::vector<Eigen::Index> div;
    for (Eigen::Index i = 0; i < basis.size(); ++i)
      if (basis.monomials[static_cast<std::size_t>(i)][0] >= 1 && basis.monomials[static_cast<std::size_t>(i)][2] >= 1)
        div.push_back(i);
    Eigen::MatrixXd xz = Eigen::MatrixXd::Zero(basis.size(), static_cast<Eigen::Index>(div.size()));
    for (std::size_t j = 0; j < div.size(); ++j) xz(div[j], static_cast<Eigen::Index>(j)) = 1.0;
    if (span_distance(xz, init.bases[static_cast<std::size_t>(k)]) > 1e-9) monomial_ok = false;
  }
  return {a.ok && b.ok && monomial_ok,
          a.detail + "; " + b.detail + (monomial_ok ? "; conic initial ideal is (xz)" : "; conic initial ideal is not (xz)")};
}

// H_0 is the round Gram matrix of z^0, z^1, z^2 in H^0(O(2)); the generator
// diag(0, 3, 6) gives z^j in degree k the weight 3j. The norm of z^j in the
// quotient metric of Sym^k is measured relative to its H_0 norm. At T = 40
// the degree-3 Gram entries span e^{1440}, so the pullback is evaluated in
// long double from the functorial identity Sym^k(E H E) = S_E Sym^k(H) S_E.
Outcome pullback_gram_weights() {
  using LMat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  constexpr double kT = 40.0;
  constexpr double kSnap = 0.03;
  const std::vector<double> gen = {0.0, 3.0, 6.0};
  linalg::HermitianForm h0{Mat::Zero(3, 3)};
  for (int j = 0; j < 3; ++j) h0.gram(j, j) = flows::round_gram_entry(1, j - 1);

  double worst = 0.0;
  int sections = 0;
  bool ok = true;
  for (int k = 1; k <= 3; ++k) {
    const Mat g0 = ringfilt::sym_gram(h0, k).gram;
    const Mat m = ringfilt::veronese_quotient(2, k);
    const auto mons = reps::sym_monomials(3, k);
    const Eigen::Index nm = g0.rows();
    LMat s = LMat::Zero(nm, nm);
    for (Eigen::Index i = 0; i < nm; ++i) {
      long double w = 0.0L;
      for (int v = 0; v < 3; ++v) w += gen[static_cast<std::size_t>(v)] * mons[static_cast<std::size_t>(i)][static_cast<std::size_t>(v)];
      s(i, i) = std::exp(static_cast<long double>(kT) * w);
    }
    const LMat g0l = g0.real().cast<long double>();
    const LMat ml = m.real().cast<long double>();
    auto quotient = [&](const LMat& g) -> LMat {
      const LMat ginv = g.ldlt().solve(LMat::Identity(nm, nm));
      const LMat inner = ml * ginv * ml.transpose();
      return inner.ldlt().solve(LMat::Identity(inner.rows(), inner.cols()));
    };
    const LMat q0 = quotient(g0l);
    const LMat qt = quotient(s * g0l * s);
    for (Eigen::Index j = 0; j < q0.rows(); ++j) {
      const long double rate = 0.5L * (std::log(qt(j, j)) - std::log(q0(j, j))) / static_cast<long double>(kT);
      const double err = std::abs(static_cast<double>(rate) - 3.0 * static_cast<double>(j));
      worst = std::max(worst, err);
      ++sections;
      if (!(err < kSnap)) ok = false;
    }
  }

  // Degree 1 fits in double: the library quotient map on the pullback Gram
  // at T must agree.
  const auto ht = flows::pullback_gram_path(h0, linalg::diagonal_generator(gen), {0.0, kT});
  const auto q1 = ringfilt::quotient_norm_map(ht[1], ringfilt::veronese_quotient(2, 1));
  const auto q1_0 = ringfilt::quotient_norm_map(ht[0], ringfilt::veronese_quotient(2, 1));
  double worst_double = 0.0;
  for (Eigen::Index j = 0; j < 3; ++j) {
    const double rate = 0.5 * (std::log(q1.gram(j, j).real()) - std::log(q1_0.gram(j, j).real())) / kT;
    worst_double = std::max(worst_double, std::abs(rate - 3.0 * static_cast<double>(j)));
  }
  ok = ok && worst_double < kSnap;
  return {ok, std::to_string(sections) + " monomial sections in degrees 1..3, max |rate - 3j| " + fmt(worst) +
                  " (snap_tol " + fmt(kSnap) + "); double-precision degree 1 " + fmt(worst_double)};
}

}  // namespace acceptance
