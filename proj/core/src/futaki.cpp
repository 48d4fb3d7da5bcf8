#include "degenflow/futaki.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "degenflow/errors.hpp"

namespace degenflow::futaki {
namespace {

constexpr const char* kModule = "futaki";

[[noreturn]] void fail(ErrorKind kind, const std::string& msg) { throw Error(kind, kModule, msg); }

// Linear functional returning the constant term of a least-squares fit of
// z(k) = y(k) / k^p by a polynomial in u = k_hi / k.
struct LimitFit {
  int lo = 0;
  int hi = 0;
  int p = 0;
  RMat basis;
  RVec row;

  LimitFit(int lo_, int hi_, int p_, int terms) : lo(lo_), hi(hi_), p(p_) {
    const int points = hi - lo + 1;
    terms = std::min(terms, points);
    basis.resize(points, terms);
    for (int i = 0; i < points; ++i) {
      const double u = static_cast<double>(hi) / (lo + i);
      double pw = 1.0;
      for (int j = 0; j < terms; ++j) {
        basis(i, j) = pw;
        pw *= u;
      }
    }
    const RMat pinv = basis.colPivHouseholderQr().solve(RMat::Identity(points, points));
    row = pinv.row(0).transpose();
  }

  RVec normalized(const std::vector<double>& y) const {
    RVec z(hi - lo + 1);
    for (int k = lo; k <= hi; ++k) z(k - lo) = y[static_cast<std::size_t>(k)] / std::pow(static_cast<double>(k), p);
    return z;
  }

  double value(const std::vector<double>& y) const { return row.dot(normalized(y)); }

  double residual(const std::vector<double>& y) const {
    const RVec z = normalized(y);
    const RVec c = basis.colPivHouseholderQr().solve(z);
    const double scale = std::max(z.cwiseAbs().maxCoeff(), 1e-300);
    return (basis * c - z).cwiseAbs().maxCoeff() / scale;
  }
};

int fit_terms(int n) { return n + 5; }

struct Window {
  int lo = 0;
  int hi = 0;
};

Window window_for(int kmax, int n) {
  if (kmax < n + 3) fail(ErrorKind::ConfigInvalid, "kmax must be at least n + 3");
  return {std::max(2, kmax / 2), kmax};
}

bool unstable(double a, double b, double floor) {
  const double d = std::abs(a - b);
  return d > 1e-3 * std::max(std::abs(a), std::abs(b)) && d > floor;
}

Extrapolation extrapolate(const std::vector<double>& y, const std::vector<double>& scale_data, int kmax, int n, int p,
                          const char* what) {
  const Window w = window_for(kmax, n);
  const LimitFit main(w.lo, w.hi, p, fit_terms(n));
  const LimitFit shifted(w.lo - 1, w.hi - 1, p, fit_terms(n));
  const LimitFit dropped(w.lo + 1, w.hi, p, fit_terms(n));
  Extrapolation e;
  e.value = main.value(y);
  e.shifted = shifted.value(y);
  e.dropped = dropped.value(y);
  e.residual = main.residual(y);
  e.k_lo = w.lo;
  e.k_hi = w.hi;
  const RVec z = main.normalized(y);
  e.per_k.assign(z.data(), z.data() + z.size());
  const double floor = 1e-9 * std::max(1.0, std::abs(main.value(scale_data)));
  if (unstable(e.value, e.shifted, floor))
    fail(ErrorKind::UnstableExtrapolation, std::string(what) + " changes under a one-step window shift");
  return e;
}

// Degree-k sums S0 = sum e, S1 = sum w e, S2 = sum w w^T e with e = exp(<w, v>/k).
struct Moments {
  long double s0 = 0.0L;
  std::vector<long double> s1;
  std::vector<long double> s2;
};

Moments moments(const RMat& w, const RVec& v, int k, bool second) {
  const auto r = static_cast<std::size_t>(w.cols());
  Moments m;
  m.s1.assign(r, 0.0L);
  if (second) m.s2.assign(r * r, 0.0L);
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    const long double e = std::exp(static_cast<long double>(w.row(i).dot(v)) / k);
    m.s0 += e;
    for (std::size_t a = 0; a < r; ++a) {
      const long double wa = w(i, static_cast<Eigen::Index>(a)) * e;
      m.s1[a] += wa;
      if (second)
        for (std::size_t b = 0; b < r; ++b) m.s2[a * r + b] += wa * w(i, static_cast<Eigen::Index>(b));
    }
  }
  return m;
}

void check_vector(const TorusWeightTable& t, const RVec& v) {
  if (v.size() != t.rank) fail(ErrorKind::ConfigInvalid, "vector length differs from the torus rank");
  if (!v.allFinite()) fail(ErrorKind::ConfigInvalid, "vector has non-finite entries");
}

}  // namespace

Eigen::Index TorusWeightTable::count(int k) const { return weights(k).rows(); }

const RMat& TorusWeightTable::weights(int k) const {
  if (k < 1 || k > kmax()) fail(ErrorKind::DegreeOverflow, "degree outside the weight table");
  return degrees[static_cast<std::size_t>(k - 1)];
}

void TorusWeightTable::validate() {
  if (n < 1 || rank < 1) fail(ErrorKind::ConfigInvalid, "table needs positive dimension and rank");
  for (const auto& d : degrees) {
    if (d.cols() != rank) fail(ErrorKind::ConfigInvalid, "weight vector length differs from the rank");
    if (!d.allFinite()) fail(ErrorKind::ConfigInvalid, "non-finite weight");
  }
  // N(0) = 1 is implied; degree-n polynomial through k = 0..kmax.
  std::vector<long long> counts{1};
  for (const auto& d : degrees) counts.push_back(d.rows());
  ehrhart_exact = counts.size() > static_cast<std::size_t>(n + 1);
  std::vector<long long> diff = counts;
  for (int order = 0; order <= n; ++order) {
    for (std::size_t i = 0; i + 1 < diff.size(); ++i) diff[i] = diff[i + 1] - diff[i];
    if (!diff.empty()) diff.pop_back();
  }
  for (long long x : diff)
    if (x != 0) ehrhart_exact = false;
  const int lo = std::max(1, kmax() / 2);
  hilbert_fit_residual = 0.0;
  if (kmax() - lo + 1 > n + 1) {
    RMat a(kmax() - lo + 1, n + 1);
    RVec y(kmax() - lo + 1);
    for (int k = lo; k <= kmax(); ++k) {
      for (int j = 0; j <= n; ++j) a(k - lo, j) = std::pow(static_cast<double>(k) / kmax(), j);
      y(k - lo) = static_cast<double>(counts[static_cast<std::size_t>(k)]);
    }
    const RVec c = a.colPivHouseholderQr().solve(y);
    hilbert_fit_residual = (a * c - y).cwiseAbs().maxCoeff() / y.cwiseAbs().maxCoeff();
  }
}

HalfSpaces facets(const PolytopeData& p) {
  const int n = p.dim;
  const Eigen::Index m = p.vertices.rows();
  if (n < 1 || p.vertices.cols() != n) fail(ErrorKind::ConfigInvalid, "vertex coordinates do not match the dimension");
  if (!p.vertices.allFinite()) fail(ErrorKind::ConfigInvalid, "non-finite vertex");
  if (m < n + 1) fail(ErrorKind::NotFullDimensional, "too few vertices");
  RMat diffs(m - 1, n);
  for (Eigen::Index i = 1; i < m; ++i) diffs.row(i - 1) = p.vertices.row(i) - p.vertices.row(0);
  Eigen::ColPivHouseholderQR<RMat> qr(diffs);
  qr.setThreshold(1e-12);
  if (qr.rank() < n) fail(ErrorKind::NotFullDimensional, "vertices span a proper affine subspace");

  std::vector<std::pair<RVec, double>> out;
  std::vector<Eigen::Index> pick(static_cast<std::size_t>(n));
  std::iota(pick.begin(), pick.end(), 0);
  const double tol = 1e-9 * std::max(1.0, p.vertices.cwiseAbs().maxCoeff());
  for (;;) {
    RMat d(n - 1, n);
    for (int i = 1; i < n; ++i) d.row(i - 1) = p.vertices.row(pick[static_cast<std::size_t>(i)]) - p.vertices.row(pick[0]);
    RVec normal;
    if (n == 1) {
      normal = RVec::Ones(1);
    } else {
      Eigen::FullPivLU<RMat> lu(d);
      const RMat ker = lu.kernel();
      if (lu.rank() == n - 1 && ker.cols() == 1) normal = ker.col(0).normalized();
    }
    if (normal.size() == n) {
      const double b = normal.dot(p.vertices.row(pick[0]).transpose());
      const RVec vals = p.vertices * normal;
      const bool below = (vals.array() <= b + tol).all();
      const bool above = (vals.array() >= b - tol).all();
      if (below || above) {
        const RVec a = below ? normal : RVec(-normal);
        const double bb = below ? b : -b;
        bool dup = false;
        for (const auto& [a2, b2] : out)
          if ((a2 - a).cwiseAbs().maxCoeff() < 1e-9 && std::abs(b2 - bb) < tol) dup = true;
        if (!dup) out.emplace_back(a, bb);
      }
    }
    int i = n - 1;
    while (i >= 0 && pick[static_cast<std::size_t>(i)] == m - n + i) --i;
    if (i < 0) break;
    ++pick[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < n; ++j) pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
  }
  HalfSpaces h;
  h.a.resize(static_cast<Eigen::Index>(out.size()), n);
  h.b.resize(static_cast<Eigen::Index>(out.size()));
  for (std::size_t i = 0; i < out.size(); ++i) {
    h.a.row(static_cast<Eigen::Index>(i)) = out[i].first.transpose();
    h.b(static_cast<Eigen::Index>(i)) = out[i].second;
  }
  return h;
}

namespace {

RMat lattice_points_in(const HalfSpaces& h, const PolytopeData& p, int k) {
  const int n = p.dim;
  std::vector<long long> lo(static_cast<std::size_t>(n)), hi(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    lo[static_cast<std::size_t>(j)] = static_cast<long long>(std::ceil(k * p.vertices.col(j).minCoeff() - 1e-9));
    hi[static_cast<std::size_t>(j)] = static_cast<long long>(std::floor(k * p.vertices.col(j).maxCoeff() + 1e-9));
  }
  std::vector<RVec> pts;
  std::vector<long long> x = lo;
  RVec xv(n);
  for (;;) {
    for (int j = 0; j < n; ++j) xv(j) = static_cast<double>(x[static_cast<std::size_t>(j)]);
    const RVec vals = h.a * xv;
    bool inside = true;
    for (Eigen::Index f = 0; f < vals.size() && inside; ++f)
      inside = vals(f) <= k * h.b(f) + 1e-9 * (1.0 + std::abs(k * h.b(f)));
    if (inside) pts.push_back(xv);
    int j = n - 1;
    while (j >= 0 && x[static_cast<std::size_t>(j)] == hi[static_cast<std::size_t>(j)]) {
      x[static_cast<std::size_t>(j)] = lo[static_cast<std::size_t>(j)];
      --j;
    }
    if (j < 0) break;
    ++x[static_cast<std::size_t>(j)];
  }
  RMat out(static_cast<Eigen::Index>(pts.size()), n);
  for (std::size_t i = 0; i < pts.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = pts[i].transpose();
  return out;
}

}  // namespace

RMat lattice_points(const PolytopeData& p, int k) {
  if (k < 0) fail(ErrorKind::ConfigInvalid, "negative dilation");
  return lattice_points_in(facets(p), p, k);
}

TorusWeightTable weights_from_polytope(const PolytopeData& p) {
  if (p.kmax < 1) fail(ErrorKind::ConfigInvalid, "kmax must be positive");
  const HalfSpaces h = facets(p);
  TorusWeightTable t;
  t.n = p.dim;
  t.rank = p.dim;
  for (int k = 1; k <= p.kmax; ++k) t.degrees.push_back(lattice_points_in(h, p, k));
  t.validate();
  return t;
}

double polytope_volume(const PolytopeData& p) {
  const HalfSpaces h = facets(p);
  if (p.dim == 1) return p.vertices.maxCoeff() - p.vertices.minCoeff();
  if (p.dim == 2) {
    // Shoelace over vertices sorted by angle around the centroid.
    const RVec c = p.vertices.colwise().mean().transpose();
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(p.vertices.rows()));
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
      return std::atan2(p.vertices(a, 1) - c(1), p.vertices(a, 0) - c(0)) <
             std::atan2(p.vertices(b, 1) - c(1), p.vertices(b, 0) - c(0));
    });
    double acc = 0.0;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const auto a = idx[i];
      const auto b = idx[(i + 1) % idx.size()];
      acc += p.vertices(a, 0) * p.vertices(b, 1) - p.vertices(b, 0) * p.vertices(a, 1);
    }
    return 0.5 * std::abs(acc);
  }
  // Higher dimension: leading coefficient of the lattice-point count.
  PolytopeData q = p;
  const int kmax = std::max(p.kmax, 3 * p.dim + 6);
  std::vector<double> y{1.0};
  for (int k = 1; k <= kmax; ++k) y.push_back(static_cast<double>(lattice_points_in(h, q, k).rows()));
  const LimitFit fit(kmax / 2, kmax, p.dim, p.dim + 1);
  return fit.value(y);
}

double trace_exp(const TorusWeightTable& t, const RVec& v, int k) {
  check_vector(t, v);
  const RMat& w = t.weights(k);
  long double acc = 0.0L;
  for (Eigen::Index i = 0; i < w.rows(); ++i) acc += std::exp(static_cast<long double>(w.row(i).dot(v)));
  return static_cast<double>(acc);
}

Extrapolation futaki_limit(const TorusWeightTable& t, const RVec& v, const RVec& v_prime) {
  check_vector(t, v);
  check_vector(t, v_prime);
  std::vector<double> y(static_cast<std::size_t>(t.kmax() + 1), 0.0);
  std::vector<double> scale(y.size(), 0.0);
  for (int k = 1; k <= t.kmax(); ++k) {
    const RMat& w = t.weights(k);
    long double acc = 0.0L;
    long double mag = 0.0L;
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      const long double e = std::exp(static_cast<long double>(w.row(i).dot(v)) / k);
      const long double d = w.row(i).dot(v_prime);
      acc += d * e;
      mag += std::abs(d) * e;
    }
    y[static_cast<std::size_t>(k)] = static_cast<double>(acc);
    scale[static_cast<std::size_t>(k)] = static_cast<double>(mag);
  }
  Extrapolation e = extrapolate(y, scale, t.kmax(), t.n, t.n + 1, "Futaki limit");
  e.value = -e.value;
  e.shifted = -e.shifted;
  e.dropped = -e.dropped;
  return e;
}

namespace {

struct Derivatives {
  double objective = 0.0;
  RVec gradient;  // = -Fut_V(e_i)
  RMat hessian;
};

Derivatives derivatives(const TorusWeightTable& t, const RVec& v, bool second) {
  const Window w = window_for(t.kmax(), t.n);
  const auto r = static_cast<std::size_t>(t.rank);
  std::vector<double> y0(static_cast<std::size_t>(t.kmax() + 1), 0.0);
  std::vector<std::vector<double>> y1(r, y0);
  std::vector<std::vector<double>> y2(second ? r * r : 0, y0);
  for (int k = w.lo; k <= w.hi; ++k) {
    const Moments m = moments(t.weights(k), v, k, second);
    y0[static_cast<std::size_t>(k)] = static_cast<double>(m.s0);
    for (std::size_t a = 0; a < r; ++a) {
      y1[a][static_cast<std::size_t>(k)] = static_cast<double>(m.s1[a]);
      if (second)
        for (std::size_t b = 0; b < r; ++b) y2[a * r + b][static_cast<std::size_t>(k)] = static_cast<double>(m.s2[a * r + b]);
    }
  }
  // Normalizing each sum by its own power of k keeps the fitted functionals
  // exact derivatives of one another.
  const LimitFit f0(w.lo, w.hi, t.n, fit_terms(t.n));
  const LimitFit f1(w.lo, w.hi, t.n + 1, fit_terms(t.n));
  const LimitFit f2(w.lo, w.hi, t.n + 2, fit_terms(t.n));
  Derivatives d;
  d.objective = f0.value(y0);
  d.gradient.resize(t.rank);
  for (std::size_t a = 0; a < r; ++a) d.gradient(static_cast<Eigen::Index>(a)) = f1.value(y1[a]);
  if (second) {
    d.hessian.resize(t.rank, t.rank);
    for (std::size_t a = 0; a < r; ++a)
      for (std::size_t b = 0; b < r; ++b)
        d.hessian(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = f2.value(y2[a * r + b]);
    d.hessian = 0.5 * (d.hessian + d.hessian.transpose()).eval();
  }
  return d;
}

}  // namespace

double soliton_objective(const TorusWeightTable& t, const RVec& v) {
  check_vector(t, v);
  return derivatives(t, v, false).objective;
}

SolitonResult soliton_vector(const TorusWeightTable& t, const SolitonOptions& opts) {
  SolitonResult res;
  res.v = RVec::Zero(t.rank);
  Derivatives d = derivatives(t, res.v, true);
  for (int it = 0;; ++it) {
    res.residual = d.gradient.cwiseAbs().maxCoeff();
    res.residual_history.push_back(res.residual);
    res.objective_history.push_back(d.objective);
    Eigen::SelfAdjointEigenSolver<RMat> es(d.hessian);
    res.min_hessian_eigenvalue.push_back(es.eigenvalues()(0));
    if (!(es.eigenvalues()(0) > 0.0)) fail(ErrorKind::NonConvexHessian, "Hessian proxy is not positive-definite");
    if (res.residual < opts.tol) {
      res.iterations = it;
      return res;
    }
    if (it >= opts.max_iter) fail(ErrorKind::NoConvergence, "Newton iteration did not converge");
    const RVec step = -es.eigenvectors() * (es.eigenvalues().cwiseInverse().asDiagonal() *
                                            (es.eigenvectors().transpose() * d.gradient));
    const double slope = d.gradient.dot(step);
    double s = 1.0;
    Derivatives next;
    for (int back = 0;; ++back) {
      next = derivatives(t, res.v + s * step, true);
      if (next.objective <= d.objective + 1e-4 * s * slope ||
          next.objective <= d.objective + 1e-14 * std::abs(d.objective))
        break;
      if (back >= 60) fail(ErrorKind::NoConvergence, "line search failed");
      s *= 0.5;
    }
    res.v += s * step;
    d = std::move(next);
  }
}

double soliton_bisection(const TorusWeightTable& t, const RVec& direction, double bound, double tol) {
  check_vector(t, direction);
  auto g = [&](double s) { return derivatives(t, s * direction, false).gradient.dot(direction); };
  double a = -bound;
  double b = bound;
  double ga = g(a);
  const double gb = g(b);
  if (ga * gb > 0.0) fail(ErrorKind::NoConvergence, "bisection bracket does not contain a root");
  while (b - a > tol) {
    const double m = 0.5 * (a + b);
    const double gm = g(m);
    if ((gm < 0.0) == (ga < 0.0)) {
      a = m;
      ga = gm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

FutakiReport df_and_n2(int n, const std::vector<RVec>& gen) {
  if (n < 1) fail(ErrorKind::ConfigInvalid, "fibre dimension must be positive");
  const int kmax = static_cast<int>(gen.size());
  FutakiReport rep;
  std::vector<double> tr{0.0}, sq{0.0}, count{1.0}, mag{0.0};
  for (const RVec& a : gen) {
    if (a.size() == 0 || !a.allFinite()) fail(ErrorKind::ConfigInvalid, "generator weights missing or non-finite");
    long double s = 0.0L, q = 0.0L, m = 0.0L;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      s += a(i);
      q += static_cast<long double>(a(i)) * a(i);
      m += std::abs(a(i));
    }
    rep.trace.push_back(static_cast<double>(s));
    rep.trace_sq.push_back(static_cast<double>(q));
    tr.push_back(static_cast<double>(s));
    sq.push_back(static_cast<double>(q));
    count.push_back(static_cast<double>(a.size()));
    mag.push_back(static_cast<double>(m));
  }
  rep.fut_fit = extrapolate(tr, mag, kmax, n, n + 1, "Futaki invariant");
  rep.fut_fit.value = -rep.fut_fit.value;
  rep.fut_fit.shifted = -rep.fut_fit.shifted;
  rep.fut_fit.dropped = -rep.fut_fit.dropped;
  rep.fut = rep.fut_fit.value;
  // lim k^{-n-2} (Tr A^2 - (Tr A)^2 / N) from the three polynomial limits.
  rep.n2_fit = extrapolate(sq, sq, kmax, n, n + 2, "second moment");
  const Extrapolation vol = extrapolate(count, count, kmax, n, n, "Hilbert polynomial");
  if (!(vol.value > 0.0)) fail(ErrorKind::UnstableExtrapolation, "Hilbert polynomial has no positive leading term");
  const double t0 = -rep.fut;
  const double n2sq = rep.n2_fit.value - t0 * t0 / vol.value;
  rep.n2_fit.value = n2sq;
  rep.n2_fit.shifted -= rep.fut_fit.shifted * rep.fut_fit.shifted / vol.shifted;
  rep.n2_fit.dropped -= rep.fut_fit.dropped * rep.fut_fit.dropped / vol.dropped;
  const double floor = 1e-12 * std::max(1.0, std::abs(rep.n2_fit.value + t0 * t0 / vol.value));
  rep.n2 = n2sq > floor ? std::sqrt(n2sq) : 0.0;
  if (rep.n2 > 0.0) rep.ratio = rep.fut / rep.n2;
  return rep;
}

}  // namespace degenflow::futaki
