#include "degenflow/flows.hpp"

#include <cmath>
#include <random>

#include <boost/math/interpolators/cardinal_quintic_b_spline.hpp>

#include "degenflow/errors.hpp"
#include "degenflow/parallel.hpp"
#include "degenflow/reps.hpp"
#include "degenflow/ringfilt.hpp"

namespace degenflow::flows {
namespace {

constexpr const char* kModule = "flows";

[[noreturn]] void fail(ErrorKind kind, const std::string& msg) { throw Error(kind, kModule, msg); }

// Fornberg weights for the m-th derivative at z from nodes x.
std::vector<double> fd_weights(double z, const std::vector<double>& x, int m) {
  const int n = static_cast<int>(x.size()) - 1;
  std::vector<std::vector<double>> c(static_cast<std::size_t>(n + 1), std::vector<double>(static_cast<std::size_t>(m + 1), 0.0));
  double c1 = 1.0;
  double c4 = x[0] - z;
  c[0][0] = 1.0;
  for (int i = 1; i <= n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[static_cast<std::size_t>(i)] - z;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(j)];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          c[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] =
              c1 * (k * c[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(k - 1)] -
                    c5 * c[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(k)]) / c2;
        c[static_cast<std::size_t>(i)][0] = -c1 * c5 * c[static_cast<std::size_t>(i - 1)][0] / c2;
      }
      for (int k = mn; k >= 1; --k)
        c[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] =
            (c4 * c[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] -
             k * c[static_cast<std::size_t>(j)][static_cast<std::size_t>(k - 1)]) / c3;
      c[static_cast<std::size_t>(j)][0] = c4 * c[static_cast<std::size_t>(j)][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> out;
  for (int i = 0; i <= n; ++i) out.push_back(c[static_cast<std::size_t>(i)][static_cast<std::size_t>(m)]);
  return out;
}

// High-order (7-point) derivative on a uniform grid.
RVec derivative(const RVec& f, const RVec& x, int m) {
  const Eigen::Index n = f.size();
  constexpr Eigen::Index width = 7;
  RVec out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index lo = std::clamp<Eigen::Index>(i - width / 2, 0, n - width);
    std::vector<double> nodes;
    for (Eigen::Index k = 0; k < width; ++k) nodes.push_back(x(lo + k));
    const auto w = fd_weights(x(i), nodes, m);
    double acc = 0.0;
    for (Eigen::Index k = 0; k < width; ++k) acc += w[static_cast<std::size_t>(k)] * f(lo + k);
    out(i) = acc;
  }
  return out;
}

// Composite Simpson on a uniform grid, with a 3/8 panel when the interval
// count is odd.
double integrate_grid(const RVec& f, double h) {
  const Eigen::Index intervals = f.size() - 1;
  Eigen::Index simpson_end = intervals % 2 == 0 ? intervals : intervals - 3;
  double acc = 0.0;
  for (Eigen::Index i = 0; i + 2 <= simpson_end; i += 2) acc += h / 3.0 * (f(i) + 4.0 * f(i + 1) + f(i + 2));
  if (simpson_end != intervals) {
    const Eigen::Index i = simpson_end;
    acc += 3.0 * h / 8.0 * (f(i) + 3.0 * f(i + 1) + 3.0 * f(i + 2) + f(i + 3));
  }
  return acc;
}

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussRule gauss_legendre(int n) {
  GaussRule rule{std::vector<double>(static_cast<std::size_t>(n)), std::vector<double>(static_cast<std::size_t>(n))};
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0;
      double p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    rule.nodes[static_cast<std::size_t>(i)] = -z;
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = z;
    const double w = 2.0 / ((1.0 - z * z) * pp * pp);
    rule.weights[static_cast<std::size_t>(i)] = w;
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  return rule;
}

const GaussRule& cached_rule(int n) {
  static const GaussRule r256 = gauss_legendre(256);
  static const GaussRule r512 = gauss_legendre(512);
  return n == 256 ? r256 : r512;
}

}  // namespace

void SynthPathConfig::validate() const {
  if (lambda.dim() < 1) fail(ErrorKind::ConfigInvalid, "planted generator is empty");
  if (steps < 1) fail(ErrorKind::ConfigInvalid, "need at least one step");
  if (!(noise >= 0.0) || !(noise < 1.0)) fail(ErrorKind::ConfigInvalid, "noise amplitude must lie in [0, 1)");
  if (!std::isfinite(decay) || !std::isfinite(theta)) fail(ErrorKind::ConfigInvalid, "non-finite parameter");
  if (rotation.size() != 0) {
    if (rotation.rows() != lambda.dim() || rotation.cols() != lambda.dim())
      fail(ErrorKind::ConfigInvalid, "rotation generator has the wrong size");
    if ((rotation + rotation.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
      fail(ErrorKind::ConfigInvalid, "rotation generator must be skew-Hermitian");
  }
}

Mat random_hermitian(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Mat m(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) m(i, j) = cplx(nd(rng), nd(rng));
  Mat h = 0.5 * (m + m.adjoint());
  return h / linalg::spectral_norm(h);
}

Vec random_vector(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = cplx(nd(rng), nd(rng));
  return v;
}

SynthPath synth_path(const SynthPathConfig& cfg) {
  cfg.validate();
  const Eigen::Index n = cfg.lambda.dim();
  const Mat id = Mat::Identity(n, n);
  const Mat j = cfg.rotation.size() != 0 ? cfg.rotation : Mat(cplx(0.0, 1.0) * random_hermitian(n, cfg.seed * 7919 + 1));
  const Mat e_lambda = linalg::hermitian_exp(cfg.lambda.matrix);

  SynthPath out;
  out.truth.lambda = cfg.lambda;
  out.truth.limit_gauge = linalg::unitary_exp(cfg.theta * j);
  out.truth.gauges.assign(cfg.steps + 1, id);
  std::vector<Mat> steps(cfg.steps + 1, id);
  std::vector<double> times(cfg.steps + 1);
  for (std::size_t i = 0; i <= cfg.steps; ++i) times[i] = static_cast<double>(i);
  // exp(s J) = W e^{s D} W^* from one eigendecomposition of the Hermitian -iJ.
  Eigen::SelfAdjointEigenSolver<Mat> jes(cplx(0.0, -1.0) * 0.5 * (j - j.adjoint()));
  const Mat& w = jes.eigenvectors();
  for (std::size_t i = 1; i <= cfg.steps; ++i) {
    const double di = static_cast<double>(i);
    const double s = cfg.theta * (1.0 - 1.0 / di);
    Vec phases(n);
    for (Eigen::Index k = 0; k < n; ++k) phases(k) = std::exp(cplx(0.0, s * jes.eigenvalues()(k)));
    const Mat g = w * phases.asDiagonal() * w.adjoint();
    out.truth.gauges[i] = g;
    Mat b = g * e_lambda * g.adjoint();
    if (cfg.noise > 0.0) {
      const Mat e = cfg.noise * std::pow(di, -cfg.decay) * random_hermitian(n, cfg.seed * 1000003 + i);
      b = b * (id + e);
    }
    steps[i] = b;
  }
  out.path = path::OperatorPath::from_steps(std::move(times), std::move(steps), linalg::HermitianForm::identity(n));

  // Planted V_s: pull back g_N (sum of levels >= s) with orthonormalization
  // after every step.
  const auto r = cfg.lambda.levels();
  Mat frame(n, n);
  Eigen::Index at = 0;
  std::vector<Eigen::Index> dims(r);
  for (std::size_t s = r; s-- > 0;) {
    frame.middleCols(at, cfg.lambda.eigenspaces[s].cols()) = cfg.lambda.eigenspaces[s];
    at += cfg.lambda.eigenspaces[s].cols();
    dims[s] = at;
  }
  Mat y = out.truth.gauges[cfg.steps] * frame;
  for (std::size_t i = cfg.steps; i > 0; --i) {
    Eigen::HouseholderQR<Mat> qr(out.path.step(i).partialPivLu().solve(y));
    y = qr.householderQ() * Mat::Identity(n, n);
  }
  for (std::size_t s = 0; s < r; ++s) out.truth.filtration.push_back(y.leftCols(dims[s]));
  return out;
}

std::vector<linalg::HermitianForm> pullback_gram_path(const linalg::HermitianForm& h, const linalg::HermitianGenerator& l,
                                                      const std::vector<double>& times) {
  std::vector<linalg::HermitianForm> out;
  for (double t : times) {
    const Mat e = linalg::hermitian_exp(l.matrix, t);
    Mat g = e * h.gram * e;
    out.push_back({0.5 * (g + g.adjoint())});
  }
  return out;
}

SymmetricMetricP1 SymmetricMetricP1::round(int points) {
  if (points < 8) fail(ErrorKind::ConfigInvalid, "grid needs at least 8 points");
  SymmetricMetricP1 m;
  m.x = RVec::LinSpaced(points, -1.0, 1.0);
  m.v = RVec::Zero(points);
  return m;
}

SymmetricMetricP1 SymmetricMetricP1::perturbed(double eps, int points) {
  SymmetricMetricP1 m = round(points);
  for (Eigen::Index i = 0; i < m.x.size(); ++i) {
    const double x = m.x(i);
    m.v(i) = 0.5 * eps * (x * x + x * x * x);
  }
  m.validate();
  m.normalize();
  return m;
}

RVec SymmetricMetricP1::phi() const {
  const RVec v2 = derivative(v, x, 2);
  return (1.0 + (1.0 - x.array().square()) * v2.array()).matrix();
}

void SymmetricMetricP1::validate() const {
  if (x.size() != v.size() || x.size() < 8) fail(ErrorKind::ConfigInvalid, "metric grid is malformed");
  if (!v.allFinite()) fail(ErrorKind::DegenerateMetric, "profile has non-finite values");
  const RVec p = phi();
  if (!(p.minCoeff() > 0.0)) fail(ErrorKind::DegenerateMetric, "profile is not convex");
}

RVec SymmetricMetricP1::psi() const {
  validate();
  return ((1.0 - x.array().square()) / phi().array()).matrix();
}

RVec SymmetricMetricP1::scalar_curvature() const { return -derivative(psi(), x, 2); }

double SymmetricMetricP1::sup_curvature_deviation() const {
  return (scalar_curvature().array() - 2.0).abs().maxCoeff();
}

double SymmetricMetricP1::area() const {
  // omega = u'' psi dx dtheta with u'' psi = 1 identically; evaluated from
  // the profile so a broken profile shows up as drift.
  const RVec p = phi();
  const RVec ps = psi();
  RVec density(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double w = 1.0 - x(i) * x(i);
    density(i) = w > 0.0 ? p(i) / w * ps(i) : 1.0;
  }
  return 2.0 * M_PI * integrate_grid(density, spacing());
}

void SymmetricMetricP1::normalize() {
  const RVec d1 = derivative(v, x, 1);
  const RVec p = phi();
  RVec integrand(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) integrand(i) = std::exp(2.0 * (v(i) - x(i) * d1(i))) * p(i);
  const double total = integrate_grid(integrand, spacing());
  v.array() -= 0.5 * std::log(total / 2.0);
}

double calabi_energy(const SymmetricMetricP1& metric) {
  const RVec s = metric.scalar_curvature();
  const RVec dev = (s.array() - 2.0).square().matrix();
  return 2.0 * M_PI * integrate_grid(dev, metric.spacing());
}

namespace {

// Banded LU without pivoting (the implicit system is diagonally dominant).
void banded_solve(std::vector<std::array<double, 5>>& a, RVec& b) {
  const auto n = static_cast<Eigen::Index>(a.size());
  auto at = [&](Eigen::Index i, Eigen::Index j) -> double& { return a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j - i + 2)]; };
  for (Eigen::Index k = 0; k < n; ++k) {
    const double piv = at(k, k);
    if (!(std::abs(piv) > 0.0)) fail(ErrorKind::StepUnstable, "singular implicit system");
    for (Eigen::Index i = k + 1; i <= std::min(n - 1, k + 2); ++i) {
      const double f = at(i, k) / piv;
      if (f == 0.0) continue;
      for (Eigen::Index j = k; j <= std::min(n - 1, k + 2); ++j)
        if (j - i >= -2 && j - i <= 2) at(i, j) -= f * at(k, j);
      b(i) -= f * b(k);
    }
  }
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    double acc = b(i);
    for (Eigen::Index j = i + 1; j <= std::min(n - 1, i + 2); ++j) acc -= at(i, j) * b(j);
    b(i) = acc / at(i, i);
  }
}

// Second-order discretization of R(v) = v - x v' + log(phi) / 2 and its
// Jacobian rows (band offsets -2..2).
void krf_rhs(const RVec& v, const RVec& x, double h, RVec& r, std::vector<std::array<double, 5>>* jac) {
  const Eigen::Index n = v.size();
  r.resize(n);
  if (jac) jac->assign(static_cast<std::size_t>(n), {0, 0, 0, 0, 0});
  for (Eigen::Index i = 0; i < n; ++i) {
    const double xi = x(i);
    if (i == 0 || i == n - 1) {
      // phi = 1 at the poles; one-sided derivative pointing inward.
      const double s = i == 0 ? -1.0 : 1.0;
      const Eigen::Index a = i;
      const Eigen::Index b = i == 0 ? 1 : n - 2;
      const Eigen::Index c = i == 0 ? 2 : n - 3;
      const double d1 = s * (3.0 * v(a) - 4.0 * v(b) + v(c)) / (2.0 * h);
      r(i) = v(i) - xi * d1;
      if (jac) {
        auto& row = (*jac)[static_cast<std::size_t>(i)];
        row[2] += 1.0 - xi * s * 3.0 / (2.0 * h);
        row[static_cast<std::size_t>(b - i + 2)] += -xi * s * (-4.0) / (2.0 * h);
        row[static_cast<std::size_t>(c - i + 2)] += -xi * s / (2.0 * h);
      }
      continue;
    }
    const double w = 1.0 - xi * xi;
    const double d1 = (v(i + 1) - v(i - 1)) / (2.0 * h);
    const double d2 = (v(i + 1) - 2.0 * v(i) + v(i - 1)) / (h * h);
    const double phi = 1.0 + w * d2;
    if (!(phi > 0.0)) fail(ErrorKind::DegenerateMetric, "profile lost convexity during the flow");
    r(i) = v(i) - xi * d1 + 0.5 * std::log(phi);
    if (jac) {
      auto& row = (*jac)[static_cast<std::size_t>(i)];
      const double k = 0.5 * w / phi / (h * h);
      row[1] += xi / (2.0 * h) + k;
      row[2] += 1.0 - 2.0 * k;
      row[3] += -xi / (2.0 * h) + k;
    }
  }
}

}  // namespace

std::vector<KrfSample> krf_p1(const SymmetricMetricP1& initial, double t_end, const KrfOptions& opts) {
  initial.validate();
  if (!(opts.dt > 0.0) || !(t_end >= 0.0) || !(opts.sample_every > 0.0))
    fail(ErrorKind::ConfigInvalid, "time parameters must be positive");
  const auto per_sample = static_cast<long>(std::llround(opts.sample_every / opts.dt));
  const auto samples = static_cast<long>(std::llround(t_end / opts.sample_every));
  if (per_sample < 1) fail(ErrorKind::ConfigInvalid, "sample interval shorter than dt");

  SymmetricMetricP1 cur = initial;
  cur.normalize();
  const double h = cur.spacing();
  const double area0 = cur.area();
  std::vector<KrfSample> out{{0.0, cur, 0.0}};
  RVec r;
  std::vector<std::array<double, 5>> jac;
  for (long s = 1; s <= samples; ++s) {
    for (long k = 0; k < per_sample; ++k) {
      RVec w = cur.v;
      bool done = false;
      for (int it = 0; it < opts.newton_max; ++it) {
        krf_rhs(w, cur.x, h, r, &jac);
        RVec f = w - cur.v - opts.dt * r;
        for (auto& row : jac)
          for (double& e : row) e *= -opts.dt;
        for (auto& row : jac) row[2] += 1.0;
        const double fnorm = f.cwiseAbs().maxCoeff();
        banded_solve(jac, f);
        w -= f;
        if (fnorm < opts.newton_tol || f.cwiseAbs().maxCoeff() < opts.newton_tol) {
          done = true;
          break;
        }
      }
      if (!done) fail(ErrorKind::StepUnstable, "Newton iteration did not converge in the implicit step");
      cur.v = w;
      cur.normalize();
    }
    const double t = static_cast<double>(s) * opts.sample_every;
    cur.validate();
    out.push_back({t, cur, std::abs(cur.area() - area0) / t});
  }
  return out;
}

double round_gram_entry(int r, int m) {
  return 2.0 * M_PI * std::exp((2 * r + 1) * std::log(2.0) + std::lgamma(r + m + 1.0) + std::lgamma(r - m + 1.0) -
                               std::lgamma(2.0 * r + 2.0));
}

namespace {

double gram_entry(const boost::math::interpolators::cardinal_quintic_b_spline<double>& spline, int r, int m,
                  const GaussRule& rule) {
  double acc = 0.0;
  std::vector<double> terms;
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    const double x = rule.nodes[q];
    const double v = spline(x);
    const double dv = spline.prime(x);
    const double log_term = (r + m) * std::log1p(x) + (r - m) * std::log1p(-x) + 2.0 * r * (v - x * dv) + 2.0 * m * dv;
    terms.push_back(rule.weights[q] * std::exp(log_term));
  }
  acc = linalg::pairwise_sum(terms.data(), terms.size());
  return 2.0 * M_PI * acc;
}

}  // namespace

linalg::HermitianForm gram_from_metric(const SymmetricMetricP1& metric, int r) {
  if (r < 0 || r > 8) fail(ErrorKind::ConfigInvalid, "section degree out of range");
  SymmetricMetricP1 m = metric;
  m.validate();
  m.normalize();
  const RVec d1 = derivative(m.v, m.x, 1);
  const RVec d2 = derivative(m.v, m.x, 2);
  const Eigen::Index n = m.x.size();
  const std::pair<double, double> left{d1(0), d2(0)};
  const std::pair<double, double> right{d1(n - 1), d2(n - 1)};
  std::vector<double> values(m.v.data(), m.v.data() + n);
  boost::math::interpolators::cardinal_quintic_b_spline<double> spline(values.data(), values.size(), -1.0,
                                                                       m.spacing(), left, right);
  const int dim = 2 * r + 1;
  Mat g = Mat::Zero(dim, dim);
  for (int j = 0; j < dim; ++j) {
    const int mm = j - r;
    const double coarse = gram_entry(spline, r, mm, cached_rule(256));
    const double fine = gram_entry(spline, r, mm, cached_rule(512));
    if (!(std::abs(coarse - fine) <= 1e-10 * std::abs(fine)))
      fail(ErrorKind::QuadratureNotConverged, "Gram quadrature changed under node doubling");
    g(j, j) = fine;
  }
  return {g};
}

PipelineOutput pipeline_p1(const SymmetricMetricP1& initial, double t_end, int r, int k_max, const PipelineOptions& opts) {
  if (r < 1 || k_max < 1) fail(ErrorKind::ConfigInvalid, "degree parameters must be positive");
  if (std::abs(opts.krf.sample_every - 1.0) > 1e-12) fail(ErrorKind::ConfigInvalid, "pipeline samples every unit time");
  const auto samples = krf_p1(initial, t_end, opts.krf);
  PipelineOutput out;
  for (const auto& s : samples) {
    out.times.push_back(s.t);
    out.calabi.push_back(calabi_energy(s.metric));
    out.sup_deviation.push_back(s.metric.sup_curvature_deviation());
    out.area_drift.push_back(s.area_drift);
  }
  out.grams = parallel::map<linalg::HermitianForm>(samples.size(), [&](std::size_t i) {
    return gram_from_metric(samples[i].metric, r);
  });
  auto lift = path::parallel_lift(out.times, out.grams, opts.lift);
  out.lift_residual = lift.max_residual;
  out.path = std::move(lift.path);

  const auto orth = path::to_orthonormal(out.path);
  out.gauge = asymptotics::estimate_gauge_unchecked(orth.path, opts.analysis);
  for (const Mat& b : orth.path.steps())
    out.lambda_norm.push_back(linalg::spectral_norm(linalg::hermitian_log(linalg::polar_positive_part(b).positive)));
  const Eigen::Index n = out.path.dim();
  for (Eigen::Index j = 0; j < n; ++j) {
    const Vec v = orth.to_orthonormal * Vec::Unit(n, j);
    out.section_weights.push_back(
        asymptotics::weight(orth.path, out.gauge, v, reps::RepDescriptor::standard(), opts.analysis));
  }

  for (int k = 2; k <= k_max; ++k) {
    const Mat quotient = ringfilt::veronese_quotient(2 * r, k);
    auto pairs = parallel::map<std::pair<linalg::HermitianForm, linalg::HermitianForm>>(
        samples.size(), [&](std::size_t i) {
          return std::make_pair(ringfilt::sym_gram(out.grams[i], k), gram_from_metric(samples[i].metric, r * k));
        });
    std::vector<linalg::HermitianForm> sym, ref;
    for (auto& [a, b] : pairs) {
      sym.push_back(std::move(a));
      ref.push_back(std::move(b));
    }
    auto h2 = ringfilt::h2_check(sym, quotient, ref);
    out.c_k.push_back(std::move(h2.c));
    out.c_k_bounded.push_back(h2.bounded);
  }
  return out;
}

}  // namespace degenflow::flows
