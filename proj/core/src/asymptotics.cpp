#include "degenflow/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>

#include "degenflow/errors.hpp"
#include "degenflow/parallel.hpp"

namespace degenflow::asymptotics {
namespace {

constexpr const char* kModule = "asymptotics";
constexpr std::size_t kCheckpointStride = 64;

[[noreturn]] void fail(ErrorKind kind, const std::string& msg) { throw Error(kind, kModule, msg); }

// Thin Q of a QR factorization with the diagonal of R made real positive, so
// nested column spans are preserved and the frame varies continuously.
Mat thin_q(const Mat& m) {
  Eigen::HouseholderQR<Mat> qr(m);
  Mat q = qr.householderQ() * Mat::Identity(m.rows(), m.cols());
  const auto& r = qr.matrixQR();
  for (Eigen::Index k = 0; k < m.cols(); ++k) {
    const double a = std::abs(r(k, k));
    if (a > 0.0) q.col(k) *= r(k, k) / a;
  }
  return q;
}

void require_unit_path(const path::OperatorPath& p, const Config& cfg) {
  if (!p.unit_spaced()) fail(ErrorKind::ConfigInvalid, "path must be resampled to unit time spacing");
  if (p.size() < cfg.min_steps + 1)
    fail(ErrorKind::TooShort, "path has " + std::to_string(p.size() - 1) + " steps, need " +
                                  std::to_string(cfg.min_steps));
}

// Step operators B_i and their inverses, induced to a representation.
class InducedSteps {
 public:
  InducedSteps(const path::OperatorPath& p, const reps::RepDescriptor& desc) : path_(p), desc_(desc) {
    desc_.validate(p.dim());
    dimv_ = desc_.dim(p.dim());
    const double bytes = 32.0 * static_cast<double>(dimv_ * dimv_) * static_cast<double>(p.size());
    cached_ = bytes < 256.0 * 1024 * 1024;
    if (cached_) {
      fwd_ = parallel::map<Mat>(p.size(), [&](std::size_t i) { return compute_fwd(i); });
      inv_ = parallel::map<Mat>(p.size(), [&](std::size_t i) { return compute_inv(i); });
    }
  }

  Eigen::Index dim() const { return dimv_; }
  std::size_t size() const { return path_.size(); }
  Mat fwd(std::size_t i) const { return cached_ ? fwd_[i] : compute_fwd(i); }
  Mat inv(std::size_t i) const { return cached_ ? inv_[i] : compute_inv(i); }
  Mat induce(const Mat& a) const { return standard() ? a : reps::induce(desc_, a); }

 private:
  bool standard() const { return desc_.shape == reps::RepDescriptor::Shape::Standard; }
  Mat compute_fwd(std::size_t i) const { return induce(path_.step(i)); }
  Mat compute_inv(std::size_t i) const { return induce(path_.step(i).partialPivLu().inverse()); }

  const path::OperatorPath& path_;
  reps::RepDescriptor desc_;
  Eigen::Index dimv_ = 0;
  bool cached_ = false;
  std::vector<Mat> fwd_;
  std::vector<Mat> inv_;
};

// Frames F_i for i <= alpha with F_{i-1} = Q(B_i^{-1} F_i). The leading
// columns of F_i span the pullback A_i A_alpha^{-1} of the leading columns of
// F_alpha; iterating backward keeps the bottom of the flag stable.
class FlagTracker {
 public:
  FlagTracker(const InducedSteps& steps, const Mat& frame_alpha, std::size_t alpha)
      : steps_(steps), alpha_(alpha) {
    Mat f = thin_q(frame_alpha);
    checkpoints_[alpha] = f;
    for (std::size_t i = alpha; i > 0; --i) {
      f = thin_q(steps_.inv(i) * f);
      if ((i - 1) % kCheckpointStride == 0) checkpoints_[i - 1] = f;
    }
  }

  std::size_t alpha() const { return alpha_; }

  const Mat& frame(std::size_t i) {
    if (i > alpha_) fail(ErrorKind::ConfigInvalid, "frame requested beyond pullback index");
    if (!segment_.empty() && i >= seg_lo_ && i < seg_lo_ + segment_.size()) return segment_[i - seg_lo_];
    auto it = checkpoints_.lower_bound(i);  // smallest checkpoint >= i
    const std::size_t hi = it->first;
    const std::size_t lo = i / kCheckpointStride * kCheckpointStride;
    segment_.assign(hi - lo + 1, Mat());
    seg_lo_ = lo;
    segment_[hi - lo] = it->second;
    for (std::size_t k = hi; k > lo; --k) segment_[k - 1 - lo] = thin_q(steps_.inv(k) * segment_[k - lo]);
    return segment_[i - seg_lo_];
  }

 private:
  const InducedSteps& steps_;
  std::size_t alpha_;
  std::map<std::size_t, Mat> checkpoints_;
  std::vector<Mat> segment_;
  std::size_t seg_lo_ = 0;
};

struct InducedLevels {
  std::vector<double> weights;         // descending
  std::vector<int> multiplicities;
  std::vector<Eigen::Index> bottom_dims;  // dims of sum of levels >= j
  Mat bottom_first;                    // eigenbasis, lowest weight first
};

InducedLevels induced_levels(const linalg::HermitianGenerator& lambda, const reps::RepDescriptor& desc) {
  const auto wd = reps::induced_weights(lambda, desc);
  InducedLevels out;
  out.weights = wd.weights;
  out.multiplicities = wd.multiplicities;
  const Eigen::Index dimv = wd.dim();
  out.bottom_first = Mat(dimv, dimv);
  Eigen::Index at = 0;
  out.bottom_dims.assign(wd.weights.size(), 0);
  for (std::size_t j = wd.weights.size(); j-- > 0;) {
    out.bottom_first.middleCols(at, wd.subspaces[j].cols()) = wd.subspaces[j];
    at += wd.subspaces[j].cols();
    out.bottom_dims[j] = at;
  }
  return out;
}

double resolve_snap_tol(const Config& cfg, const std::vector<double>& candidates) {
  return cfg.snap_tol > 0.0 ? cfg.snap_tol : default_snap_tol(candidates);
}

}  // namespace

double default_snap_tol(const std::vector<double>& candidates) {
  std::vector<double> c = candidates;
  std::sort(c.begin(), c.end());
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < c.size(); ++i)
    if (c[i] - c[i - 1] > 1e-9) gap = std::min(gap, c[i] - c[i - 1]);
  return std::isfinite(gap) ? 1e-2 * gap : 1e-2;
}

double snap_to(double raw, const std::vector<double>& candidates, double snap_tol) {
  if (candidates.empty()) fail(ErrorKind::SpectrumAmbiguity, "empty weight set");
  std::vector<double> dist;
  for (double c : candidates) dist.push_back(std::abs(raw - c));
  const auto best = static_cast<std::size_t>(std::min_element(dist.begin(), dist.end()) - dist.begin());
  if (!(dist[best] < snap_tol))
    fail(ErrorKind::SpectrumAmbiguity, "raw weight " + std::to_string(raw) + " is not within snap_tol of the spectrum");
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    if (k == best || std::abs(candidates[k] - candidates[best]) <= 1e-9) continue;
    if (!(dist[k] > 2.0 * snap_tol)) fail(ErrorKind::SpectrumAmbiguity, "snapping margin fails");
  }
  return candidates[best];
}

GaugeEstimate estimate_gauge_unchecked(const path::OperatorPath& p, const Config& cfg) {
  require_unit_path(p, cfg);
  const std::size_t steps = p.size() - 1;
  const Eigen::Index n = p.dim();

  struct StepSpectrum {
    RVec logs;  // descending
    Mat vectors;
  };
  auto spectra = parallel::map<StepSpectrum>(steps + 1, [&](std::size_t i) -> StepSpectrum {
    if (i == 0) return {RVec::Zero(n), Mat::Identity(n, n)};
    // B = U S V^*: the polar positive part is V S V^*, already diagonal in V
    // with singular values in descending order.
    const Mat& b = p.step(i);
    if (!b.allFinite()) fail(ErrorKind::SingularInput, "operator has non-finite entries");
    Eigen::JacobiSVD<Mat> svd(b, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (!(sv(n - 1) > 0.0) || sv(0) / sv(n - 1) > 1e12) fail(ErrorKind::SingularInput, "condition number exceeds 1e12");
    return {sv.array().log().matrix(), svd.matrixV()};
  });

  GaugeEstimate est;
  const auto tail_len = static_cast<std::size_t>(std::floor(cfg.tail_fraction * static_cast<double>(steps)));
  est.tail_start = std::clamp<std::size_t>(steps - tail_len, 1, steps);
  const std::size_t ts = est.tail_start;

  est.tail_eigenvalues.assign(static_cast<std::size_t>(n), 0.0);
  std::vector<double> column(steps - ts + 1);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (std::size_t i = ts; i <= steps; ++i) column[i - ts] = spectra[i].logs(k);
    est.tail_eigenvalues[static_cast<std::size_t>(k)] =
        linalg::pairwise_sum(column.data(), column.size()) / static_cast<double>(column.size());
  }

  double scale = 1.0;
  for (double d : est.tail_eigenvalues) scale = std::max(scale, std::abs(d));
  const double tol = cfg.cluster_tol > 0.0 ? cfg.cluster_tol : 1e-4 * scale;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> blocks;  // start, length
  std::vector<double> spectrum;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (k == 0 || est.tail_eigenvalues[static_cast<std::size_t>(k - 1)] -
                          est.tail_eigenvalues[static_cast<std::size_t>(k)] >= tol)
      blocks.push_back({k, 0});
    ++blocks.back().second;
  }
  for (const auto& [start, len] : blocks) {
    double s = 0.0;
    for (Eigen::Index k = start; k < start + len; ++k) s += est.tail_eigenvalues[static_cast<std::size_t>(k)];
    spectrum.push_back(s / static_cast<double>(len));
  }

  // Align eigenbases block by block to the previous step.
  for (std::size_t i = 2; i <= steps; ++i) {
    for (const auto& [start, len] : blocks) {
      const Mat prev = spectra[i - 1].vectors.middleCols(start, len);
      auto cur = spectra[i].vectors.middleCols(start, len);
      const Mat u = linalg::closest_unitary(cur.adjoint() * prev);
      cur = (cur * u).eval();
    }
  }

  const Mat& vts = spectra[ts].vectors;
  std::vector<Mat> spaces;
  for (const auto& [start, len] : blocks) spaces.push_back(vts.middleCols(start, len));
  est.lambda = linalg::make_generator(spectrum, spaces);
  est.case_II = est.lambda.norm() < cfg.lambda_zero_tol;

  RVec dexp(n);
  for (std::size_t b = 0; b < blocks.size(); ++b)
    for (Eigen::Index k = blocks[b].first; k < blocks[b].first + blocks[b].second; ++k)
      dexp(k) = std::exp(-spectrum[b]);

  est.gauges.resize(steps + 1);
  est.gauges[0] = Mat::Identity(n, n);
  for (std::size_t i = 1; i <= steps; ++i) est.gauges[i] = spectra[i].vectors * vts.adjoint();

  const Mat id = Mat::Identity(n, n);
  for (std::size_t i = ts; i <= steps; ++i) {
    const Mat& v = spectra[i].vectors;
    const Mat conj = v * dexp.cast<cplx>().asDiagonal() * v.adjoint();
    const double star = linalg::spectral_norm(p.step(i) * conj - id);
    const double gauge = linalg::spectral_norm(est.gauges[i - 1].adjoint() * est.gauges[i] - id);
    est.star_curve.push_back(star);
    est.gauge_curve.push_back(gauge);
    est.residual_star = std::max(est.residual_star, star);
    est.residual_gauge = std::max(est.residual_gauge, gauge);
  }
  est.converged = est.residual_star <= cfg.star_tol && est.residual_gauge <= cfg.star_tol;
  return est;
}

GaugeEstimate estimate_gauge(const path::OperatorPath& p, const Config& cfg) {
  GaugeEstimate est = estimate_gauge_unchecked(p, cfg);
  if (!est.converged)
    fail(ErrorKind::NonConvergent, "tail residuals star=" + std::to_string(est.residual_star) +
                                       " gauge=" + std::to_string(est.residual_gauge) + " exceed star_tol");
  return est;
}

namespace {

struct Tracked {
  InducedLevels levels;
  std::vector<double> f;  // f_i = log |A_i v|
  int level = 0;
  std::map<std::size_t, Vec> samples;  // normalized A_i v
};

// Forward iteration of each v kept inside A_i V_j, the image of the smallest
// filtered piece containing v. Plain forward iteration would let round-off
// leak into higher weights and take over after a few dozen steps. The
// induced steps and the pulled-back flag are shared by all vectors.
std::vector<Tracked> track_vectors(const path::OperatorPath& p, const GaugeEstimate& gauge,
                                   const std::vector<Vec>& vs, const reps::RepDescriptor& desc, const Config& cfg,
                                   const std::vector<std::size_t>& sample_at) {
  require_unit_path(p, cfg);
  const std::size_t steps_n = p.size() - 1;
  if (gauge.gauges.size() != p.size()) fail(ErrorKind::ConfigInvalid, "gauge estimate does not match the path");
  InducedSteps steps(p, desc);
  for (const Vec& v : vs) {
    if (v.size() != steps.dim()) fail(ErrorKind::ConfigInvalid, "vector dimension does not match the representation");
    if (!(v.norm() > 0.0)) fail(ErrorKind::ZeroVector, "weight of the zero vector");
  }

  const InducedLevels levels = induced_levels(gauge.lambda, desc);
  FlagTracker tracker(steps, steps.induce(gauge.gauges[steps_n]) * levels.bottom_first, steps_n);
  const Mat f0 = tracker.frame(0);
  const auto e = static_cast<int>(levels.weights.size());
  std::vector<std::size_t> wanted = sample_at;
  std::sort(wanted.begin(), wanted.end());

  std::vector<Tracked> out(vs.size());
  std::vector<Vec> xs(vs.size());
  std::vector<Eigen::Index> qs(vs.size());
  for (std::size_t k = 0; k < vs.size(); ++k) {
    Tracked& t = out[k];
    t.levels = levels;
    const double nv = vs[k].norm();
    const Vec unit = vs[k] / nv;
    t.level = 0;
    for (int j = e - 1; j >= 0; --j) {
      const auto basis = f0.leftCols(levels.bottom_dims[static_cast<std::size_t>(j)]);
      if ((unit - basis * (basis.adjoint() * unit)).norm() < cfg.membership_tol) {
        t.level = j;
        break;
      }
    }
    qs[k] = levels.bottom_dims[static_cast<std::size_t>(t.level)];
    t.f.assign(steps_n + 1, 0.0);
    t.f[0] = std::log(nv);
    xs[k] = unit;
  }
  auto record = [&](std::size_t i) {
    if (!std::binary_search(wanted.begin(), wanted.end(), i)) return;
    for (std::size_t k = 0; k < vs.size(); ++k) out[k].samples[i] = xs[k];
  };
  record(0);
  for (std::size_t i = 1; i <= steps_n; ++i) {
    const Mat fwd = steps.fwd(i);
    const Mat& frame = tracker.frame(i);
    for (std::size_t k = 0; k < vs.size(); ++k) {
      const auto basis = frame.leftCols(qs[k]);
      Vec y = fwd * xs[k];
      y = basis * (basis.adjoint() * y);
      const double nr = y.norm();
      if (!(nr > 0.0) || !std::isfinite(nr)) fail(ErrorKind::NonConvergent, "tracked vector collapsed");
      out[k].f[i] = out[k].f[i - 1] + std::log(nr);
      xs[k] = y / nr;
    }
    record(i);
  }
  return out;
}

Tracked track_vector(const path::OperatorPath& p, const GaugeEstimate& gauge, const Vec& v,
                     const reps::RepDescriptor& desc, const Config& cfg, const std::vector<std::size_t>& sample_at) {
  return std::move(track_vectors(p, gauge, {v}, desc, cfg, sample_at).front());
}

WeightResult finish_weight(const std::vector<double>& f, std::size_t tail_start, const std::vector<double>& candidates,
                           const Config& cfg) {
  const std::size_t n = f.size() - 1;
  WeightResult r;
  r.raw = f[n] - f[n - 1];
  r.tail_slope = (f[n] - f[tail_start]) / static_cast<double>(n - tail_start);
  r.mean_rate = f[n] / static_cast<double>(n);
  r.snap_tol = resolve_snap_tol(cfg, candidates);
  r.increments.resize(n);
  for (std::size_t i = 0; i < n; ++i) r.increments[i] = f[i + 1] - f[i];
  r.snapped = snap_to(r.raw, candidates, r.snap_tol);
  if (std::abs(r.raw - r.tail_slope) > r.snap_tol)
    fail(ErrorKind::NonConvergent, "increment and tail-slope estimates of the weight disagree");
  return r;
}

std::size_t effective_tail_start(const GaugeEstimate& gauge, std::size_t steps_n) {
  return std::min(gauge.tail_start, steps_n - 1);
}

// Orthonormal n_keep-dimensional part of span(a) closest to span(b), with the
// principal-angle sines in ascending order.
std::pair<Mat, std::vector<double>> closest_directions(const Mat& a, const Mat& b, Eigen::Index n_keep) {
  const Mat qa = linalg::orthonormal_basis(a);
  const Mat qb = linalg::orthonormal_basis(b);
  const Mat residual = qa - qb * (qb.adjoint() * qa);
  Eigen::JacobiSVD<Mat> svd(residual, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const Eigen::Index m = qa.cols();
  std::vector<double> sines(static_cast<std::size_t>(m), 0.0);
  for (Eigen::Index i = 0; i < m; ++i) sines[static_cast<std::size_t>(i)] = i < sv.size() ? sv(i) : 0.0;
  std::reverse(sines.begin(), sines.end());
  Mat out(qa.rows(), n_keep);
  for (Eigen::Index k = 0; k < n_keep; ++k) out.col(k) = qa * svd.matrixV().col(m - 1 - k);
  return {linalg::orthonormal_basis(out), sines};
}

// Lambda eigenbasis with the highest level first.
Mat top_first(const linalg::HermitianGenerator& lambda) { return lambda.eigenbasis(); }

Mat bottom_first(const linalg::HermitianGenerator& lambda) {
  Mat out(lambda.dim(), lambda.dim());
  Eigen::Index at = 0;
  for (std::size_t s = lambda.levels(); s-- > 0;) {
    out.middleCols(at, lambda.eigenspaces[s].cols()) = lambda.eigenspaces[s];
    at += lambda.eigenspaces[s].cols();
  }
  return out;
}

// A_alpha^{-1} g_alpha applied to the top-first eigenbasis and orthonormalized
// in order, so leading p_s columns span R_s.
Mat pullback_top(const path::OperatorPath& p, const GaugeEstimate& gauge, std::size_t alpha) {
  Mat y = thin_q(gauge.gauges[alpha] * top_first(gauge.lambda));
  for (std::size_t i = alpha; i > 0; --i) y = thin_q(p.step(i).partialPivLu().solve(y));
  return y;
}

}  // namespace

WeightResult weight(const path::OperatorPath& p, const GaugeEstimate& gauge, const Vec& v,
                    const reps::RepDescriptor& desc, const Config& cfg) {
  const Tracked t = track_vector(p, gauge, v, desc, cfg, {});
  WeightResult r = finish_weight(t.f, effective_tail_start(gauge, p.size() - 1), t.levels.weights, cfg);
  r.level = t.level;
  return r;
}

std::vector<WeightResult> weights(const path::OperatorPath& p, const GaugeEstimate& gauge, const std::vector<Vec>& vs,
                                  const reps::RepDescriptor& desc, const Config& cfg) {
  const auto tracked = track_vectors(p, gauge, vs, desc, cfg, {});
  std::vector<WeightResult> out;
  out.reserve(tracked.size());
  for (const Tracked& t : tracked) {
    out.push_back(finish_weight(t.f, effective_tail_start(gauge, p.size() - 1), t.levels.weights, cfg));
    out.back().level = t.level;
  }
  return out;
}

WeightResult weight_grassmann(const path::OperatorPath& p, const GaugeEstimate& gauge, const Mat& w,
                              const Config& cfg) {
  require_unit_path(p, cfg);
  const std::size_t steps_n = p.size() - 1;
  const Eigen::Index n = p.dim();
  if (w.rows() != n || w.cols() < 1) fail(ErrorKind::DegenerateSpan, "subspace must be given by columns in E");
  const Mat q = linalg::orthonormal_basis(w, 1e-10);
  if (q.cols() != w.cols()) fail(ErrorKind::DegenerateSpan, "spanning vectors are dependent");
  const Eigen::Index pdim = q.cols();

  const auto& lambda = gauge.lambda;
  const auto r = lambda.levels();
  std::vector<Eigen::Index> bottom_dims(r);
  {
    Eigen::Index acc = 0;
    for (std::size_t s = r; s-- > 0;) {
      acc += lambda.eigenspaces[s].cols();
      bottom_dims[s] = acc;
    }
  }
  InducedSteps steps(p, reps::RepDescriptor::standard());
  FlagTracker tracker(steps, gauge.gauges[steps_n] * bottom_first(lambda), steps_n);
  const Mat f0 = tracker.frame(0);

  // Basis of W adapted to the filtration, lowest piece first.
  Mat basis(n, 0);
  std::vector<std::size_t> level_of;
  for (std::size_t s = r; s-- > 0;) {
    const Mat inter = linalg::subspace_intersection(q, f0.leftCols(bottom_dims[s]), cfg.membership_tol);
    const Eigen::Index fresh = inter.cols() - basis.cols();
    if (fresh <= 0) continue;
    const Mat residual = inter - basis * (basis.adjoint() * inter);
    Eigen::JacobiSVD<Mat> svd(residual, Eigen::ComputeThinU);
    Mat grown(n, basis.cols() + fresh);
    grown << basis, svd.matrixU().leftCols(fresh);
    basis = linalg::orthonormal_basis(grown);
    level_of.insert(level_of.end(), static_cast<std::size_t>(fresh), s);
  }
  if (basis.cols() != pdim) fail(ErrorKind::IntersectionDefect, "could not adapt a basis of W to the filtration");

  std::vector<double> f(steps_n + 1, 0.0);
  Mat x = basis;
  for (std::size_t i = 1; i <= steps_n; ++i) {
    Mat y = p.step(i) * x;
    const Mat& frame = tracker.frame(i);
    for (Eigen::Index k = 0; k < pdim; ++k) {
      const auto piece = frame.leftCols(bottom_dims[level_of[static_cast<std::size_t>(k)]]);
      y.col(k) = piece * (piece.adjoint() * y.col(k));
    }
    Eigen::HouseholderQR<Mat> qr(y);
    double growth = 0.0;
    for (Eigen::Index k = 0; k < pdim; ++k) growth += std::log(std::abs(qr.matrixQR()(k, k)));
    if (!std::isfinite(growth)) fail(ErrorKind::NonConvergent, "tracked frame collapsed");
    f[i] = f[i - 1] + growth;
    x = thin_q(y);
  }

  auto candidates = reps::basis_weights(reps::RepDescriptor::ext(static_cast<int>(pdim)), lambda.eigenvalues());
  std::sort(candidates.begin(), candidates.end(), std::greater<>());
  std::vector<double> distinct;
  for (double c : candidates)
    if (distinct.empty() || distinct.back() - c > 1e-9 * std::max(1.0, std::abs(c))) distinct.push_back(c);
  WeightResult res = finish_weight(f, effective_tail_start(gauge, steps_n), distinct, cfg);
  res.level = -1;
  for (std::size_t j = 0; j < distinct.size(); ++j)
    if (distinct[j] == res.snapped) res.level = static_cast<int>(j);
  return res;
}

WeightFiltration filtration(const path::OperatorPath& p, const GaugeEstimate& gauge, const Config& cfg) {
  require_unit_path(p, cfg);
  const std::size_t steps_n = p.size() - 1;
  const auto& lambda = gauge.lambda;
  const auto r = lambda.levels();
  WeightFiltration out;
  out.jumps = lambda.spectrum;
  out.multiplicities = lambda.multiplicities;
  out.dims.assign(r, 0);
  {
    Eigen::Index acc = 0;
    for (std::size_t s = r; s-- > 0;) {
      acc += lambda.eigenspaces[s].cols();
      out.dims[s] = acc;
    }
  }
  const std::size_t ts = std::min(gauge.tail_start, steps_n);
  std::vector<std::size_t> alphas{steps_n, (steps_n + ts) / 2, ts};
  alphas.erase(std::unique(alphas.begin(), alphas.end()), alphas.end());

  InducedSteps steps(p, reps::RepDescriptor::standard());
  const Mat frame_src = bottom_first(lambda);
  std::vector<std::vector<Mat>> per_alpha;
  for (std::size_t alpha : alphas) {
    FlagTracker tracker(steps, gauge.gauges[alpha] * frame_src, alpha);
    const Mat f0 = tracker.frame(0);
    std::vector<Mat> spaces;
    for (std::size_t s = 0; s < r; ++s) spaces.push_back(f0.leftCols(out.dims[s]));
    per_alpha.push_back(std::move(spaces));
  }
  for (std::size_t a = 1; a < per_alpha.size(); ++a)
    for (std::size_t s = 0; s < r; ++s)
      out.stabilization =
          std::max(out.stabilization, linalg::subspace_distance(per_alpha[a - 1][s], per_alpha[a][s]));
  if (out.stabilization > cfg.filt_tol)
    fail(ErrorKind::NotStabilized, "pullbacks rotate by " + std::to_string(out.stabilization) + " beyond filt_tol");
  out.subspaces = std::move(per_alpha.front());
  return out;
}

WeightFiltration splitting(const path::OperatorPath& p, const GaugeEstimate& gauge, WeightFiltration filt,
                           std::size_t alpha_r) {
  const std::size_t steps_n = p.size() - 1;
  const auto& lambda = gauge.lambda;
  const auto r = lambda.levels();
  const Eigen::Index n = lambda.dim();
  filt.splitting.clear();
  if (r == 1) {
    filt.splitting.push_back(Mat::Identity(n, n));
    filt.direct_sum_margin = 1.0;
    filt.split_index = 0;
    return filt;
  }
  // Any R_s transverse to V_{s+1} flows forward onto the top levels, but a
  // deep pullback of the top levels amplifies gauge drift by e^{spread alpha}
  // and lands close to V_{s+1}. Try alpha = 1, 2, 4, ... up to the default
  // depth and keep the most transverse splitting.
  const double spread = lambda.spectrum.front() - lambda.spectrum.back();
  std::vector<std::size_t> candidates;
  if (alpha_r != 0) {
    candidates.push_back(std::min(alpha_r, steps_n));
  } else {
    std::size_t deepest = static_cast<std::size_t>(std::max(1.0, std::floor(20.0 / spread)));
    deepest = std::min({deepest, std::max<std::size_t>(1, gauge.tail_start), steps_n});
    for (std::size_t a = 1; a <= deepest; a *= 2) candidates.push_back(a);
  }

  constexpr double kIntersectTol = 1e-5;
  auto attempt = [&](std::size_t alpha, std::vector<Mat>& out) {
    const Mat y = pullback_top(p, gauge, alpha);
    Eigen::Index p_s = 0;
    double margin = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < r; ++s) {
      const Eigen::Index n_s = lambda.eigenspaces[s].cols();
      p_s += n_s;
      auto [w, sines] = closest_directions(y.leftCols(p_s), filt.subspaces[s], n_s);
      const double inside = sines[static_cast<std::size_t>(n_s - 1)];
      const double outside = static_cast<std::size_t>(n_s) < sines.size() ? sines[static_cast<std::size_t>(n_s)] : 1.0;
      if (!(inside < kIntersectTol) || !(outside >= kIntersectTol))
        fail(ErrorKind::IntersectionDefect, "R_s cap Q_s has the wrong dimension at level " + std::to_string(s));
      if (s + 1 < r) {
        Mat both(n, n_s + filt.subspaces[s + 1].cols());
        both << w, filt.subspaces[s + 1];
        Eigen::JacobiSVD<Mat> svd(both);
        margin = std::min(margin, svd.singularValues()(svd.singularValues().size() - 1));
      }
      out.push_back(std::move(w));
    }
    return margin;
  };

  filt.direct_sum_margin = -1.0;
  std::optional<Error> last_error;
  for (std::size_t alpha : candidates) {
    std::vector<Mat> w;
    try {
      const double margin = attempt(alpha, w);
      if (margin > filt.direct_sum_margin) {
        filt.direct_sum_margin = margin;
        filt.splitting = std::move(w);
        filt.split_index = alpha;
      }
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::IntersectionDefect) throw;
      last_error = e;
    }
  }
  if (filt.splitting.empty() && last_error) throw *last_error;
  if (!(filt.direct_sum_margin > 1e-6)) fail(ErrorKind::IntersectionDefect, "W_s and V_{s+1} are not transverse");
  return filt;
}

std::vector<std::vector<double>> splitting_diagnostic(const path::OperatorPath& p, const GaugeEstimate& gauge,
                                                      const WeightFiltration& filt,
                                                      const std::vector<std::size_t>& indices) {
  const std::size_t steps_n = p.size() - 1;
  const auto& lambda = gauge.lambda;
  const auto r = lambda.levels();
  std::vector<std::vector<double>> out(r);
  if (filt.splitting.size() != r) fail(ErrorKind::ConfigInvalid, "filtration has no splitting");
  if (r == 1) {
    for (auto& row : out) row.assign(indices.size(), 0.0);
    return out;
  }
  InducedSteps steps(p, reps::RepDescriptor::standard());
  FlagTracker tracker(steps, gauge.gauges[steps_n] * bottom_first(lambda), steps_n);
  std::vector<std::size_t> wanted = indices;
  std::sort(wanted.begin(), wanted.end());
  Mat y = pullback_top(p, gauge, filt.split_index);
  std::size_t next = 0;
  for (std::size_t i = 0; i <= steps_n && next < wanted.size(); ++i) {
    if (i > 0) y = thin_q(p.step(i) * y);
    while (next < wanted.size() && wanted[next] == i) {
      const Mat& frame = tracker.frame(i);
      Eigen::Index p_s = 0;
      for (std::size_t s = 0; s < r; ++s) {
        const Eigen::Index n_s = lambda.eigenspaces[s].cols();
        p_s += n_s;
        const Mat w = closest_directions(y.leftCols(p_s), frame.leftCols(filt.dims[s]), n_s).first;
        const Mat z = gauge.gauges[i].adjoint() * w;
        const double overlap = std::abs((lambda.eigenspaces[s].adjoint() * z).determinant());
        out[s].push_back(std::acos(std::min(1.0, overlap)));
      }
      ++next;
    }
  }
  return out;
}

Mat OneParamData::lambda_t(double t) const {
  Eigen::ComplexEigenSolver<Mat> es(xi);
  Vec e(es.eigenvalues().size());
  for (Eigen::Index i = 0; i < e.size(); ++i) e(i) = std::exp(t * es.eigenvalues()(i));
  return es.eigenvectors() * e.asDiagonal() * es.eigenvectors().inverse();
}

Mat OneParamData::conjugated(double t) const {
  return c0.partialPivLu().solve(linalg::hermitian_exp(lambda.matrix, t) * c0);
}

OneParamData one_param(const WeightFiltration& filt, const GaugeEstimate& gauge) {
  const auto& lambda = gauge.lambda;
  const auto r = lambda.levels();
  if (filt.splitting.size() != r) fail(ErrorKind::ConfigInvalid, "filtration has no splitting");
  const Eigen::Index n = lambda.dim();
  Mat cw(n, n);
  Mat target(n, n);
  RVec d(n);
  Eigen::Index at = 0;
  for (std::size_t s = 0; s < r; ++s) {
    const Mat& w = filt.splitting[s];
    const Mat& u = lambda.eigenspaces[s];
    cw.middleCols(at, w.cols()) = w;
    target.middleCols(at, w.cols()) = u * linalg::closest_unitary(u.adjoint() * w);
    d.segment(at, w.cols()).setConstant(lambda.spectrum[s]);
    at += w.cols();
  }
  // xi C_W = C_W D and C_0 C_W = [U_s u_s].
  const Mat cw_inv = cw.partialPivLu().inverse();
  OneParamData out;
  out.lambda = lambda;
  out.xi = cw * d.cast<cplx>().asDiagonal() * cw_inv;
  out.c0 = target * cw_inv;
  return out;
}

WeightFiltration filtration_of_generator(const Mat& xi, double cluster_tol) {
  Eigen::ComplexEigenSolver<Mat> es(xi);
  const Eigen::Index n = xi.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return es.eigenvalues()(a).real() > es.eigenvalues()(b).real();
  });
  WeightFiltration out;
  std::vector<std::vector<Eigen::Index>> groups;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const double v = es.eigenvalues()(order[k]).real();
    if (k == 0 || es.eigenvalues()(order[k - 1]).real() - v >= cluster_tol) groups.emplace_back();
    groups.back().push_back(order[k]);
  }
  for (const auto& g : groups) {
    double mean = 0.0;
    for (auto i : g) mean += es.eigenvalues()(i).real();
    out.jumps.push_back(mean / static_cast<double>(g.size()));
    out.multiplicities.push_back(static_cast<int>(g.size()));
  }
  for (std::size_t s = 0; s < groups.size(); ++s) {
    std::vector<Eigen::Index> cols;
    for (std::size_t t = s; t < groups.size(); ++t) cols.insert(cols.end(), groups[t].begin(), groups[t].end());
    Mat m(n, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) m.col(static_cast<Eigen::Index>(c)) = es.eigenvectors().col(cols[c]);
    out.subspaces.push_back(linalg::orthonormal_basis(m, 1e-10));
    out.dims.push_back(out.subspaces.back().cols());
  }
  return out;
}

bool equal_filtration(const Mat& xi, const Mat& xi_prime, double tol) {
  const auto a = filtration_of_generator(xi);
  const auto b = filtration_of_generator(xi_prime);
  if (a.jumps.size() != b.jumps.size()) return false;
  for (std::size_t s = 0; s < a.jumps.size(); ++s) {
    if (std::abs(a.jumps[s] - b.jumps[s]) > tol) return false;
    if (a.dims[s] != b.dims[s] || linalg::subspace_distance(a.subspaces[s], b.subspaces[s]) > tol) return false;
  }
  return true;
}

BarLimit bar_limit(const OneParamData& op, const Vec& v, const reps::RepDescriptor& desc) {
  if (!(v.norm() > 0.0)) fail(ErrorKind::ZeroVector, "limit point of the zero vector");
  const Vec x = reps::induce(desc, op.c0) * v;
  const auto wd = reps::induced_weights(op.lambda, desc);
  const double scale = x.norm();
  for (std::size_t j = 0; j < wd.weights.size(); ++j) {
    const Mat& s = wd.subspaces[j];
    const Vec comp = s * (s.adjoint() * x);
    if (comp.norm() > 1e-10 * scale) return {comp / comp.norm(), wd.weights[j], static_cast<int>(j)};
  }
  fail(ErrorKind::ZeroVector, "C_0 v has no nonzero weight component");
}

LimitSetSample limit_set(const path::OperatorPath& p, const GaugeEstimate& gauge, const Vec& v,
                         const reps::RepDescriptor& desc, const std::vector<std::size_t>& strides, const Config& cfg,
                         double cluster_radius) {
  require_unit_path(p, cfg);
  const std::size_t steps_n = p.size() - 1;
  const std::size_t ts = std::min(gauge.tail_start, steps_n);
  std::vector<std::size_t> indices;
  for (std::size_t stride : strides) {
    if (stride == 0) fail(ErrorKind::ConfigInvalid, "subsequence stride must be positive");
    for (std::size_t i = steps_n; i >= ts; i -= std::min(stride, i)) {
      indices.push_back(i);
      if (i < stride || i - stride < ts) break;
    }
  }
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());

  const Tracked t = track_vector(p, gauge, v, desc, cfg, indices);
  LimitSetSample out;
  out.rep = desc;
  out.weight = t.levels.weights[static_cast<std::size_t>(t.level)];
  // The weight space of d(v) is the top level of the piece holding v.
  const auto wd = reps::induced_weights(gauge.lambda, desc);
  const Mat& eigenspace = wd.subspaces[static_cast<std::size_t>(t.level)];
  for (std::size_t i : indices) {
    Vec y = (desc.shape == reps::RepDescriptor::Shape::Standard ? gauge.gauges[i].adjoint()
                                                                  : reps::induce(desc, gauge.gauges[i].adjoint())) *
            t.samples.at(i);
    y /= y.norm();
    bool fresh = true;
    for (const Vec& q : out.points)
      if (linalg::fs_distance(q, y) < cluster_radius) fresh = false;
    if (!fresh) continue;
    out.points.push_back(y);
    out.indices.push_back(i);
    out.angle_to_eigenspace.push_back(linalg::angle_to_subspace(y, eigenspace));
  }
  const std::size_t m = out.points.size();
  out.pairwise.assign(m, std::vector<double>(m, 0.0));
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a + 1; b < m; ++b) {
      const double d = linalg::fs_distance(out.points[a], out.points[b]);
      out.pairwise[a][b] = out.pairwise[b][a] = d;
      out.diameter = std::max(out.diameter, d);
    }
  for (std::size_t a = 0; a < m && m > 1; ++a) {
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < m; ++b)
      if (b != a) nearest = std::min(nearest, out.pairwise[a][b]);
    out.max_nearest_gap = std::max(out.max_nearest_gap, nearest);
  }
  return out;
}

int stabilizer_dim(const Vec& w, const linalg::HermitianGenerator& lambda, const reps::RepDescriptor& desc) {
  const double nw = w.norm();
  if (!(nw > 0.0)) fail(ErrorKind::ZeroVector, "stabilizer of the zero vector");
  const Vec unit = w / nw;
  std::vector<Mat> basis;
  for (const Mat& u : lambda.eigenspaces)
    for (Eigen::Index a = 0; a < u.cols(); ++a)
      for (Eigen::Index b = 0; b < u.cols(); ++b) basis.push_back(u.col(a) * u.col(b).adjoint());
  Mat m(unit.size(), static_cast<Eigen::Index>(basis.size()));
  for (std::size_t k = 0; k < basis.size(); ++k) {
    const Vec image = reps::induce_lie(desc, basis[k]) * unit;
    if (image.size() != unit.size()) fail(ErrorKind::ConfigInvalid, "vector dimension does not match the representation");
    m.col(static_cast<Eigen::Index>(k)) = image - unit * unit.dot(image);
  }
  Eigen::JacobiSVD<Mat> svd(m);
  int rank = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    const double sv = svd.singularValues()(i);
    if (sv > 1e-10 && sv < 1e-6) fail(ErrorKind::RankBorderline, "singular value " + std::to_string(sv) + " is borderline");
    if (sv > 1e-8) ++rank;
  }
  return static_cast<int>(basis.size()) - rank;
}

std::vector<double> log_norm_series(const linalg::HermitianGenerator& lambda, const Vec& v, int t_max) {
  std::vector<double> weights;
  std::vector<double> logc;
  for (std::size_t s = 0; s < lambda.levels(); ++s) {
    const double c = (lambda.eigenspaces[s].adjoint() * v).squaredNorm();
    if (c > 0.0) {
      weights.push_back(lambda.spectrum[s]);
      logc.push_back(std::log(c));
    }
  }
  if (weights.empty()) fail(ErrorKind::ZeroVector, "log norm of the zero vector");
  std::vector<double> out;
  for (int t = 0; t <= t_max; ++t) {
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < weights.size(); ++k) top = std::max(top, logc[k] + 2.0 * t * weights[k]);
    double acc = 0.0;
    for (std::size_t k = 0; k < weights.size(); ++k) acc += std::exp(logc[k] + 2.0 * t * weights[k] - top);
    out.push_back(0.5 * (top + std::log(acc)));
  }
  return out;
}

bool threshold_holds(const std::vector<double>& increments, double mu, std::size_t from) {
  bool reached = false;
  for (std::size_t i = from; i < increments.size(); ++i) {
    if (reached && !(increments[i] > mu)) return false;
    if (increments[i] >= mu) reached = true;
  }
  return true;
}

}  // namespace degenflow::asymptotics
