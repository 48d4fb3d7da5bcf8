#pragma once

#include <vector>

#include "degenflow/linalg.hpp"
#include "degenflow/path.hpp"
#include "degenflow/reps.hpp"

// Asymptotic analysis of a unit-spaced operator path. All routines work in
// coordinates orthonormal for the path's reference form; use
// path::to_orthonormal first when the reference is not the identity.
namespace degenflow::asymptotics {

struct Config {
  double star_tol = 1e-3;
  double snap_tol = -1.0;  // negative: 1e-2 * (min gap of the weight set)
  double filt_tol = 1e-4;
  double lambda_zero_tol = 1e-3;
  double tail_fraction = 0.25;
  double cluster_tol = -1.0;  // negative: 1e-4 * max(1, |Lambda|)
  double membership_tol = 1e-6;
  std::size_t min_steps = 20;
};

struct GaugeEstimate {
  linalg::HermitianGenerator lambda;
  std::vector<Mat> gauges;  // g_0 = I, ..., g_N
  double residual_star = 0.0;
  double residual_gauge = 0.0;
  std::size_t tail_start = 0;
  std::vector<double> star_curve;   // indexed from tail_start
  std::vector<double> gauge_curve;  // indexed from tail_start
  std::vector<double> tail_eigenvalues;  // tail mean of sorted log-eigenvalues
  bool case_II = false;
  bool converged = true;

  std::size_t steps() const { return gauges.empty() ? 0 : gauges.size() - 1; }
};

/// Computes the estimate and residuals without enforcing star_tol.
GaugeEstimate estimate_gauge_unchecked(const path::OperatorPath& path, const Config& cfg = {});
/// As above; throws NonConvergent when either residual exceeds star_tol and
/// TooShort below cfg.min_steps steps.
GaugeEstimate estimate_gauge(const path::OperatorPath& path, const Config& cfg = {});

/// Snaps `raw` to the nearest candidate. Throws SpectrumAmbiguity unless the
/// nearest is within snap_tol and every other candidate is beyond 2*snap_tol.
double snap_to(double raw, const std::vector<double>& candidates, double snap_tol);
/// 1e-2 times the smallest gap between distinct candidates (1e-2 if single).
double default_snap_tol(const std::vector<double>& candidates);

struct WeightResult {
  double raw = 0.0;       // f_N - f_{N-1}
  double snapped = 0.0;
  double tail_slope = 0.0;  // (f_N - f_t) / (N - t) over the tail
  double mean_rate = 0.0;   // f_N / N
  double snap_tol = 0.0;
  int level = 0;            // index into the induced weight list (descending)
  std::vector<double> increments;  // f_{i+1} - f_i, i = 0..N-1
};

WeightResult weight(const path::OperatorPath& path, const GaugeEstimate& gauge, const Vec& v,
                    const reps::RepDescriptor& desc, const Config& cfg = {});

/// weight() for several vectors sharing one pass over the path.
std::vector<WeightResult> weights(const path::OperatorPath& path, const GaugeEstimate& gauge, const std::vector<Vec>& vs,
                                  const reps::RepDescriptor& desc, const Config& cfg = {});

/// d(W) for the span of the columns of `w` in the standard representation.
WeightResult weight_grassmann(const path::OperatorPath& path, const GaugeEstimate& gauge, const Mat& w,
                              const Config& cfg = {});

struct WeightFiltration {
  std::vector<double> jumps;      // lambda_1 > ... > lambda_r
  std::vector<int> multiplicities;
  std::vector<Mat> subspaces;     // V_s, orthonormal, dim q_s
  std::vector<Mat> splitting;     // W_s, orthonormal, dim n_s (empty until split)
  std::vector<Eigen::Index> dims; // q_s
  double stabilization = 0.0;     // max principal-angle sine across pullback indices
  double direct_sum_margin = 0.0; // min over s of sigma_min([W_s V_{s+1}])
  std::size_t split_index = 0;    // pullback index used for R_s
};

WeightFiltration filtration(const path::OperatorPath& path, const GaugeEstimate& gauge, const Config& cfg = {});

/// Adds W_s = R_s cap V_s, with R_s the pullback of the top p_s levels from
/// index `alpha_r` (0 selects max(1, floor(20 / spread)) capped at the tail).
WeightFiltration splitting(const path::OperatorPath& path, const GaugeEstimate& gauge, WeightFiltration filt,
                           std::size_t alpha_r = 0);

/// fs distance between [g_i^{-1} A_i W_s] and [U_s] at the requested indices,
/// one row per level.
std::vector<std::vector<double>> splitting_diagnostic(const path::OperatorPath& path, const GaugeEstimate& gauge,
                                                      const WeightFiltration& filt,
                                                      const std::vector<std::size_t>& indices);

struct OneParamData {
  Mat xi;
  Mat c0;
  linalg::HermitianGenerator lambda;

  Mat lambda_t(double t) const;
  /// C_0^{-1} e^{t Lambda} C_0, for comparison with lambda_t.
  Mat conjugated(double t) const;
};

OneParamData one_param(const WeightFiltration& filt, const GaugeEstimate& gauge);

/// Jumps and V_s of a diagonalizable generator with real spectrum.
WeightFiltration filtration_of_generator(const Mat& xi, double cluster_tol = 1e-6);
bool equal_filtration(const Mat& xi, const Mat& xi_prime, double tol = 1e-6);

struct BarLimit {
  Vec point;
  double weight = 0.0;
  int level = 0;
};

BarLimit bar_limit(const OneParamData& op, const Vec& v, const reps::RepDescriptor& desc);

struct LimitSetSample {
  reps::RepDescriptor rep;
  std::vector<Vec> points;
  std::vector<std::size_t> indices;       // path index of each representative
  std::vector<double> angle_to_eigenspace;
  double diameter = 0.0;
  double max_nearest_gap = 0.0;
  std::vector<std::vector<double>> pairwise;
  double weight = 0.0;
};

/// Samples [g_i^{-1} A_i v] along each subsequence N, N - s, N - 2s, ... in
/// the tail for each stride s, and clusters the samples.
LimitSetSample limit_set(const path::OperatorPath& path, const GaugeEstimate& gauge, const Vec& v,
                         const reps::RepDescriptor& desc, const std::vector<std::size_t>& strides,
                         const Config& cfg = {}, double cluster_radius = 1e-6);

/// Complex dimension of {xi in Lie(G_Lambda) : xi.w in C w}. Throws
/// RankBorderline if a singular value lies in (1e-10, 1e-6).
int stabilizer_dim(const Vec& w, const linalg::HermitianGenerator& lambda, const reps::RepDescriptor& desc);

/// log |e^{t Lambda} v| for t = 0..t_max, evaluated stably through the
/// spectral decomposition.
std::vector<double> log_norm_series(const linalg::HermitianGenerator& lambda, const Vec& v, int t_max);

/// True when, once an increment reaches mu inside [from, end), every later
/// increment stays above mu.
bool threshold_holds(const std::vector<double>& increments, double mu, std::size_t from);

}  // namespace degenflow::asymptotics
