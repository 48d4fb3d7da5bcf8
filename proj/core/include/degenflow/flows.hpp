#pragma once

#include <cstdint>
#include <vector>

#include "degenflow/asymptotics.hpp"
#include "degenflow/linalg.hpp"
#include "degenflow/path.hpp"

namespace degenflow::flows {

// Synthetic gauged self-similar paths.

struct SynthPathConfig {
  linalg::HermitianGenerator lambda;
  double theta = 0.5;        // gauge g_i = exp(theta (1 - 1/i) J)
  Mat rotation;              // skew-Hermitian J; empty selects a seeded random one
  double noise = 0.1;        // |E_i| = noise * i^{-decay}
  double decay = 2.0;
  std::size_t steps = 2000;
  std::uint64_t seed = 1;

  void validate() const;
};

struct SynthGroundTruth {
  linalg::HermitianGenerator lambda;
  Mat limit_gauge;
  std::vector<Mat> gauges;
  std::vector<Mat> filtration;  // V_s pulled back to step 0, orthonormal
};

struct SynthPath {
  path::OperatorPath path;
  SynthGroundTruth truth;
};

/// B_i = g_i e^Lambda g_i^{-1} (I + E_i) with E_i Hermitian.
SynthPath synth_path(const SynthPathConfig& cfg);

/// Seeded random Hermitian matrix with unit spectral norm.
Mat random_hermitian(Eigen::Index n, std::uint64_t seed);
/// Seeded random vector with standard complex Gaussian entries.
Vec random_vector(Eigen::Index n, std::uint64_t seed);

/// H_t = e^{t L} H e^{t L} for a diagonal generator L, so that a section with
/// L-weight w has |s|_{H_t} ~ e^{t w}.
std::vector<linalg::HermitianForm> pullback_gram_path(const linalg::HermitianForm& h, const linalg::HermitianGenerator& l,
                                                      const std::vector<double>& times);

// S^1-invariant metrics on P^1 in moment coordinates x in [-1, 1].
//
// The symplectic potential is u = u_0 + v with
// u_0 = ((1+x) log(1+x) + (1-x) log(1-x)) / 2, so u'' = phi / (1 - x^2) with
// phi = 1 + (1 - x^2) v''. The metric is u'' dx^2 + psi dtheta^2 with
// psi = 1 / u'', area 4 pi, and scalar curvature S = -psi''.

struct SymmetricMetricP1 {
  RVec x;  // uniform grid on [-1, 1]
  RVec v;

  static SymmetricMetricP1 round(int points = 256);
  /// v = eps * (x^2 + x^3) / 2.
  static SymmetricMetricP1 perturbed(double eps, int points = 256);
  double spacing() const { return x(1) - x(0); }
  Eigen::Index points() const { return x.size(); }

  /// Throws DegenerateMetric unless phi > 0 at every node.
  void validate() const;
  RVec phi() const;
  RVec psi() const;
  RVec scalar_curvature() const;
  double sup_curvature_deviation() const;  // max |S - 2|
  double area() const;
  /// Shifts v so that int e^{2(v - x v')} phi dx = 2.
  void normalize();
};

/// Calabi energy 2 pi int (S - 2)^2 dx.
double calabi_energy(const SymmetricMetricP1& metric);

struct KrfOptions {
  double dt = 1e-3;
  double sample_every = 1.0;
  double newton_tol = 1e-12;
  int newton_max = 25;
};

struct KrfSample {
  double t = 0.0;
  SymmetricMetricP1 metric;
  double area_drift = 0.0;  // |area(t) - area(0)| per unit time
};

/// Normalized Kahler-Ricci flow d/dt omega = omega - Ric, reduced to
/// v_t = v - x v' + log(phi) / 2 - a(t), with a(t) fixing the normalization.
/// Implicit Euler with Newton inner solves on a pentadiagonal system.
std::vector<KrfSample> krf_p1(const SymmetricMetricP1& initial, double t_end, const KrfOptions& opts = {});

/// Diagonal Gram matrix of the sections z^0..z^{2r} of O(2r) after the
/// normalization. Gauss-Legendre quadrature with 256 nodes, checked at 512.
linalg::HermitianForm gram_from_metric(const SymmetricMetricP1& metric, int r);

/// 2 pi 2^{2r+1} (r+m)! (r-m)! / (2r+1)! for the round metric.
double round_gram_entry(int r, int m);

struct PipelineOptions {
  KrfOptions krf;
  path::LiftOptions lift;
  asymptotics::Config analysis;
};

struct PipelineOutput {
  std::vector<double> times;
  std::vector<linalg::HermitianForm> grams;
  path::OperatorPath path;
  double lift_residual = 0.0;
  asymptotics::GaugeEstimate gauge;
  std::vector<asymptotics::WeightResult> section_weights;
  std::vector<double> calabi;
  std::vector<double> sup_deviation;
  std::vector<double> area_drift;
  std::vector<double> lambda_norm;  // |log P(B_i)| per sample
  // C_k(t) for k = 2..K; index [k-2][sample].
  std::vector<std::vector<double>> c_k;
  std::vector<bool> c_k_bounded;
};

PipelineOutput pipeline_p1(const SymmetricMetricP1& initial, double t_end, int r, int k_max,
                           const PipelineOptions& opts = {});

}  // namespace degenflow::flows
