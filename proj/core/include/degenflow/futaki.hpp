#pragma once

#include <optional>
#include <vector>

#include "degenflow/linalg.hpp"

namespace degenflow::futaki {

/// Torus weights of a basis of R_k for k = 1..kmax; degrees[k-1] has one
/// row per basis element and one column per torus generator.
struct TorusWeightTable {
  int n = 0;
  int rank = 0;
  std::vector<RMat> degrees;
  bool ehrhart_exact = false;          // N(k) is a degree-n polynomial on 0..kmax
  double hilbert_fit_residual = 0.0;   // relative residual of a degree-n fit of N(k)

  int kmax() const { return static_cast<int>(degrees.size()); }
  Eigen::Index count(int k) const;
  const RMat& weights(int k) const;
  /// Throws ConfigInvalid on ragged data; fills the Hilbert diagnostics.
  void validate();
};

struct PolytopeData {
  int dim = 0;
  RMat vertices;  // one vertex per row
  int kmax = 0;
};

/// Half-spaces a_i . x <= b_i describing conv(vertices). Throws
/// NotFullDimensional.
struct HalfSpaces {
  RMat a;
  RVec b;
};
HalfSpaces facets(const PolytopeData& p);

/// Lattice points of k P, lexicographic order.
RMat lattice_points(const PolytopeData& p, int k);
TorusWeightTable weights_from_polytope(const PolytopeData& p);
/// Euclidean volume of P (exact for the facet decomposition used).
double polytope_volume(const PolytopeData& p);

/// sum_w exp(<w, v>) over the degree-k weights, fixed order.
double trace_exp(const TorusWeightTable& t, const RVec& v, int k);

struct Extrapolation {
  double value = 0.0;
  double shifted = 0.0;        // window moved down by one
  double dropped = 0.0;        // smallest k removed
  double residual = 0.0;       // max relative fit residual
  int k_lo = 0;
  int k_hi = 0;
  std::vector<double> per_k;   // normalized data y(k) / k^p over the window
};

/// Fut_V(V') = -lim k^{-n-1} sum_w <w, V'> e^{<w, V>/k}. The soliton vector
/// acts on degree-k sections through V/k so that the sums grow polynomially;
/// the limit is the constant term of a fit in powers of 1/k over
/// [kmax/2, kmax]. Throws UnstableExtrapolation when shifting the window by
/// one moves the value by more than 1e-3 relative.
Extrapolation futaki_limit(const TorusWeightTable& t, const RVec& v, const RVec& v_prime);

struct SolitonOptions {
  double tol = 1e-8;
  int max_iter = 100;
};

struct SolitonResult {
  RVec v;
  int iterations = 0;
  double residual = 0.0;                 // max_i |Fut_V(e_i)|
  std::vector<double> residual_history;
  std::vector<double> objective_history; // finite-k proxy of the convex functional
  std::vector<double> min_hessian_eigenvalue;
};

/// Damped Newton on V -> (Fut_V(e_i))_i from V = 0. Throws NonConvexHessian
/// if the Jacobian is not positive-definite and NoConvergence after
/// max_iter iterations.
SolitonResult soliton_vector(const TorusWeightTable& t, const SolitonOptions& opts = {});

/// Root of s -> Fut_{s d}(d) by bisection on [-bound, bound].
double soliton_bisection(const TorusWeightTable& t, const RVec& direction, double bound = 4.0, double tol = 1e-12);

/// Proxy objective F(V) = lim k^{-n} sum_w e^{<w, V>/k}; its gradient is
/// -Fut_V.
double soliton_objective(const TorusWeightTable& t, const RVec& v);

struct FutakiReport {
  double fut = 0.0;
  double n2 = 0.0;
  std::optional<double> ratio;   // undefined when N_2 vanishes
  Extrapolation fut_fit;
  Extrapolation n2_fit;
  std::vector<double> trace;     // Tr A_k
  std::vector<double> trace_sq;  // Tr A_k^2
};

/// Fut and the centered second moment N_2 of a generator acting on a
/// central fibre with weights gen[k-1] on R_k. n is the fibre dimension.
FutakiReport df_and_n2(int n, const std::vector<RVec>& gen);

}  // namespace degenflow::futaki
