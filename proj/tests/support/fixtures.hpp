#pragma once

#include <algorithm>
#include <random>
#include <vector>

#include "degenflow/flows.hpp"
#include "degenflow/linalg.hpp"

namespace degenflow::fixtures {

// Random Hermitian generator with the given distinct levels and a random
// unitary eigenbasis.
inline linalg::HermitianGenerator planted_generator(const std::vector<double>& levels, const std::vector<int>& mult,
                                                    std::uint64_t seed) {
  Eigen::Index n = 0;
  for (int m : mult) n += m;
  const Mat u = linalg::closest_unitary(flows::random_hermitian(n, seed) +
                                        cplx(0.0, 1.0) * flows::random_hermitian(n, seed + 17));
  RVec d(n);
  Eigen::Index at = 0;
  for (std::size_t s = 0; s < levels.size(); ++s)
    for (int k = 0; k < mult[s]; ++k) d(at++) = levels[s];
  const Mat h = u * d.cast<cplx>().asDiagonal() * u.adjoint();
  return linalg::spectral_decompose(0.5 * (h + h.adjoint()), 1e-6);
}

struct RandomPlant {
  flows::SynthPathConfig cfg;
  std::vector<double> levels;  // descending
  std::vector<int> mult;
};

// dim <= 12, at most 3 distinct levels separated by at least 0.4.
inline RandomPlant random_plant(std::uint64_t seed, std::size_t steps = 2000) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> nlev(1, 3);
  std::uniform_int_distribution<int> mdist(1, 4);
  std::uniform_real_distribution<double> start(-1.5, 0.5);
  std::uniform_real_distribution<double> gap(0.4, 1.2);
  RandomPlant p;
  const int r = nlev(rng);
  double v = start(rng);
  for (int s = 0; s < r; ++s) {
    p.levels.push_back(v);
    p.mult.push_back(mdist(rng));
    v += gap(rng);
  }
  std::reverse(p.levels.begin(), p.levels.end());
  std::reverse(p.mult.begin(), p.mult.end());
  p.cfg.lambda = planted_generator(p.levels, p.mult, seed * 31 + 5);
  p.cfg.theta = std::uniform_real_distribution<double>(0.1, 1.0)(rng);
  p.cfg.noise = std::uniform_real_distribution<double>(0.0, 0.3)(rng);
  p.cfg.decay = 2.0;
  p.cfg.steps = steps;
  p.cfg.seed = seed;
  return p;
}

}  // namespace degenflow::fixtures
