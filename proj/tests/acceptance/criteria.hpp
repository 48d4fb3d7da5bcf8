#pragma once

#include <string>

namespace acceptance {

struct Outcome {
  bool pass = false;
  std::string detail;
};

// The recovery suite and the threshold property share the same 50 paths.
struct RecoveryOutcomes {
  Outcome recovery;
  Outcome threshold;
};

RecoveryOutcomes recovery_and_threshold();
Outcome log_norm_convexity();
Outcome initial_ideal_flatness();
Outcome pullback_gram_weights();
Outcome futaki_suite();
Outcome soliton_suite();
Outcome p1_pipeline();
Outcome cli_determinism();

}  // namespace acceptance
