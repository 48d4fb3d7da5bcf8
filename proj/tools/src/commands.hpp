#pragma once

#include <cstdint>
#include <string>

#include <degenflow/io.hpp>

// Each subcommand fills its section of the report and returns the result
// object; main() adds the resolved config, the status and any error.
namespace degenflow::cli {

using io::json;

struct GenPathOptions {
  int dim = 6;
  std::string spectrum = "2,1,0";
  std::string mults = "1,2,3";
  std::size_t steps = 2000;
  double noise = 0.1;
  double decay = 2.0;
  double theta = 0.5;
  std::uint64_t seed = 1;
  std::string kind = "increments";
  std::string out;
};

struct AnalyzeOptions {
  std::string input;
  std::string rep = "std";
  double star_tol = 1e-3;
  double snap_tol = -1.0;
  double filt_tol = 1e-4;
  double lambda_zero_tol = 1e-3;
  int probes = 4;
  std::uint64_t seed = 1;
};

struct RingOptions {
  std::string ring;
  std::string weights;
  bool perturb = false;
};

struct FutakiOptions {
  std::string polytope;
  std::string table;
  std::string generator;
  std::string v;
  std::string vprime;
  int kmax = 0;
};

struct SolitonCliOptions {
  std::string polytope;
  std::string table;
  int kmax = 0;
  double tol = 1e-8;
  int max_iter = 100;
};

struct FlowOptions {
  double perturb = 0.1;
  double t_end = 50.0;
  int r = 2;
  int k_max = 3;
  int grid = 256;
  double dt = 1e-3;
  double lift_tol = 1e-8;
  double lambda_zero_tol = 1e-3;
  std::string csv;
};

json config_json(const GenPathOptions& o);
json config_json(const AnalyzeOptions& o);
json config_json(const RingOptions& o);
json config_json(const FutakiOptions& o);
json config_json(const SolitonCliOptions& o);
json config_json(const FlowOptions& o);

json run_gen_path(const GenPathOptions& o);
json run_analyze_path(const AnalyzeOptions& o);
json run_ring_degenerate(const RingOptions& o);
json run_futaki(const FutakiOptions& o);
json run_soliton(const SolitonCliOptions& o);
json run_p1_flow(const FlowOptions& o);

}  // namespace degenflow::cli
