#include <benchmark/benchmark.h>

#include "degenflow/asymptotics.hpp"
#include "degenflow/flows.hpp"
#include "degenflow/futaki.hpp"
#include "degenflow/io.hpp"
#include "degenflow/reps.hpp"
#include "fixtures.hpp"

using namespace degenflow;

namespace {

flows::SynthPathConfig path_config(Eigen::Index n, std::size_t steps) {
  flows::SynthPathConfig cfg;
  std::vector<double> levels;
  std::vector<int> mult;
  for (Eigen::Index i = 0; i < n; ++i) {
    levels.push_back(1.0 - 0.5 * static_cast<double>(i));
    mult.push_back(1);
  }
  cfg.lambda = fixtures::planted_generator(levels, mult, 3);
  cfg.steps = steps;
  cfg.noise = 0.1;
  cfg.seed = 3;
  return cfg;
}

void BM_SynthPath(benchmark::State& state) {
  const auto cfg = path_config(state.range(0), 1000);
  for (auto _ : state) benchmark::DoNotOptimize(flows::synth_path(cfg));
}
BENCHMARK(BM_SynthPath)->Arg(3)->Arg(6)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_EstimateGauge(benchmark::State& state) {
  const auto synth = flows::synth_path(path_config(state.range(0), 1000));
  for (auto _ : state) benchmark::DoNotOptimize(asymptotics::estimate_gauge(synth.path));
}
BENCHMARK(BM_EstimateGauge)->Arg(3)->Arg(6)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_Filtration(benchmark::State& state) {
  const auto synth = flows::synth_path(path_config(state.range(0), 1000));
  const auto gauge = asymptotics::estimate_gauge(synth.path);
  for (auto _ : state) benchmark::DoNotOptimize(asymptotics::filtration(synth.path, gauge));
}
BENCHMARK(BM_Filtration)->Arg(3)->Arg(6)->Arg(12)->Unit(benchmark::kMillisecond);

// Batched weights against the number of probe vectors.
void BM_Weights(benchmark::State& state) {
  const auto synth = flows::synth_path(path_config(6, 1000));
  const auto gauge = asymptotics::estimate_gauge(synth.path);
  std::vector<Vec> vs;
  for (std::int64_t j = 0; j < state.range(0); ++j) vs.push_back(flows::random_vector(6, 50 + static_cast<std::uint64_t>(j)));
  for (auto _ : state)
    benchmark::DoNotOptimize(asymptotics::weights(synth.path, gauge, vs, reps::RepDescriptor::standard()));
}
BENCHMARK(BM_Weights)->Arg(1)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_InduceSym(benchmark::State& state) {
  const Mat a = flows::random_hermitian(4, 9) + 3.0 * Mat::Identity(4, 4);
  const auto rep = reps::RepDescriptor::sym(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(reps::induce(rep, a));
}
BENCHMARK(BM_InduceSym)->Arg(2)->Arg(4)->Arg(6);

void BM_FutakiBlowUp(benchmark::State& state) {
  const auto poly = io::polytope_from_json(io::read_json_file(std::string(DEGENFLOW_DATA_DIR) + "/bl1p2.json"));
  const auto t = futaki::weights_from_polytope(poly);
  RVec v = RVec::Zero(2), e = RVec::Zero(2);
  e(0) = 1.0;
  for (auto _ : state) benchmark::DoNotOptimize(futaki::futaki_limit(t, v, e));
}
BENCHMARK(BM_FutakiBlowUp)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
