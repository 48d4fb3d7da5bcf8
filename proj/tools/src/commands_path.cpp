#include <algorithm>
#include <numeric>

#include <degenflow/asymptotics.hpp>
#include <degenflow/errors.hpp>
#include <degenflow/flows.hpp>
#include <degenflow/reps.hpp>

#include "commands.hpp"

namespace degenflow::cli {

namespace {

[[noreturn]] void bad_config(const std::string& msg) { throw Error(ErrorKind::ConfigInvalid, "cli", msg); }

void require_positive(double v, const char* name) {
  if (!(v > 0.0)) bad_config(std::string(name) + " must be positive");
}

}  // namespace

json config_json(const GenPathOptions& o) {
  return {{"dim", o.dim},     {"spectrum", o.spectrum}, {"mults", o.mults}, {"steps", o.steps},
          {"noise", o.noise}, {"decay", o.decay},       {"theta", o.theta}, {"seed", o.seed},
          {"kind", o.kind},   {"out", o.out}};
}

json config_json(const AnalyzeOptions& o) {
  return {{"input", o.input},
          {"rep", o.rep},
          {"star_tol", o.star_tol},
          {"snap_tol", o.snap_tol},
          {"filt_tol", o.filt_tol},
          {"lambda_zero_tol", o.lambda_zero_tol},
          {"probes", o.probes},
          {"seed", o.seed}};
}

json run_gen_path(const GenPathOptions& o) {
  std::vector<double> spectrum = io::parse_real_list(o.spectrum);
  const std::vector<int> mults = io::parse_int_list(o.mults);
  if (spectrum.size() != mults.size()) bad_config("spectrum and mults differ in length");
  if (std::any_of(mults.begin(), mults.end(), [](int m) { return m < 1; })) bad_config("multiplicities must be >= 1");
  if (std::accumulate(mults.begin(), mults.end(), 0) != o.dim) bad_config("multiplicities must sum to dim");
  if (o.kind != "increments" && o.kind != "cumulative") bad_config("kind must be increments or cumulative");

  std::vector<double> diag;
  for (std::size_t s = 0; s < spectrum.size(); ++s) diag.insert(diag.end(), static_cast<std::size_t>(mults[s]), spectrum[s]);
  flows::SynthPathConfig cfg;
  cfg.lambda = linalg::diagonal_generator(diag);
  if (cfg.lambda.levels() != spectrum.size()) bad_config("spectrum values must be distinct");
  cfg.theta = o.theta;
  cfg.noise = o.noise;
  cfg.decay = o.decay;
  cfg.steps = o.steps;
  cfg.seed = o.seed;
  const flows::SynthPath synth = flows::synth_path(cfg);
  const auto& p = synth.path;

  json file = io::path_to_json(p);
  if (o.kind == "cumulative") {
    if (!p.cumulative_representable()) bad_config("cumulative operators are not representable; use increments");
    json mats = json::array();
    Mat a = Mat::Identity(p.dim(), p.dim());
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (i > 0) a = p.step(i) * a;
      mats.push_back(io::matrix_to_json(a));
    }
    file["kind"] = "cumulative";
    file["matrices"] = std::move(mats);
  }
  json dims = json::array();
  for (const Mat& f : synth.truth.filtration) dims.push_back(f.cols());
  const json truth = {{"lambda_spectrum", synth.truth.lambda.spectrum},
                      {"multiplicities", synth.truth.lambda.multiplicities},
                      {"filtration_dims", dims}};
  file["truth"] = truth;
  io::write_json_file(o.out, file);
  return {{"out", o.out}, {"steps", p.size() - 1}, {"dim", p.dim()}, {"truth", truth}};
}

json run_analyze_path(const AnalyzeOptions& o) {
  require_positive(o.star_tol, "star_tol");
  require_positive(o.filt_tol, "filt_tol");
  require_positive(o.lambda_zero_tol, "lambda_zero_tol");
  if (o.snap_tol == 0.0) bad_config("snap_tol must be positive (or negative for automatic)");
  if (o.probes < 0) bad_config("probes must be >= 0");

  path::OperatorPath raw = io::path_from_json(io::read_json_file(o.input));
  const bool resampled = !raw.unit_spaced();
  if (resampled) raw = path::resample_unit(raw);
  const auto orth = path::to_orthonormal(raw);
  const auto desc = reps::RepDescriptor::parse(o.rep);
  desc.validate(raw.dim());

  asymptotics::Config cfg;
  cfg.star_tol = o.star_tol;
  cfg.snap_tol = o.snap_tol;
  cfg.filt_tol = o.filt_tol;
  cfg.lambda_zero_tol = o.lambda_zero_tol;
  const auto gauge = asymptotics::estimate_gauge(orth.path, cfg);
  auto filt = asymptotics::filtration(orth.path, gauge, cfg);
  filt = asymptotics::splitting(orth.path, gauge, std::move(filt));

  // Probes: the basis of the representation space in the input coordinates,
  // then seeded random vectors.
  const Mat to_orth = reps::induce(desc, orth.to_orthonormal);
  const Eigen::Index rep_dim = to_orth.rows();
  std::vector<std::string> ids;
  std::vector<Vec> probes;
  for (Eigen::Index j = 0; j < rep_dim; ++j) {
    ids.push_back("e" + std::to_string(j));
    probes.push_back(to_orth * Vec::Unit(rep_dim, j));
  }
  for (int j = 0; j < o.probes; ++j) {
    ids.push_back("random" + std::to_string(j));
    probes.push_back(to_orth * flows::random_vector(rep_dim, o.seed * 1000003ULL + static_cast<std::uint64_t>(j)));
  }
  json weights = json::array();
  const auto ws = asymptotics::weights(orth.path, gauge, probes, desc, cfg);
  for (std::size_t k = 0; k < ws.size(); ++k)
    weights.push_back({{"vector_id", ids[k]},
                       {"raw", ws[k].raw},
                       {"snapped", ws[k].snapped},
                       {"level", ws[k].level},
                       {"tail_slope", ws[k].tail_slope},
                       {"mean_rate", ws[k].mean_rate}});

  json dims = json::array();
  for (Eigen::Index d : filt.dims) dims.push_back(d);
  return {{"lambda_spectrum", gauge.lambda.spectrum},
          {"multiplicities", gauge.lambda.multiplicities},
          {"residuals",
           {{"star", gauge.residual_star},
            {"gauge", gauge.residual_gauge},
            {"filtration_stabilization", filt.stabilization},
            {"direct_sum_margin", filt.direct_sum_margin}}},
          {"case", gauge.case_II ? "II" : "I"},
          {"lambda_norm", gauge.lambda.norm()},
          {"filtration", {{"jumps", filt.jumps}, {"dims", dims}}},
          {"weights", weights},
          {"rep", desc.to_string()},
          {"steps", orth.path.size() - 1},
          {"resampled", resampled}};
}

}  // namespace degenflow::cli
