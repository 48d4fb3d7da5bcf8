#include <algorithm>
#include <charconv>

#include <degenflow/errors.hpp>
#include <degenflow/flows.hpp>

#include "commands.hpp"

namespace degenflow::cli {

namespace {

// Shortest decimal that reads back to the same double.
std::string num(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return {buf, res.ptr};
}

}  // namespace

json config_json(const FlowOptions& o) {
  return {{"perturb", o.perturb}, {"T", o.t_end},         {"r", o.r},
          {"K", o.k_max},         {"grid", o.grid},       {"dt", o.dt},
          {"lift_tol", o.lift_tol}, {"lambda_zero_tol", o.lambda_zero_tol}, {"csv", o.csv}};
}

json run_p1_flow(const FlowOptions& o) {
  auto bad = [](const std::string& m) { throw Error(ErrorKind::ConfigInvalid, "cli", m); };
  if (!(o.t_end >= 1.0)) bad("T must be at least 1");
  if (o.r < 1 || o.r > 8) bad("r must lie in 1..8");
  if (o.k_max < 2 || o.k_max > 6) bad("K must lie in 2..6");
  if (o.grid < 16 || o.grid > 8192) bad("grid must lie in 16..8192");
  if (!(o.dt > 0.0) || !(o.lift_tol > 0.0) || !(o.lambda_zero_tol > 0.0)) bad("dt and tolerances must be positive");

  flows::PipelineOptions opts;
  opts.krf.dt = o.dt;
  opts.lift.lift_tol = o.lift_tol;
  opts.analysis.lambda_zero_tol = o.lambda_zero_tol;
  const auto initial = flows::SymmetricMetricP1::perturbed(o.perturb, o.grid);
  const auto out = flows::pipeline_p1(initial, o.t_end, o.r, o.k_max, opts);

  if (!o.csv.empty()) {
    std::string csv = "t,calabi_energy,sup|S-Sbar|,lambda_norm_estimate";
    for (int k = 2; k <= o.k_max; ++k) csv += ",C_" + std::to_string(k);
    csv += "\n";
    for (std::size_t i = 0; i < out.times.size(); ++i) {
      csv += num(out.times[i]) + "," + num(out.calabi[i]) + "," + num(out.sup_deviation[i]) + "," +
             num(out.lambda_norm[i]);
      for (const auto& c : out.c_k) csv += "," + num(c[i]);
      csv += "\n";
    }
    io::write_text_file(o.csv, csv);
  }

  json ck = json::array();
  for (std::size_t j = 0; j < out.c_k.size(); ++j)
    ck.push_back({{"k", static_cast<int>(j) + 2},
                  {"final", out.c_k[j].back()},
                  {"sup", *std::max_element(out.c_k[j].begin(), out.c_k[j].end())},
                  {"stabilizes", static_cast<bool>(out.c_k_bounded[j])}});
  json sections = json::array();
  for (std::size_t j = 0; j < out.section_weights.size(); ++j)
    sections.push_back({{"vector_id", "z^" + std::to_string(j)},
                        {"raw", out.section_weights[j].raw},
                        {"snapped", out.section_weights[j].snapped}});
  return {{"samples", out.times.size()},
          {"calabi_initial", out.calabi.front()},
          {"calabi_final", out.calabi.back()},
          {"sup_deviation_final", out.sup_deviation.back()},
          {"area_drift_max", *std::max_element(out.area_drift.begin(), out.area_drift.end())},
          {"lift_residual", out.lift_residual},
          {"lambda_spectrum", out.gauge.lambda.spectrum},
          {"lambda_norm", out.gauge.lambda.norm()},
          {"case", out.gauge.case_II ? "II" : "I"},
          {"residuals", {{"star", out.gauge.residual_star}, {"gauge", out.gauge.residual_gauge}}},
          {"section_weights", sections},
          {"c_k", ck}};
}

}  // namespace degenflow::cli
