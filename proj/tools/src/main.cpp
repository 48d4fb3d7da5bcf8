#include <cstdio>
#include <functional>
#include <iostream>

#include <CLI11.hpp>

#include <degenflow/errors.hpp>
#include <degenflow/parallel.hpp>

#include "commands.hpp"

using namespace degenflow;
using namespace degenflow::cli;

namespace {

// Runs one subcommand and writes exactly one report. Returns the exit code.
int dispatch(const std::string& command, const json& config, const std::string& report_path,
             const std::function<json()>& body) {
  json report;
  int code = 0;
  try {
    report = body();
    report["status"] = "ok";
  } catch (const Error& e) {
    report = json::object();
    report["status"] = "error";
    report["error"] = {{"name", e.name()}, {"module", e.module()}, {"message", e.what()}};
    code = e.is_io_error() ? 2 : 1;
    std::cerr << "degenflow " << command << ": " << e.name() << " (" << e.module() << "): " << e.what() << "\n";
  } catch (const std::exception& e) {
    report = json::object();
    report["status"] = "error";
    report["error"] = {{"name", "InternalError"}, {"module", "cli"}, {"message", e.what()}};
    code = 1;
    std::cerr << "degenflow " << command << ": " << e.what() << "\n";
  }
  report["command"] = command;
  report["config"] = config;
  try {
    if (report_path.empty())
      std::cout << report.dump(2) << "\n";
    else
      io::write_json_file(report_path, report);
  } catch (const Error& e) {
    std::cerr << "degenflow " << command << ": " << e.what() << "\n";
    return 2;
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Degeneration data of self-similar operator paths"};
  app.require_subcommand(1);
  std::string report;

  GenPathOptions gen;
  auto* gen_cmd = app.add_subcommand("gen-path", "Write a synthetic gauged path with planted generator");
  gen_cmd->add_option("--dim", gen.dim, "Dimension of E")->capture_default_str();
  gen_cmd->add_option("--spectrum", gen.spectrum, "Distinct eigenvalues, comma separated")->capture_default_str();
  gen_cmd->add_option("--mults", gen.mults, "Multiplicities, comma separated")->capture_default_str();
  gen_cmd->add_option("--steps", gen.steps)->capture_default_str();
  gen_cmd->add_option("--noise", gen.noise)->capture_default_str();
  gen_cmd->add_option("--decay", gen.decay)->capture_default_str();
  gen_cmd->add_option("--theta", gen.theta, "Gauge rotation angle")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed)->capture_default_str();
  gen_cmd->add_option("--kind", gen.kind, "increments or cumulative")->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Path file")->required();
  gen_cmd->add_option("--report", report, "Report JSON (stdout if omitted)");

  AnalyzeOptions an;
  auto* an_cmd = app.add_subcommand("analyze-path", "Limit generator, filtration and weights of a path");
  an_cmd->add_option("--input", an.input)->required();
  an_cmd->add_option("--rep", an.rep, "std, dual, sym:k, ext:p, tensor(a,b)")->capture_default_str();
  an_cmd->add_option("--star-tol", an.star_tol)->capture_default_str();
  an_cmd->add_option("--snap-tol", an.snap_tol, "Negative selects 1e-2 of the minimal weight gap")->capture_default_str();
  an_cmd->add_option("--filt-tol", an.filt_tol)->capture_default_str();
  an_cmd->add_option("--lambda-zero-tol", an.lambda_zero_tol)->capture_default_str();
  an_cmd->add_option("--probes", an.probes, "Random probe vectors besides the basis")->capture_default_str();
  an_cmd->add_option("--seed", an.seed)->capture_default_str();
  an_cmd->add_option("--report", report);

  RingOptions ring;
  auto* ring_cmd = app.add_subcommand("ring-degenerate", "Filtration, initial ideal and Rees data of a graded ring");
  ring_cmd->add_option("--ring", ring.ring)->required();
  ring_cmd->add_option("--weights", ring.weights, "Variable weights, comma separated")->required();
  ring_cmd->add_flag("--perturb", ring.perturb, "Also search a rational perturbation");
  ring_cmd->add_option("--report", report);

  FutakiOptions fut;
  auto* fut_cmd = app.add_subcommand("futaki", "Futaki limit from a polytope or weight table");
  fut_cmd->add_option("--polytope", fut.polytope);
  fut_cmd->add_option("--weights-table", fut.table);
  fut_cmd->add_option("--generator", fut.generator, "Central-fibre generator weights for Fut and N2");
  fut_cmd->add_option("--v", fut.v, "Soliton vector V (default 0)");
  fut_cmd->add_option("--vprime", fut.vprime, "Direction V'");
  fut_cmd->add_option("--kmax", fut.kmax, "Override the polytope kmax");
  fut_cmd->add_option("--report", report);

  SolitonCliOptions sol;
  auto* sol_cmd = app.add_subcommand("soliton", "Soliton vector by damped Newton");
  sol_cmd->add_option("--polytope", sol.polytope);
  sol_cmd->add_option("--weights-table", sol.table);
  sol_cmd->add_option("--kmax", sol.kmax);
  sol_cmd->add_option("--tol", sol.tol)->capture_default_str();
  sol_cmd->add_option("--max-iter", sol.max_iter)->capture_default_str();
  sol_cmd->add_option("--report", report);

  FlowOptions flow;
  auto* flow_cmd = app.add_subcommand("p1-flow", "Symmetric Kahler-Ricci flow on P^1 through the Gram pipeline");
  flow_cmd->add_option("--perturb", flow.perturb)->capture_default_str();
  flow_cmd->add_option("--T", flow.t_end)->capture_default_str();
  flow_cmd->add_option("--r", flow.r)->capture_default_str();
  flow_cmd->add_option("--K", flow.k_max)->capture_default_str();
  flow_cmd->add_option("--grid", flow.grid)->capture_default_str();
  flow_cmd->add_option("--dt", flow.dt)->capture_default_str();
  flow_cmd->add_option("--lift-tol", flow.lift_tol)->capture_default_str();
  flow_cmd->add_option("--lambda-zero-tol", flow.lambda_zero_tol)->capture_default_str();
  flow_cmd->add_option("--csv", flow.csv);
  flow_cmd->add_option("--report", report);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (*gen_cmd) return dispatch("gen-path", config_json(gen), report, [&] { return run_gen_path(gen); });
  if (*an_cmd) return dispatch("analyze-path", config_json(an), report, [&] { return run_analyze_path(an); });
  if (*ring_cmd) return dispatch("ring-degenerate", config_json(ring), report, [&] { return run_ring_degenerate(ring); });
  if (*fut_cmd) return dispatch("futaki", config_json(fut), report, [&] { return run_futaki(fut); });
  if (*sol_cmd) return dispatch("soliton", config_json(sol), report, [&] { return run_soliton(sol); });
  return dispatch("p1-flow", config_json(flow), report, [&] { return run_p1_flow(flow); });
}
