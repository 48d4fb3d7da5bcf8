#include <degenflow/errors.hpp>
#include <degenflow/futaki.hpp>

#include "commands.hpp"

namespace degenflow::cli {

namespace {

[[noreturn]] void bad_config(const std::string& msg) { throw Error(ErrorKind::ConfigInvalid, "cli", msg); }

futaki::TorusWeightTable load_table(const std::string& polytope, const std::string& table, int kmax,
                                    json& source) {
  if (polytope.empty() == table.empty()) bad_config("give exactly one of --polytope and --weights-table");
  if (kmax < 0) bad_config("kmax must be positive");
  if (!polytope.empty()) {
    auto p = io::polytope_from_json(io::read_json_file(polytope));
    if (kmax > 0) p.kmax = kmax;
    auto t = futaki::weights_from_polytope(p);
    json counts = json::array();
    for (int k = 1; k <= t.kmax(); ++k) counts.push_back(t.count(k));
    source = {{"kind", "polytope"},
              {"dim", p.dim},
              {"kmax", p.kmax},
              {"volume", futaki::polytope_volume(p)},
              {"counts", counts},
              {"ehrhart_exact", t.ehrhart_exact}};
    return t;
  }
  auto t = io::weight_table_from_json(io::read_json_file(table));
  if (kmax > 0) {
    if (kmax > t.kmax()) bad_config("kmax exceeds the weight table");
    t.degrees.resize(static_cast<std::size_t>(kmax));
    t.validate();
  }
  source = {{"kind", "weight_table"},
            {"n", t.n},
            {"rank", t.rank},
            {"kmax", t.kmax()},
            {"ehrhart_exact", t.ehrhart_exact},
            {"hilbert_fit_residual", t.hilbert_fit_residual}};
  return t;
}

RVec vector_option(const std::string& text, int rank, const char* name) {
  if (text.empty()) return RVec::Zero(rank);
  const auto v = io::parse_real_list(text);
  if (static_cast<int>(v.size()) != rank) bad_config(std::string(name) + " must have one entry per torus generator");
  return Eigen::Map<const RVec>(v.data(), rank);
}

json extrapolation_json(const futaki::Extrapolation& e) {
  return {{"value", e.value},     {"shifted_window", e.shifted}, {"dropped_k", e.dropped},
          {"residual", e.residual}, {"k_lo", e.k_lo},             {"k_hi", e.k_hi}};
}

std::vector<double> to_std(const RVec& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

json config_json(const FutakiOptions& o) {
  return {{"polytope", o.polytope}, {"weights_table", o.table}, {"generator", o.generator},
          {"v", o.v},               {"vprime", o.vprime},       {"kmax", o.kmax}};
}

json config_json(const SolitonCliOptions& o) {
  return {{"polytope", o.polytope}, {"weights_table", o.table}, {"kmax", o.kmax}, {"tol", o.tol},
          {"max_iter", o.max_iter}};
}

json run_futaki(const FutakiOptions& o) {
  if (!o.generator.empty()) {
    // Central-fibre mode: {"n": int, "weights": [[a_1 .. a_N(k)] for k = 1..]}.
    if (!o.polytope.empty() || !o.table.empty()) bad_config("--generator excludes --polytope and --weights-table");
    const json j = io::read_json_file(o.generator);
    if (!j.is_object() || !j.contains("n") || !j["n"].is_number_integer() || !j.contains("weights") ||
        !j["weights"].is_array())
      throw Error(ErrorKind::InputParseError, "io", "generator file needs integer 'n' and array 'weights'");
    std::vector<RVec> gen;
    for (const auto& row : j["weights"]) {
      if (!row.is_array()) throw Error(ErrorKind::InputParseError, "io", "generator weights must be arrays");
      RVec a(static_cast<Eigen::Index>(row.size()));
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (!row[i].is_number()) throw Error(ErrorKind::InputParseError, "io", "generator weight is not a number");
        a(static_cast<Eigen::Index>(i)) = row[i].get<double>();
      }
      gen.push_back(std::move(a));
    }
    const auto rep = futaki::df_and_n2(j["n"].get<int>(), gen);
    json out = {{"fut", rep.fut}, {"n2", rep.n2}, {"fut_fit", extrapolation_json(rep.fut_fit)},
                {"n2_fit", extrapolation_json(rep.n2_fit)}};
    out["ratio"] = rep.ratio ? json(*rep.ratio) : json(nullptr);
    return out;
  }
  json source;
  const auto t = load_table(o.polytope, o.table, o.kmax, source);
  if (o.vprime.empty()) bad_config("--vprime is required");
  const RVec v = vector_option(o.v, t.rank, "--v");
  const RVec vp = vector_option(o.vprime, t.rank, "--vprime");
  const auto f = futaki::futaki_limit(t, v, vp);
  return {{"fut", f.value}, {"v", to_std(v)}, {"vprime", to_std(vp)}, {"fit", extrapolation_json(f)}, {"source", source}};
}

json run_soliton(const SolitonCliOptions& o) {
  if (!(o.tol > 0.0)) bad_config("tol must be positive");
  if (o.max_iter < 1) bad_config("max_iter must be >= 1");
  json source;
  const auto t = load_table(o.polytope, o.table, o.kmax, source);
  futaki::SolitonOptions so;
  so.tol = o.tol;
  so.max_iter = o.max_iter;
  const auto s = futaki::soliton_vector(t, so);
  return {{"v", to_std(s.v)},
          {"iterations", s.iterations},
          {"residual", s.residual},
          {"residual_history", s.residual_history},
          {"objective_history", s.objective_history},
          {"min_hessian_eigenvalue", s.min_hessian_eigenvalue},
          {"source", source}};
}

}  // namespace degenflow::cli
