#include <degenflow/errors.hpp>
#include <degenflow/ringfilt.hpp>

#include "commands.hpp"

namespace degenflow::cli {

namespace {

std::string rational_string(const ringfilt::Rational& q) {
  return q.den == 1 ? std::to_string(q.num) : std::to_string(q.num) + "/" + std::to_string(q.den);
}

}  // namespace

json config_json(const RingOptions& o) { return {{"ring", o.ring}, {"weights", o.weights}, {"perturb", o.perturb}}; }

json run_ring_degenerate(const RingOptions& o) {
  const auto ring = io::ring_from_json(io::read_json_file(o.ring));
  const std::vector<double> w = io::parse_real_list(o.weights);
  if (static_cast<int>(w.size()) != ring.vars())
    throw Error(ErrorKind::ConfigInvalid, "cli", "need one weight per variable");

  const auto filt = ringfilt::ring_filtration(ring, w);
  json degrees = json::array();
  for (const auto& d : filt.degrees) {
    json dims = json::array();
    for (Eigen::Index q : d.piece_dims) dims.push_back(q);
    degrees.push_back({{"k", d.degree}, {"jumps", d.jumps}, {"piece_dims", dims}, {"weights", d.weights}});
  }

  const auto init = ringfilt::initial_ideal(ring, w);
  json qdims = json::array();
  for (Eigen::Index q : init.quotient_dims) qdims.push_back(q);
  json forms = json::array();
  for (const auto& p : init.generator_initial_forms) forms.push_back(io::polynomial_to_json(p));
  json initial = {{"quotient_dims", qdims},
                  {"flat", init.flat},
                  {"generated_by_generator_forms", init.generated_by_generator_forms},
                  {"generator_initial_forms", forms}};

  const auto rees = ringfilt::regrade(ring, filt);
  json shifted = json::array();
  for (const auto& q : rees.shifted_weights) shifted.push_back(rational_string(q));
  json gens = json::array();
  for (const auto& g : rees.generators)
    gens.push_back({{"degree", g.degree}, {"level", g.level}, {"element", io::polynomial_to_json(g.element)}});
  json rees_json = {{"underline_lambda", rees.underline_lambda},
                    {"denominator", rees.denominator},
                    {"shifted_weights", shifted},
                    {"levels", rees.levels},
                    {"generators", gens},
                    {"positive", rees.positive}};

  json out = {{"vars", ring.vars()},
              {"K", ring.truncation()},
              {"weights", w},
              {"filtration", degrees},
              {"multiplicativity_defect", filt.multiplicativity_defect},
              {"semigroup_defect", filt.semigroup_defect},
              {"products_checked", filt.products_checked},
              {"initial_ideal", initial},
              {"rees", rees_json}};
  if (o.perturb) {
    const auto pr = ringfilt::perturb_rational(ring, w);
    json gamma = json::array();
    for (const auto& q : pr.gamma) gamma.push_back(rational_string(q));
    out["perturbation"] = {{"gamma", gamma}, {"distance", pr.distance}, {"same_initial_ideal", pr.same_initial_ideal}};
  }
  return out;
}

}  // namespace degenflow::cli
