#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "degenflow/futaki.hpp"
#include "degenflow/path.hpp"
#include "degenflow/ringfilt.hpp"

// JSON readers and writers. Every reader throws InputParseError on malformed
// or non-finite input. Doubles are written in shortest round-trip form, so
// written files re-read bit for bit.
namespace degenflow::io {

using json = nlohmann::json;

json read_json_file(const std::string& filename);
/// Pretty-printed with a trailing newline. Throws InputParseError if the file
/// cannot be written.
void write_json_file(const std::string& filename, const json& j);
void write_text_file(const std::string& filename, const std::string& text);

/// Throws InputParseError on any NaN or infinite number inside j.
void require_finite(const json& j, const std::string& where);

json complex_to_json(cplx z);
cplx complex_from_json(const json& j);
/// Row-major list of [re, im] pairs.
json matrix_to_json(const Mat& m);
Mat matrix_from_json(const json& j, Eigen::Index rows, Eigen::Index cols);
json real_vector_to_json(const RVec& v);

/// { "dim", "times", "kind": "cumulative" | "increments", "matrices",
///   "reference"? }. Cumulative form is written when representable.
json path_to_json(const path::OperatorPath& p);
path::OperatorPath path_from_json(const json& j);

/// { "vars", "generators": [{"monomials", "coeffs"}], "K", "hilbert"? }.
ringfilt::GradedRingPresentation ring_from_json(const json& j);
json polynomial_to_json(const ringfilt::Polynomial& p);

/// "p/q", "p" or a plain number.
double parse_rational(const json& j);
/// { "dim", "vertices": [["p/q", ...], ...], "kmax" }.
futaki::PolytopeData polytope_from_json(const json& j);

/// { "n", "rank", "degrees": [{"k", "weights": [[...], ...]}] }.
futaki::TorusWeightTable weight_table_from_json(const json& j);
json weight_table_to_json(const futaki::TorusWeightTable& t);

/// Comma-separated reals, e.g. "2,1,0". Throws ConfigInvalid.
std::vector<double> parse_real_list(const std::string& text);
std::vector<int> parse_int_list(const std::string& text);

}  // namespace degenflow::io
