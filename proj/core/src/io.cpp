#include "degenflow/io.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "degenflow/errors.hpp"

namespace degenflow::io {

namespace {

[[noreturn]] void parse_fail(const std::string& msg) { throw Error(ErrorKind::InputParseError, "io", msg); }

const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) parse_fail(where + ": missing field '" + key + "'");
  return j.at(key);
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) parse_fail(where + ": expected a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) parse_fail(where + ": non-finite number");
  return x;
}

long long integer(const json& j, const std::string& where) {
  if (j.is_number_integer()) return j.get<long long>();
  if (j.is_number_float()) {
    const double x = j.get<double>();
    if (std::isfinite(x) && x == std::floor(x) && std::abs(x) < 9e15) return static_cast<long long>(x);
  }
  parse_fail(where + ": expected an integer");
}

const json& array(const json& j, const std::string& where) {
  if (!j.is_array()) parse_fail(where + ": expected an array");
  return j;
}

}  // namespace

void require_finite(const json& j, const std::string& where) {
  if (j.is_number_float()) {
    if (!std::isfinite(j.get<double>())) parse_fail(where + ": non-finite number");
  } else if (j.is_array() || j.is_object()) {
    for (const auto& item : j) require_finite(item, where);
  }
}

json read_json_file(const std::string& filename) {
  std::ifstream in(filename, std::ios::binary);
  if (!in) parse_fail("cannot open '" + filename + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  json j = json::parse(buf.str(), nullptr, false);
  if (j.is_discarded()) parse_fail("'" + filename + "' is not valid JSON");
  require_finite(j, filename);
  return j;
}

void write_text_file(const std::string& filename, const std::string& text) {
  std::ofstream out(filename, std::ios::binary | std::ios::trunc);
  if (!out) parse_fail("cannot write '" + filename + "'");
  out << text;
  if (!out) parse_fail("write failed for '" + filename + "'");
}

void write_json_file(const std::string& filename, const json& j) { write_text_file(filename, j.dump(2) + "\n"); }

json complex_to_json(cplx z) { return json::array({z.real(), z.imag()}); }

cplx complex_from_json(const json& j) {
  if (j.is_number()) return {number(j, "complex"), 0.0};
  if (!j.is_array() || j.size() != 2) parse_fail("complex: expected [re, im]");
  return {number(j[0], "complex"), number(j[1], "complex")};
}

json matrix_to_json(const Mat& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(complex_to_json(m(r, c)));
  return out;
}

// Accepts the flat row-major list or a list of rows.
Mat matrix_from_json(const json& j, Eigen::Index rows, Eigen::Index cols) {
  array(j, "matrix");
  Mat m(rows, cols);
  const auto n = static_cast<std::size_t>(rows * cols);
  if (j.size() == n && (n == 0 || j[0].is_number() || (j[0].is_array() && j[0].size() == 2 && j[0][0].is_number()))) {
    for (std::size_t i = 0; i < n; ++i)
      m(static_cast<Eigen::Index>(i) / cols, static_cast<Eigen::Index>(i) % cols) = complex_from_json(j[i]);
    return m;
  }
  if (j.size() != static_cast<std::size_t>(rows)) parse_fail("matrix: wrong number of entries");
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || row.size() != static_cast<std::size_t>(cols)) parse_fail("matrix: ragged row");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = complex_from_json(row[static_cast<std::size_t>(c)]);
  }
  return m;
}

json real_vector_to_json(const RVec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json path_to_json(const path::OperatorPath& p) {
  json j;
  j["dim"] = p.dim();
  j["times"] = p.times();
  j["kind"] = "increments";
  json mats = json::array();
  for (const Mat& b : p.steps()) mats.push_back(matrix_to_json(b));
  j["matrices"] = std::move(mats);
  j["reference"] = matrix_to_json(p.reference().gram);
  return j;
}

path::OperatorPath path_from_json(const json& j) {
  const long long dim = integer(field(j, "dim", "path"), "path.dim");
  if (dim < 1 || dim > 4096) parse_fail("path.dim out of range");
  const Eigen::Index n = static_cast<Eigen::Index>(dim);
  std::vector<double> times;
  for (const auto& t : array(field(j, "times", "path"), "path.times")) times.push_back(number(t, "path.times"));
  const json& mats = array(field(j, "matrices", "path"), "path.matrices");
  if (mats.size() != times.size()) parse_fail("path: times and matrices differ in length");
  std::vector<Mat> ops;
  ops.reserve(mats.size());
  for (const auto& m : mats) ops.push_back(matrix_from_json(m, n, n));
  linalg::HermitianForm ref = linalg::HermitianForm::identity(n);
  if (j.contains("reference") && !j["reference"].is_null()) ref.gram = matrix_from_json(j["reference"], n, n);
  const std::string kind = j.value("kind", std::string("cumulative"));
  try {
    ref.validate();
    if (kind == "cumulative") return path::OperatorPath::from_cumulative(std::move(times), ops, std::move(ref));
    if (kind == "increments") return path::OperatorPath::from_steps(std::move(times), std::move(ops), std::move(ref));
  } catch (const Error& e) {
    if (e.is_io_error()) parse_fail(std::string("path: ") + e.what());
    throw;
  }
  parse_fail("path.kind must be 'cumulative' or 'increments'");
}

ringfilt::GradedRingPresentation ring_from_json(const json& j) {
  const long long vars = integer(field(j, "vars", "ring"), "ring.vars");
  const long long k = integer(field(j, "K", "ring"), "ring.K");
  if (vars < 1 || vars > 64) parse_fail("ring.vars out of range");
  if (k < 1 || k > 64) parse_fail("ring.K out of range");
  std::vector<ringfilt::Polynomial> gens;
  for (const auto& g : array(field(j, "generators", "ring"), "ring.generators")) {
    const json& mons = array(field(g, "monomials", "generator"), "generator.monomials");
    const json& coeffs = array(field(g, "coeffs", "generator"), "generator.coeffs");
    if (mons.size() != coeffs.size()) parse_fail("generator: monomials and coeffs differ in length");
    ringfilt::Polynomial p;
    for (std::size_t i = 0; i < mons.size(); ++i) {
      ringfilt::Exponent e;
      for (const auto& a : array(mons[i], "monomial")) {
        const long long x = integer(a, "monomial");
        if (x < 0) parse_fail("monomial: negative exponent");
        e.push_back(static_cast<int>(x));
      }
      if (static_cast<long long>(e.size()) != vars) parse_fail("monomial: wrong number of exponents");
      p.terms.push_back({std::move(e), complex_from_json(coeffs[i])});
    }
    gens.push_back(std::move(p));
  }
  std::optional<std::vector<int>> hilbert;
  if (j.contains("hilbert") && !j["hilbert"].is_null()) {
    std::vector<int> h;
    for (const auto& x : array(j["hilbert"], "ring.hilbert")) h.push_back(static_cast<int>(integer(x, "ring.hilbert")));
    hilbert = std::move(h);
  }
  try {
    return ringfilt::GradedRingPresentation::build(static_cast<int>(vars), std::move(gens), static_cast<int>(k),
                                                   std::move(hilbert));
  } catch (const Error& e) {
    if (e.is_io_error()) parse_fail(std::string("ring: ") + e.what());
    throw;
  }
}

json polynomial_to_json(const ringfilt::Polynomial& p) {
  json mons = json::array();
  json coeffs = json::array();
  for (const auto& t : p.terms) {
    mons.push_back(t.exponent);
    coeffs.push_back(complex_to_json(t.coeff));
  }
  return {{"monomials", mons}, {"coeffs", coeffs}};
}

double parse_rational(const json& j) {
  if (j.is_number()) return number(j, "rational");
  if (!j.is_string()) parse_fail("rational: expected \"p/q\" or a number");
  const std::string s = j.get<std::string>();
  const auto slash = s.find('/');
  auto to_ll = [&](std::string_view part) {
    long long v = 0;
    const char* first = part.data();
    if (!part.empty() && part.front() == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, part.data() + part.size(), v);
    if (ec != std::errc() || ptr != part.data() + part.size() || part.empty()) parse_fail("rational: bad '" + s + "'");
    return v;
  };
  const std::string_view sv(s);
  if (slash == std::string::npos) return static_cast<double>(to_ll(sv));
  const long long num = to_ll(sv.substr(0, slash));
  const long long den = to_ll(sv.substr(slash + 1));
  if (den == 0) parse_fail("rational: zero denominator in '" + s + "'");
  return static_cast<double>(num) / static_cast<double>(den);
}

futaki::PolytopeData polytope_from_json(const json& j) {
  futaki::PolytopeData p;
  const long long dim = integer(field(j, "dim", "polytope"), "polytope.dim");
  const long long kmax = integer(field(j, "kmax", "polytope"), "polytope.kmax");
  if (dim < 1 || dim > 8) parse_fail("polytope.dim out of range");
  if (kmax < 1 || kmax > 4096) parse_fail("polytope.kmax out of range");
  p.dim = static_cast<int>(dim);
  p.kmax = static_cast<int>(kmax);
  const json& verts = array(field(j, "vertices", "polytope"), "polytope.vertices");
  p.vertices.resize(static_cast<Eigen::Index>(verts.size()), p.dim);
  for (std::size_t i = 0; i < verts.size(); ++i) {
    if (!verts[i].is_array() || verts[i].size() != static_cast<std::size_t>(dim)) parse_fail("polytope: bad vertex");
    for (long long c = 0; c < dim; ++c)
      p.vertices(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
          parse_rational(verts[i][static_cast<std::size_t>(c)]);
  }
  return p;
}

futaki::TorusWeightTable weight_table_from_json(const json& j) {
  futaki::TorusWeightTable t;
  t.n = static_cast<int>(integer(field(j, "n", "weight table"), "weights.n"));
  t.rank = static_cast<int>(integer(field(j, "rank", "weight table"), "weights.rank"));
  if (t.n < 1 || t.rank < 1) parse_fail("weight table: n and rank must be positive");
  const json& degs = array(field(j, "degrees", "weight table"), "weights.degrees");
  t.degrees.resize(degs.size());
  std::vector<bool> seen(degs.size(), false);
  for (const auto& d : degs) {
    const long long k = integer(field(d, "k", "degree entry"), "degree.k");
    if (k < 1 || k > static_cast<long long>(degs.size()) || seen[static_cast<std::size_t>(k - 1)])
      parse_fail("weight table: degrees must cover k = 1..kmax exactly once");
    seen[static_cast<std::size_t>(k - 1)] = true;
    const json& rows = array(field(d, "weights", "degree entry"), "degree.weights");
    RMat w(static_cast<Eigen::Index>(rows.size()), t.rank);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (!rows[r].is_array() || rows[r].size() != static_cast<std::size_t>(t.rank))
        parse_fail("weight table: row length differs from rank");
      for (int c = 0; c < t.rank; ++c)
        w(static_cast<Eigen::Index>(r), c) = number(rows[r][static_cast<std::size_t>(c)], "weights");
    }
    t.degrees[static_cast<std::size_t>(k - 1)] = std::move(w);
  }
  try {
    t.validate();
  } catch (const Error& e) {
    if (e.is_io_error()) parse_fail(std::string("weight table: ") + e.what());
    throw;
  }
  return t;
}

json weight_table_to_json(const futaki::TorusWeightTable& t) {
  json degs = json::array();
  for (int k = 1; k <= t.kmax(); ++k) {
    const RMat& w = t.weights(k);
    json rows = json::array();
    for (Eigen::Index r = 0; r < w.rows(); ++r) rows.push_back(real_vector_to_json(w.row(r).transpose()));
    degs.push_back({{"k", k}, {"weights", rows}});
  }
  return {{"n", t.n}, {"rank", t.rank}, {"degrees", degs}};
}

namespace {

std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != ' ') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::vector<double> parse_real_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& s : split(text)) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
      throw Error(ErrorKind::ConfigInvalid, "io", "bad number '" + s + "' in list '" + text + "'");
    out.push_back(v);
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  for (const auto& s : split(text)) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
      throw Error(ErrorKind::ConfigInvalid, "io", "bad integer '" + s + "' in list '" + text + "'");
    out.push_back(v);
  }
  return out;
}

}  // namespace degenflow::io
