#include "degenflow/reps.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "degenflow/errors.hpp"

namespace degenflow::reps {
namespace {

constexpr const char* kModule = "reps";

[[noreturn]] void fail(ErrorKind kind, const std::string& msg) { throw Error(kind, kModule, msg); }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

int parse_positive(const std::string& s, const std::string& whole) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(s, &used);
  } catch (const std::exception&) {
    fail(ErrorKind::InputParseError, "bad representation descriptor '" + whole + "'");
  }
  if (used != s.size() || v < 1) fail(ErrorKind::InputParseError, "bad representation descriptor '" + whole + "'");
  return v;
}

Eigen::Index binom_capped(Eigen::Index n, Eigen::Index k, Eigen::Index cap) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  // C(n, i) is exact at every step; saturate once above the cap.
  long double c = 1;
  for (Eigen::Index i = 1; i <= k; ++i) {
    c = c * static_cast<long double>(n - k + i) / static_cast<long double>(i);
    if (c > static_cast<long double>(cap)) return cap + 1;
  }
  return static_cast<Eigen::Index>(std::llround(static_cast<double>(c)));
}

// Degree-d monomials with their index, and the multiplication table
// next[idx][i] = index of x_i * m_idx in degree d + 1.
struct MonomialTables {
  std::vector<std::vector<std::vector<int>>> by_degree;
  std::vector<std::map<std::vector<int>, Eigen::Index>> index;
  std::vector<std::vector<std::vector<Eigen::Index>>> next;
};

MonomialTables build_tables(int n, int k) {
  MonomialTables t;
  for (int d = 0; d <= k; ++d) {
    t.by_degree.push_back(sym_monomials(n, d));
    std::map<std::vector<int>, Eigen::Index> idx;
    for (std::size_t m = 0; m < t.by_degree.back().size(); ++m)
      idx.emplace(t.by_degree.back()[m], static_cast<Eigen::Index>(m));
    t.index.push_back(std::move(idx));
  }
  for (int d = 0; d < k; ++d) {
    std::vector<std::vector<Eigen::Index>> tab;
    for (const auto& m : t.by_degree[static_cast<std::size_t>(d)]) {
      std::vector<Eigen::Index> row(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) {
        auto up = m;
        ++up[static_cast<std::size_t>(i)];
        row[static_cast<std::size_t>(i)] = t.index[static_cast<std::size_t>(d + 1)].at(up);
      }
      tab.push_back(std::move(row));
    }
    t.next.push_back(std::move(tab));
  }
  return t;
}

double log_factorial_of(const std::vector<int>& a) {
  double s = 0.0;
  for (int v : a) s += std::lgamma(static_cast<double>(v) + 1.0);
  return s;
}

Mat sym_induce(int k, const Mat& a) {
  const int n = static_cast<int>(a.rows());
  const MonomialTables t = build_tables(n, k);
  const auto& top = t.by_degree[static_cast<std::size_t>(k)];
  const auto dim = static_cast<Eigen::Index>(top.size());
  std::vector<double> lf(top.size());
  for (std::size_t m = 0; m < top.size(); ++m) lf[m] = log_factorial_of(top[m]);
  Mat out(dim, dim);
  for (Eigen::Index col = 0; col < dim; ++col) {
    const auto& alpha = top[static_cast<std::size_t>(col)];
    Vec poly = Vec::Ones(1);
    int degree = 0;
    for (int j = 0; j < n; ++j) {
      for (int rep = 0; rep < alpha[static_cast<std::size_t>(j)]; ++rep) {
        const auto& tab = t.next[static_cast<std::size_t>(degree)];
        Vec grown = Vec::Zero(static_cast<Eigen::Index>(t.by_degree[static_cast<std::size_t>(degree + 1)].size()));
        for (Eigen::Index m = 0; m < poly.size(); ++m) {
          if (poly(m) == cplx(0.0)) continue;
          for (int i = 0; i < n; ++i) grown(tab[static_cast<std::size_t>(m)][static_cast<std::size_t>(i)]) += poly(m) * a(i, j);
        }
        poly = std::move(grown);
        ++degree;
      }
    }
    for (Eigen::Index row = 0; row < dim; ++row)
      out(row, col) = poly(row) * std::exp(0.5 * (lf[static_cast<std::size_t>(row)] - lf[static_cast<std::size_t>(col)]));
  }
  return out;
}

Mat sym_lie(int k, const Mat& x) {
  const int n = static_cast<int>(x.rows());
  const auto mons = sym_monomials(n, k);
  std::map<std::vector<int>, Eigen::Index> index;
  for (std::size_t m = 0; m < mons.size(); ++m) index.emplace(mons[m], static_cast<Eigen::Index>(m));
  const auto dim = static_cast<Eigen::Index>(mons.size());
  Mat out = Mat::Zero(dim, dim);
  for (Eigen::Index col = 0; col < dim; ++col) {
    const auto& alpha = mons[static_cast<std::size_t>(col)];
    const double lfa = log_factorial_of(alpha);
    for (int j = 0; j < n; ++j) {
      const int aj = alpha[static_cast<std::size_t>(j)];
      if (aj == 0) continue;
      for (int i = 0; i < n; ++i) {
        auto beta = alpha;
        --beta[static_cast<std::size_t>(j)];
        ++beta[static_cast<std::size_t>(i)];
        const Eigen::Index row = index.at(beta);
        out(row, col) += static_cast<double>(aj) * x(i, j) * std::exp(0.5 * (log_factorial_of(beta) - lfa));
      }
    }
  }
  return out;
}

// Sign of the permutation sorting `t`, 0 if an entry repeats.
int sort_sign(std::vector<int>& t) {
  int sign = 1;
  for (std::size_t i = 0; i < t.size(); ++i)
    for (std::size_t j = i + 1; j < t.size(); ++j) {
      if (t[i] == t[j]) return 0;
      if (t[i] > t[j]) sign = -sign;
    }
  std::sort(t.begin(), t.end());
  return sign;
}

Mat ext_induce(int p, const Mat& a) {
  const int n = static_cast<int>(a.rows());
  const auto subsets = ext_subsets(n, p);
  const auto dim = static_cast<Eigen::Index>(subsets.size());
  Mat out(dim, dim);
  Mat minor(p, p);
  for (Eigen::Index r = 0; r < dim; ++r)
    for (Eigen::Index c = 0; c < dim; ++c) {
      const auto& rows = subsets[static_cast<std::size_t>(r)];
      const auto& cols = subsets[static_cast<std::size_t>(c)];
      for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) minor(i, j) = a(rows[static_cast<std::size_t>(i)], cols[static_cast<std::size_t>(j)]);
      out(r, c) = p == 1 ? minor(0, 0) : minor.partialPivLu().determinant();
    }
  return out;
}

Mat ext_lie(int p, const Mat& x) {
  const int n = static_cast<int>(x.rows());
  const auto subsets = ext_subsets(n, p);
  std::map<std::vector<int>, Eigen::Index> index;
  for (std::size_t m = 0; m < subsets.size(); ++m) index.emplace(subsets[m], static_cast<Eigen::Index>(m));
  const auto dim = static_cast<Eigen::Index>(subsets.size());
  Mat out = Mat::Zero(dim, dim);
  for (Eigen::Index col = 0; col < dim; ++col) {
    const auto& set = subsets[static_cast<std::size_t>(col)];
    for (int r = 0; r < p; ++r) {
      const int j = set[static_cast<std::size_t>(r)];
      for (int i = 0; i < n; ++i) {
        auto t = set;
        t[static_cast<std::size_t>(r)] = i;
        const int sign = sort_sign(t);
        if (sign == 0) continue;
        out(index.at(t), col) += static_cast<double>(sign) * x(i, j);
      }
    }
  }
  return out;
}

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

void check_square(const Mat& a) {
  if (a.rows() != a.cols() || a.rows() == 0) fail(ErrorKind::ConfigInvalid, "operator must be square and nonempty");
}

}  // namespace

RepDescriptor RepDescriptor::parse(const std::string& raw) {
  const std::string text = trim(raw);
  if (text == "std" || text == "standard") return standard();
  if (text == "dual") return dual();
  if (text.rfind("sym:", 0) == 0) return sym(parse_positive(text.substr(4), text));
  if (text.rfind("ext:", 0) == 0) return ext(parse_positive(text.substr(4), text));
  if (text.rfind("tensor(", 0) == 0 && text.back() == ')') {
    const std::string inner = text.substr(7, text.size() - 8);
    std::vector<RepDescriptor> fs;
    int depth = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= inner.size(); ++i) {
      if (i == inner.size() || (inner[i] == ',' && depth == 0)) {
        fs.push_back(parse(inner.substr(start, i - start)));
        start = i + 1;
      } else if (inner[i] == '(') {
        ++depth;
      } else if (inner[i] == ')') {
        --depth;
      }
    }
    if (depth != 0 || fs.size() < 2) fail(ErrorKind::InputParseError, "bad tensor descriptor '" + text + "'");
    return tensor(std::move(fs));
  }
  fail(ErrorKind::InputParseError, "unknown representation descriptor '" + text + "'");
}

std::string RepDescriptor::to_string() const {
  switch (shape) {
    case Shape::Standard: return "std";
    case Shape::Dual: return "dual";
    case Shape::Sym: return "sym:" + std::to_string(param);
    case Shape::Ext: return "ext:" + std::to_string(param);
    case Shape::Tensor: {
      std::string s = "tensor(";
      for (std::size_t i = 0; i < factors.size(); ++i) s += (i ? "," : "") + factors[i].to_string();
      return s + ")";
    }
  }
  return "?";
}

Eigen::Index RepDescriptor::dim(Eigen::Index n, Eigen::Index cap) const {
  switch (shape) {
    case Shape::Standard:
    case Shape::Dual: return n;
    case Shape::Sym: return binom_capped(n + param - 1, param, cap);
    case Shape::Ext: return binom_capped(n, param, cap);
    case Shape::Tensor: {
      Eigen::Index d = 1;
      for (const auto& f : factors) {
        d *= f.dim(n, cap);
        if (d > cap) return cap + 1;
      }
      return d;
    }
  }
  return 0;
}

void RepDescriptor::validate(Eigen::Index n, Eigen::Index cap) const {
  if (shape == Shape::Sym && param < 1) fail(ErrorKind::ConfigInvalid, "sym degree must be >= 1");
  if (shape == Shape::Ext && (param < 1 || param > n)) fail(ErrorKind::ConfigInvalid, "ext degree out of range");
  if (shape == Shape::Tensor) {
    if (factors.empty()) fail(ErrorKind::ConfigInvalid, "empty tensor descriptor");
    for (const auto& f : factors) f.validate(n, cap);
  }
  if (dim(n, cap) > cap) fail(ErrorKind::DimensionOverflow, "induced dimension exceeds cap " + std::to_string(cap));
}

std::vector<std::vector<int>> sym_monomials(int n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(static_cast<std::size_t>(n), 0);
  // Lex-descending enumeration: largest power of x_1 first.
  auto rec = [&](auto&& self, int pos, int left) -> void {
    if (pos == n - 1) {
      cur[static_cast<std::size_t>(pos)] = left;
      out.push_back(cur);
      return;
    }
    for (int e = left; e >= 0; --e) {
      cur[static_cast<std::size_t>(pos)] = e;
      self(self, pos + 1, left - e);
    }
  };
  if (n > 0) rec(rec, 0, k);
  return out;
}

std::vector<std::vector<int>> ext_subsets(int n, int p) {
  std::vector<std::vector<int>> out;
  if (p < 0 || p > n) return out;
  std::vector<int> cur(static_cast<std::size_t>(p));
  std::iota(cur.begin(), cur.end(), 0);
  for (;;) {
    out.push_back(cur);
    int i = p - 1;
    while (i >= 0 && cur[static_cast<std::size_t>(i)] == n - p + i) --i;
    if (i < 0) break;
    ++cur[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < p; ++j) cur[static_cast<std::size_t>(j)] = cur[static_cast<std::size_t>(j - 1)] + 1;
  }
  return out;
}

Mat induce(const RepDescriptor& desc, const Mat& a, Eigen::Index cap) {
  check_square(a);
  desc.validate(a.rows(), cap);
  switch (desc.shape) {
    case RepDescriptor::Shape::Standard: return a;
    case RepDescriptor::Shape::Dual: {
      Eigen::FullPivLU<Mat> lu(a);
      if (!lu.isInvertible()) fail(ErrorKind::SingularInput, "dual action of a singular operator");
      return lu.inverse().transpose();
    }
    case RepDescriptor::Shape::Sym: return sym_induce(desc.param, a);
    case RepDescriptor::Shape::Ext: return ext_induce(desc.param, a);
    case RepDescriptor::Shape::Tensor: {
      Mat out = induce(desc.factors[0], a, cap);
      for (std::size_t i = 1; i < desc.factors.size(); ++i) out = kron(out, induce(desc.factors[i], a, cap));
      return out;
    }
  }
  return a;
}

Mat induce_lie(const RepDescriptor& desc, const Mat& x, Eigen::Index cap) {
  check_square(x);
  desc.validate(x.rows(), cap);
  switch (desc.shape) {
    case RepDescriptor::Shape::Standard: return x;
    case RepDescriptor::Shape::Dual: return -x.transpose();
    case RepDescriptor::Shape::Sym: return sym_lie(desc.param, x);
    case RepDescriptor::Shape::Ext: return ext_lie(desc.param, x);
    case RepDescriptor::Shape::Tensor: {
      Mat out = induce_lie(desc.factors[0], x, cap);
      for (std::size_t i = 1; i < desc.factors.size(); ++i) {
        const Mat y = induce_lie(desc.factors[i], x, cap);
        out = kron(out, Mat::Identity(y.rows(), y.cols())) + kron(Mat::Identity(out.rows(), out.cols()), y);
      }
      return out;
    }
  }
  return x;
}

std::vector<double> basis_weights(const RepDescriptor& desc, const std::vector<double>& mu) {
  const int n = static_cast<int>(mu.size());
  std::vector<double> out;
  switch (desc.shape) {
    case RepDescriptor::Shape::Standard: return mu;
    case RepDescriptor::Shape::Dual:
      for (double m : mu) out.push_back(-m);
      return out;
    case RepDescriptor::Shape::Sym:
      for (const auto& a : sym_monomials(n, desc.param)) {
        double w = 0.0;
        for (int j = 0; j < n; ++j) w += a[static_cast<std::size_t>(j)] * mu[static_cast<std::size_t>(j)];
        out.push_back(w);
      }
      return out;
    case RepDescriptor::Shape::Ext:
      for (const auto& s : ext_subsets(n, desc.param)) {
        double w = 0.0;
        for (int j : s) w += mu[static_cast<std::size_t>(j)];
        out.push_back(w);
      }
      return out;
    case RepDescriptor::Shape::Tensor: {
      out = basis_weights(desc.factors[0], mu);
      for (std::size_t i = 1; i < desc.factors.size(); ++i) {
        const auto rhs = basis_weights(desc.factors[i], mu);
        std::vector<double> next;
        for (double a : out)
          for (double b : rhs) next.push_back(a + b);
        out = std::move(next);
      }
      return out;
    }
  }
  return out;
}

Eigen::Index WeightDecomposition::dim() const {
  Eigen::Index d = 0;
  for (int m : multiplicities) d += m;
  return d;
}

int WeightDecomposition::level_of(double w, double tol) const {
  for (std::size_t j = 0; j < weights.size(); ++j)
    if (std::abs(weights[j] - w) <= tol) return static_cast<int>(j);
  return -1;
}

WeightDecomposition induced_weights(const linalg::HermitianGenerator& lambda, const RepDescriptor& desc,
                                    double cluster_tol, Eigen::Index cap) {
  const Mat u = lambda.eigenbasis();
  const auto mu = lambda.eigenvalues();
  const Mat basis = induce(desc, u, cap);
  const auto w = basis_weights(desc, mu);
  std::vector<std::size_t> order(w.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return w[a] > w[b]; });
  double scale = 1.0;
  for (double v : w) scale = std::max(scale, std::abs(v));
  const double tol = cluster_tol * scale;

  WeightDecomposition out;
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k == 0 || w[order[k - 1]] - w[order[k]] > tol) groups.emplace_back();
    groups.back().push_back(order[k]);
  }
  for (const auto& g : groups) {
    double mean = 0.0;
    Mat sub(basis.rows(), static_cast<Eigen::Index>(g.size()));
    for (std::size_t j = 0; j < g.size(); ++j) {
      mean += w[g[j]];
      sub.col(static_cast<Eigen::Index>(j)) = basis.col(static_cast<Eigen::Index>(g[j]));
    }
    out.weights.push_back(mean / static_cast<double>(g.size()));
    out.subspaces.push_back(std::move(sub));
    out.multiplicities.push_back(static_cast<int>(g.size()));
  }
  return out;
}

PluckerVector plucker(const Mat& span) {
  const auto n = static_cast<int>(span.rows());
  const auto p = static_cast<int>(span.cols());
  if (p < 1 || p > n) fail(ErrorKind::DegenerateSpan, "span must have between 1 and dim E columns");
  Eigen::JacobiSVD<Mat> svd(span);
  const auto& sv = svd.singularValues();
  if (!(sv(p - 1) > 1e-10 * std::max(1.0, sv(0)))) fail(ErrorKind::DegenerateSpan, "spanning vectors are dependent");
  const auto subsets = ext_subsets(n, p);
  PluckerVector out{RepDescriptor::ext(p), Vec(static_cast<Eigen::Index>(subsets.size()))};
  Mat minor(p, p);
  for (std::size_t s = 0; s < subsets.size(); ++s) {
    for (int i = 0; i < p; ++i) minor.row(i) = span.row(subsets[s][static_cast<std::size_t>(i)]);
    out.coordinates(static_cast<Eigen::Index>(s)) = minor.partialPivLu().determinant();
  }
  return out;
}

double plucker_residual(const Vec& coordinates, int n, int p) {
  const double norm = coordinates.norm();
  if (!(norm > 0.0)) fail(ErrorKind::ZeroVector, "zero Plucker vector");
  if (p <= 1 || p >= n - 1) return 0.0;
  const Vec c = coordinates / norm;
  std::map<std::vector<int>, Eigen::Index> index;
  const auto subsets = ext_subsets(n, p);
  for (std::size_t m = 0; m < subsets.size(); ++m) index.emplace(subsets[m], static_cast<Eigen::Index>(m));
  auto coord = [&](std::vector<int> t) -> cplx {
    const int sign = sort_sign(t);
    return sign == 0 ? cplx(0.0) : static_cast<double>(sign) * c(index.at(t));
  };
  double worst = 0.0;
  for (const auto& lo : ext_subsets(n, p - 1))
    for (const auto& hi : ext_subsets(n, p + 1)) {
      cplx acc = 0.0;
      for (int k = 0; k <= p; ++k) {
        auto left = lo;
        left.push_back(hi[static_cast<std::size_t>(k)]);
        std::vector<int> right;
        for (int m = 0; m <= p; ++m)
          if (m != k) right.push_back(hi[static_cast<std::size_t>(m)]);
        acc += (k % 2 == 0 ? 1.0 : -1.0) * coord(left) * coord(right);
      }
      worst = std::max(worst, std::abs(acc));
    }
  return worst;
}

}  // namespace degenflow::reps
