#include <cmath>
#include <sstream>

#include <degenflow/futaki.hpp>

#include "criteria.hpp"

using namespace degenflow;

namespace acceptance {

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

futaki::PolytopeData polygon(const std::vector<std::pair<double, double>>& vs, int kmax) {
  futaki::PolytopeData p;
  p.dim = 2;
  p.kmax = kmax;
  p.vertices.resize(static_cast<Eigen::Index>(vs.size()), 2);
  for (std::size_t i = 0; i < vs.size(); ++i) {
    p.vertices(static_cast<Eigen::Index>(i), 0) = vs[i].first;
    p.vertices(static_cast<Eigen::Index>(i), 1) = vs[i].second;
  }
  return p;
}

futaki::PolytopeData p2(int kmax) { return polygon({{-1, -1}, {2, -1}, {-1, 2}}, kmax); }
futaki::PolytopeData bl1p2(int kmax) { return polygon({{-1, -1}, {2, -1}, {0, 1}, {-1, 1}}, kmax); }

bool same_sign(double a, double b) { return (a > 0 && b > 0) || (a < 0 && b < 0); }

}  // namespace

Outcome futaki_suite() {
  std::string detail;
  bool ok = true;

  const auto tp2 = futaki::weights_from_polytope(p2(30));
  double p2_worst = 0.0;
  for (int i = 0; i < 2; ++i)
    p2_worst = std::max(p2_worst, std::abs(futaki::futaki_limit(tp2, RVec::Zero(2), RVec::Unit(2, i)).value));
  ok = ok && p2_worst < 1e-8;
  detail += "P2 max |Fut| " + fmt(p2_worst);

  const auto t24 = futaki::weights_from_polytope(bl1p2(24));
  const auto t48 = futaki::weights_from_polytope(bl1p2(48));
  for (int i = 0; i < 2; ++i) {
    const auto a = futaki::futaki_limit(t24, RVec::Zero(2), RVec::Unit(2, i));
    const auto b = futaki::futaki_limit(t48, RVec::Zero(2), RVec::Unit(2, i));
    const bool signs = std::abs(a.value) > 1e-3 && same_sign(a.value, a.shifted) && same_sign(a.value, a.dropped) &&
                       same_sign(a.value, b.value) && same_sign(b.value, b.shifted) && same_sign(b.value, b.dropped);
    const double drift = std::abs(std::abs(a.value) - std::abs(b.value));
    ok = ok && signs && drift < 1e-4;
    detail += "; Bl1P2 Fut(e" + std::to_string(i + 1) + ") " + fmt(a.value) + " (kmax 48: " + fmt(b.value) +
              (signs ? ", sign stable" : ", SIGN UNSTABLE") + ")";
  }

  // Linearity and shift invariance at V = 0 and at a nonzero V.
  RVec a(2), b(2), v(2), c(2);
  a << 0.7, -1.3;
  b << -0.2, 2.1;
  v << 0.1, 0.4;
  c << 2.0, -1.0;
  futaki::TorusWeightTable shifted = t24;
  for (auto& d : shifted.degrees) d.rowwise() += c.transpose();
  shifted.validate();
  futaki::TorusWeightTable extended = t24;
  extended.rank = 3;
  for (auto& d : extended.degrees) {
    RMat e(d.rows(), 3);
    e << d, RVec::Constant(d.rows(), 1.0);
    d = e;
  }
  extended.validate();
  double lin = 0.0, shift = 0.0;
  for (const RVec& base : {RVec(RVec::Zero(2)), v}) {
    const double fa = futaki::futaki_limit(t24, base, a).value;
    const double fb = futaki::futaki_limit(t24, base, b).value;
    lin = std::max(lin, std::abs(futaki::futaki_limit(t24, base, 2.0 * a - 3.0 * b).value - (2.0 * fa - 3.0 * fb)));
    shift = std::max(shift, std::abs(futaki::futaki_limit(shifted, base, a).value - fa));
    RVec base3(3), unit(3);
    base3 << base, 0.0;
    unit << 0.0, 0.0, 5.0;
    shift = std::max(shift, std::abs(futaki::futaki_limit(extended, base3, unit).value));
  }
  ok = ok && lin < 1e-9 && shift < 1e-9;
  detail += "; linearity defect " + fmt(lin) + ", shift defect " + fmt(shift);
  return {ok, detail};
}

Outcome soliton_suite() {
  const auto t24 = futaki::weights_from_polytope(bl1p2(24));
  const auto t48 = futaki::weights_from_polytope(bl1p2(48));
  const auto s24 = futaki::soliton_vector(t24);
  const auto s48 = futaki::soliton_vector(t48);
  bool pd = true;
  double min_eig = std::numeric_limits<double>::infinity();
  for (const auto* s : {&s24, &s48})
    for (double e : s->min_hessian_eigenvalue) {
      pd = pd && e > 0.0;
      min_eig = std::min(min_eig, e);
    }
  const double drift = (s24.v - s48.v).cwiseAbs().maxCoeff();
  const bool ok = s24.residual < 1e-8 && s48.residual < 1e-8 && drift < 1e-5 && pd && s24.v.norm() > 1e-3;
  return {ok, "V* = (" + fmt(s24.v(0)) + ", " + fmt(s24.v(1)) + ") residual " + fmt(s24.residual) + " in " +
                  std::to_string(s24.iterations) + " steps; kmax 48 drift " + fmt(drift) +
                  "; min Hessian eigenvalue over all steps " + fmt(min_eig)};
}

}  // namespace acceptance
