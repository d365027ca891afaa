#include "kummer/flat_geometry.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <limits>

#include "json.hpp"
#include "kummer/errors.hpp"

namespace kummer {

Form2 flat_omega0() { return (Form2() << 1, 0, 0, 0, 0, 1).finished(); }
Form2 flat_re_omega() { return (Form2() << 0, 1, 0, 0, -1, 0).finished(); }
Form2 flat_im_omega() { return (Form2() << 0, 0, 1, 1, 0, 0).finished(); }

Triple flat_triple() {
  Triple t;
  t << flat_omega0(), flat_re_omega(), flat_im_omega();
  return t;
}

Mat4 flat_complex_structure() {
  Mat4 J = Mat4::Zero();
  J(1, 0) = 1;
  J(0, 1) = -1;
  J(3, 2) = 1;
  J(2, 3) = -1;
  return J;
}

FlatKahlerData flat_kahler_data(const Vec4&) {
  return {Mat4::Identity(), flat_omega0(), flat_re_omega(), flat_im_omega()};
}

bool FlatMetricSpec::valid() const {
  if (!gram.allFinite() || !lattice.allFinite()) return false;
  if ((gram - gram.transpose()).cwiseAbs().maxCoeff() > 1e-12 * gram.cwiseAbs().maxCoeff()) return false;
  Eigen::SelfAdjointEigenSolver<Mat4> es(gram);
  if (es.eigenvalues().minCoeff() <= 0) return false;
  return std::abs(lattice.determinant()) > 0;
}

void FlatMetricSpec::validate() const {
  if (!valid()) throw ConfigError("flat metric spec: gram must be symmetric positive definite and lattice invertible");
}

Mat4 FlatMetricSpec::euclidean_frame() const {
  Eigen::LLT<Mat4> llt(gram);
  if (llt.info() != Eigen::Success) throw ConfigError("flat metric spec: gram not positive definite");
  return llt.matrixU();
}

static nlohmann::json mat_to_json(const Mat4& m) {
  nlohmann::json j = nlohmann::json::array();
  for (int i = 0; i < 4; ++i) j.push_back({m(i, 0), m(i, 1), m(i, 2), m(i, 3)});
  return j;
}

static Mat4 mat_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 4) throw ConfigError("expected a 4x4 array");
  Mat4 m;
  for (int i = 0; i < 4; ++i) {
    if (!j[i].is_array() || j[i].size() != 4) throw ConfigError("expected a 4x4 array");
    for (int k = 0; k < 4; ++k) m(i, k) = j[i][k].get<double>();
  }
  return m;
}

std::string FlatMetricSpec::to_json() const {
  return nlohmann::json{{"gram", mat_to_json(gram)}, {"lattice", mat_to_json(lattice)}}.dump();
}

FlatMetricSpec FlatMetricSpec::from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  FlatMetricSpec s;
  if (j.contains("gram")) s.gram = mat_from_json(j["gram"]);
  if (j.contains("lattice")) s.lattice = mat_from_json(j["lattice"]);
  s.validate();
  return s;
}

bool OrbifoldPoint::operator==(const OrbifoldPoint& o) const {
  return (rep - o.rep).cwiseAbs().maxCoeff() < 1e-11 && is_singular == o.is_singular && singular_index == o.singular_index;
}

static Vec4 reduce_unit(const Vec4& x, double tol) {
  Vec4 r;
  for (int i = 0; i < 4; ++i) {
    double v = x(i) - std::floor(x(i));
    v = std::ldexp(std::round(std::ldexp(v, 36)), -36);  // absorb translation round-off
    if (v >= 1.0 - tol || v < tol) v = 0.0;  // boundary ties go to 0
    r(i) = v;
  }
  return r;
}

int singular_index_of(const Vec4& p) {
  int idx = 0;
  for (int i = 0; i < 4; ++i) {
    long b = std::lround(2.0 * p(i));
    idx |= static_cast<int>(((b % 2) + 2) % 2) << i;
  }
  return idx + 1;
}

OrbifoldPoint make_orbifold_point(const Vec4& x, double tol) {
  Vec4 a = reduce_unit(x, tol), b = reduce_unit(-x, tol);
  OrbifoldPoint p;
  p.rep = std::lexicographical_compare(b.data(), b.data() + 4, a.data(), a.data() + 4) ? b : a;
  bool sing = true;
  for (int i = 0; i < 4; ++i) {
    double t = 2.0 * p.rep(i);
    if (std::abs(t - std::round(t)) > 2.0 * tol) sing = false;
  }
  p.is_singular = sing;
  if (sing) {
    for (int i = 0; i < 4; ++i) p.rep(i) = 0.5 * std::round(2.0 * p.rep(i));
    p.singular_index = singular_index_of(p.rep);
  }
  return p;
}

std::array<Vec4, 16> singular_points() {
  std::array<Vec4, 16> pts;
  for (int m = 0; m < 16; ++m)
    for (int i = 0; i < 4; ++i) pts[m](i) = 0.5 * ((m >> i) & 1);
  return pts;
}

NearestSingular nearest_singular(const Vec4& x, const FlatMetricSpec& spec) {
  // Singular set lifted to R^4 is (1/2)Z^4; search half-lattice points near x.
  NearestSingular best{std::numeric_limits<double>::infinity(), 0, Vec4::Zero()};
  Vec4 base;
  for (int i = 0; i < 4; ++i) base(i) = std::round(2.0 * x(i));
  for (int c = 0; c < 625; ++c) {
    Vec4 m;
    int code = c;
    for (int i = 0; i < 4; ++i) {
      m(i) = 0.5 * (base(i) + (code % 5) - 2);
      code /= 5;
    }
    Vec4 d = x - m;
    double dist = std::sqrt(std::max(0.0, d.dot(spec.gram * d)));
    if (dist < best.distance) best = {dist, singular_index_of(m), d};
  }
  return best;
}

double dist_to_singular_set(const Vec4& x, const FlatMetricSpec& spec) {
  return nearest_singular(x, spec).distance;
}

double dist_to_singular_set(const OrbifoldPoint& x, const FlatMetricSpec& spec) {
  return x.is_singular ? 0.0 : nearest_singular(x.rep, spec).distance;
}

ParityReport z2_parity_check(const std::vector<Vec4>& points, const std::vector<VecX>& values,
                             int degree, Parity kind, double tol, double pair_tol) {
  if (points.size() != values.size()) throw ConfigError("parity check: points and values differ in length");
  const double form_sign = (degree % 2 == 0) ? 1.0 : -1.0;
  const double want = (kind == Parity::Even) ? 1.0 : -1.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::size_t partner = points.size();
    for (std::size_t j = 0; j < points.size(); ++j)
      if ((points[j] + points[i]).cwiseAbs().maxCoeff() <= pair_tol) {
        partner = j;
        break;
      }
    if (partner == points.size()) throw ConfigError("parity check: sample without a partner at -x");
    // (iota^* v)(x) = (-1)^degree v(-x)
    VecX pulled = form_sign * values[partner];
    worst = std::max(worst, (pulled - want * values[i]).cwiseAbs().maxCoeff());
  }
  return {worst <= tol, worst};
}

int flat_moduli_dim() { return 4 * 5 / 2; }

int gram_tangent_rank(const Mat4& B) {
  Eigen::Matrix<double, 16, 16> D;
  for (int c = 0; c < 16; ++c) {
    Mat4 X = Mat4::Zero();
    X(c / 4, c % 4) = 1.0;
    Mat4 dG = X.transpose() * B + B.transpose() * X;
    D.col(c) = Eigen::Map<Eigen::Matrix<double, 16, 1>>(dG.data());
  }
  Eigen::JacobiSVD<Eigen::Matrix<double, 16, 16>> svd(D);
  const auto& sv = svd.singularValues();
  int rank = 0;
  for (int i = 0; i < 16; ++i)
    if (sv(i) > 1e-10 * sv(0)) ++rank;
  return rank;
}

}  // namespace kummer
