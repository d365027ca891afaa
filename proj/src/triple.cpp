#include "kummer/triple.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>
#include <Eigen/LU>
#include <cmath>

namespace kummer {

AssociatedVolume associated_volume(const Triple& t, double mu0) {
  Mat3 Q = intersection_matrix<double>(t, mu0);
  Eigen::LLT<Mat3> llt(Q);
  if (llt.info() != Eigen::Success) throw DefinitenessError("not a definite triple");
  double c = std::cbrt(Q.determinant());
  return {c * mu0, Q / c};
}

Mat4 triple_to_metric(const Triple& t, double mu0) {
  AssociatedVolume av = associated_volume(t, mu0);
  // Urbantke: g_ab dV ~ eps^ijk (i_a w_i) ^ (i_b w_j) ^ w_k fixes the conformal class.
  std::array<Mat4, 3> m;
  for (int i = 0; i < 3; ++i) m[i] = form_to_matrix<double>(t.col(i));
  static constexpr int perm[6][3] = {{0, 1, 2}, {1, 2, 0}, {2, 0, 1}, {1, 0, 2}, {0, 2, 1}, {2, 1, 0}};
  Mat4 G = Mat4::Zero();
  for (int a = 0; a < 4; ++a)
    for (int b = a; b < 4; ++b) {
      double v = 0;
      for (int p = 0; p < 6; ++p) {
        const int* q = perm[p];
        Vec4 ia = m[q[0]].row(a).transpose(), ib = m[q[1]].row(b).transpose();
        v += (p < 3 ? 1.0 : -1.0) * wedge<double>(wedge1<double>(ia, ib), t.col(q[2]));
      }
      G(a, b) = G(b, a) = v / 6.0;
    }
  if (G.trace() < 0) G = -G;
  double d = G.determinant();
  if (!(d > 0)) throw DefinitenessError("degenerate triple");
  Mat4 g = G * std::sqrt(av.mu / std::sqrt(d));
  Eigen::LLT<Mat4> llt(g);
  if (llt.info() != Eigen::Success) throw DefinitenessError("triple metric is not positive definite");
  return g;
}

double su2_deviation(const Triple& t, double mu0) {
  // spectral norm, so rotating the triple leaves it unchanged
  Eigen::SelfAdjointEigenSolver<Mat3> es(associated_volume(t, mu0).Q, Eigen::EigenvaluesOnly);
  return (es.eigenvalues().array() - 1.0).abs().maxCoeff();
}

double su2_volume_gap(const Triple& t, double mu0) {
  double sum = 0;
  for (int i = 0; i < 3; ++i) sum += wedge<double>(t.col(i), t.col(i));
  return std::abs(associated_volume(t, mu0).mu - sum / 6.0);
}

Mat6 hodge_star(const Mat4& g) {
  Mat4 gi = g.inverse();
  Mat6 L;
  for (int p = 0; p < 6; ++p)
    for (int q = 0; q < 6; ++q) {
      int i = kPair[p][0], j = kPair[p][1], k = kPair[q][0], l = kPair[q][1];
      L(p, q) = gi(i, k) * gi(j, l) - gi(i, l) * gi(j, k);
    }
  return std::sqrt(g.determinant()) * wedge_matrix<double>() * L;
}

std::pair<Form2, Form2> sd_asd_split(const Mat4& g, const Form2& eta) {
  Form2 s = hodge_star(g) * eta;
  return {0.5 * (eta + s), 0.5 * (eta - s)};
}

Triple cy_to_hk(const Form2& omega, const Form2& re_Omega, const Form2& im_Omega) {
  Triple t;
  t << omega, re_Omega, im_Omega;
  return t;
}

static void check_unit(const Vec3& e) {
  if (std::abs(e.norm() - 1.0) > 1e-12) throw DomainError("direction must be a unit vector");
}

Mat3 rotation_to(const Vec3& e) {
  check_unit(e);
  Vec3 e1 = Vec3::UnitX();
  Vec3 axis = e1.cross(e);
  double s = axis.norm(), c = e1.dot(e);
  if (s < 1e-15) {
    if (c > 0) return Mat3::Identity();
    return Eigen::AngleAxisd(M_PI, Vec3::UnitY()).toRotationMatrix();
  }
  return Eigen::AngleAxisd(std::atan2(s, c), axis / s).toRotationMatrix();
}

CYStructure hk_to_cy(const Triple& t, const Vec3& e) {
  Mat3 A = rotation_to(e);
  return {t * e, t * A.col(1), t * A.col(2)};
}

Triple rotate_triple(const Vec3& e, const Triple& t) { return t * rotation_to(e).transpose(); }

Mat3 self_dual_coefficients(const Triple& eta, const Triple& t, double mu0) {
  Mat3 P = (0.5 / mu0) * eta.transpose() * wedge_matrix<double>() * t;
  return P * intersection_matrix<double>(t, mu0).inverse();
}

}  // namespace kummer
