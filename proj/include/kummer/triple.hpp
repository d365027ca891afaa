#pragma once
#include <utility>

#include "kummer/errors.hpp"
#include "kummer/flat_geometry.hpp"
#include "kummer/types.hpp"

namespace kummer {

// Q = 1/2 w w^T / mu0, with the wedge taken componentwise.
template <typename S>
Mat3T<S> intersection_matrix(const TripleT<S>& t, S mu0 = S(1)) {
  if (mu0 == S(0)) throw DomainError("degenerate reference volume");
  return (S(0.5) / mu0) * t.transpose() * wedge_matrix<S>() * t;
}

struct AssociatedVolume {
  double mu;  // coefficient of dx1234
  Mat3 Q;     // normalized, det Q = 1
};

AssociatedVolume associated_volume(const Triple& t, double mu0 = 1.0);

// Metric whose self-dual forms are span(t) and whose volume is mu_t.
Mat4 triple_to_metric(const Triple& t, double mu0 = 1.0);

// max |lambda - 1| over eigenvalues of Q_t.
double su2_deviation(const Triple& t, double mu0 = 1.0);
// |mu_t - (1/6) sum w_i ^ w_i|, meaningful for SU(2)-structures.
double su2_volume_gap(const Triple& t, double mu0 = 1.0);

// Hodge star on 2-forms for the metric g, in the fixed basis.
Mat6 hodge_star(const Mat4& g);
std::pair<Form2, Form2> sd_asd_split(const Mat4& g, const Form2& eta);

struct CYStructure {
  Form2 omega;
  Form2 re_Omega;
  Form2 im_Omega;
};

Triple cy_to_hk(const Form2& omega, const Form2& re_Omega, const Form2& im_Omega);
// omega_e = e.t, Omega_e = (A^e e2).t + i (A^e e3).t.
CYStructure hk_to_cy(const Triple& t, const Vec3& e);

// Rotation taking e1 to e: about e1 x e, or about e2 when e = -e1.
Mat3 rotation_to(const Vec3& e);
// Component action t -> A^e t.
Triple rotate_triple(const Vec3& e, const Triple& t);

// A with eta_i = sum_j A_ij t_j + (anti-self-dual part).
Mat3 self_dual_coefficients(const Triple& eta, const Triple& t, double mu0 = 1.0);

}  // namespace kummer
