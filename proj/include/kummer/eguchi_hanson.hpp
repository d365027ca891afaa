#pragma once
#include <vector>

#include "kummer/fit.hpp"
#include "kummer/jet.hpp"
#include "kummer/types.hpp"

namespace kummer {

// phi_EH,s(r) - r^2/2 as a jet in r. Written without cancellation:
// W - r^2 = s^2/(W + r^2) and log(r^2/(s+W)) = -log1p((s + W - r^2)/r^2).
template <int N>
Jet<N> eh_difference_jet(double s, const Jet<N>& r) {
  if (s == 0.0) return Jet<N>(0.0);
  Jet<N> r2 = r * r;
  Jet<N> W = sqrt(r2 * r2 + s * s);
  Jet<N> gap = (s * s) / (W + r2);
  return 0.5 * (gap - s * log1p((gap + s) / r2));
}

// d^k/dr^k phi_EH,s at r, k <= 4.
double eh_potential(double s, double r, int k);
// d^k/dr^k (phi_EH,s - phi_0), evaluated without cancellation.
double eh_potential_difference(double s, double r, int k);

struct EguchiHansonProfile {
  double s = 1.0;
  double potential(double r, int k = 0) const { return eh_potential(s, r, k); }
  double difference(double r, int k = 0) const { return eh_potential_difference(s, r, k); }
};

// Derivatives of a U(2)-invariant potential in u = |z|^2.
struct RadialKahler {
  double phi_u;
  double phi_uu;
};

RadialKahler eh_radial(double s, double u);
// Converts radial r-derivatives of a potential to u-derivatives.
RadialKahler radial_from_r(double r, double phi_r, double phi_rr);

Vec4 to_real(const C2& z);
C2 to_complex(const Vec4& x);

// h_{jk} = phi_u delta_jk + phi_uu conj(z_j) z_k, omega = i h_{jk} dz^j ^ dzbar^k.
Mat2c radial_hermitian(const RadialKahler& p, const C2& z);
Mat4 hermitian_metric(const Mat2c& h);
Form2 hermitian_form(const Mat2c& h);

Form2 eh_kahler_form(double s, const C2& z);
Mat4 eh_metric(double s, const C2& z);
Mat4 eh_metric(double s, const Vec4& x);
Triple eh_triple(double s, const C2& z);

// (u, v) with z1^2 = u, z2 = z1 v; the exceptional sphere is u = 0.
struct BlowupChartPoint {
  Complex u;
  Complex v;
  double r2() const { return std::abs(u) * (1.0 + std::norm(v)); }
  C2 lift() const;  // one of the two preimages in C^2
  static BlowupChartPoint from_z(const C2& z);
};

// Kahler potential in the blow-up chart with the pluriharmonic s log|u| term
// removed; smooth across u = 0.
double eh_blowup_potential(double s, const BlowupChartPoint& p);
// Area density of omega_EH restricted to the bolt, in the coordinate v.
double eh_bolt_area_density(double s, Complex v);

struct BoltGeometry {
  double volume;
  double volume_error;       // quadrature estimate of the integration error
  double tail_fraction;      // relative share of the sphere beyond |v| = V
  double diameter;           // sqrt(s)/2 as stated for the bolt
  double geodesic_diameter;  // measured distance between antipodes
  double radius_estimate;    // geodesic_diameter / pi
  int self_intersection;
};

BoltGeometry bolt_geometry(double s, double V = 40.0, double rel_tol = 1e-9);

struct DecayFit {
  SlopeFit fit;
  double exponent = 0;
  double c0 = 0;          // max over the range of |value| * r^{-exponent_nominal}
  bool zero_signal = false;
};

// Fits |d^k/dr^k (phi_EH - phi_0)| against r over [r_min, r_max].
DecayFit eh_decay_profile(double s, int k, double r_min, double r_max, int samples = 33,
                          double max_residual = 0.02);
// Fits max |g_EH - g_0| over several directions at each radius.
DecayFit eh_metric_decay(double s, double r_min, double r_max, int samples = 33);

struct RicciCheck {
  double max_abs = 0;       // max |Ric|_g
  double max_relative = 0;  // max |Ric|_g / |Rm|_g over points with |Rm| > 0
  double max_riemann = 0;
};

RicciCheck eh_ricci_check(double s, const std::vector<Vec4>& points);

}  // namespace kummer
