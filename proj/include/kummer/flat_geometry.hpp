#pragma once
#include <array>
#include <optional>
#include <string>
#include <vector>

#include "kummer/types.hpp"

namespace kummer {

// Index pairs of the 2-form basis, fixed for the whole library.
inline constexpr int kPair[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};

// a ^ b = (a^T W b) dx1234. W doubles as the flat Hodge star on 2-forms.
template <typename S>
Mat6T<S> wedge_matrix() {
  Mat6T<S> w = Mat6T<S>::Zero();
  w(0, 5) = w(5, 0) = S(1);
  w(1, 4) = w(4, 1) = S(-1);
  w(2, 3) = w(3, 2) = S(1);
  return w;
}

template <typename S>
S wedge(const Form2T<S>& a, const Form2T<S>& b) {
  return a(0) * b(5) - a(1) * b(4) + a(2) * b(3) + a(3) * b(2) - a(4) * b(1) + a(5) * b(0);
}

template <typename S>
Form2T<S> flat_star(const Form2T<S>& a) {
  return wedge_matrix<S>() * a;
}

// Antisymmetric 4x4 matrix with m(i,j) = coefficient of dx^i ^ dx^j.
template <typename S>
Mat4T<S> form_to_matrix(const Form2T<S>& a) {
  Mat4T<S> m = Mat4T<S>::Zero();
  for (int p = 0; p < 6; ++p) {
    m(kPair[p][0], kPair[p][1]) = a(p);
    m(kPair[p][1], kPair[p][0]) = -a(p);
  }
  return m;
}

template <typename S>
Form2T<S> matrix_to_form(const Mat4T<S>& m) {
  Form2T<S> a;
  for (int p = 0; p < 6; ++p) a(p) = S(0.5) * (m(kPair[p][0], kPair[p][1]) - m(kPair[p][1], kPair[p][0]));
  return a;
}

// alpha ^ beta for 1-forms.
template <typename S>
Form2T<S> wedge1(const Vec4T<S>& a, const Vec4T<S>& b) {
  Form2T<S> f;
  for (int p = 0; p < 6; ++p) {
    int i = kPair[p][0], j = kPair[p][1];
    f(p) = a(i) * b(j) - a(j) * b(i);
  }
  return f;
}

// Pullback of a 2-form under the linear map y = M x.
template <typename S>
Form2T<S> pullback(const Form2T<S>& a, const Mat4T<S>& M) {
  return matrix_to_form<S>(M.transpose() * form_to_matrix<S>(a) * M);
}

Form2 flat_omega0();
Form2 flat_re_omega();
Form2 flat_im_omega();
Triple flat_triple();
// Standard complex structure on (x1, x2, x3, x4) = (Re z1, Im z1, Re z2, Im z2).
Mat4 flat_complex_structure();

struct FlatKahlerData {
  Mat4 g;
  Form2 omega;
  Form2 re_Omega;
  Form2 im_Omega;
};

FlatKahlerData flat_kahler_data(const Vec4& point);

struct FlatMetricSpec {
  Mat4 gram = Mat4::Identity();     // metric coefficients in lattice coordinates
  Mat4 lattice = Mat4::Identity();  // columns generate the lattice

  bool valid() const;
  void validate() const;  // throws ConfigError
  // C with gram = C^T C; y = C x are Euclidean coordinates.
  Mat4 euclidean_frame() const;

  std::string to_json() const;
  static FlatMetricSpec from_json(const std::string& text);
};

struct OrbifoldPoint {
  Vec4 rep = Vec4::Zero();
  bool is_singular = false;
  int singular_index = 0;  // 1..16, 0 when regular

  bool operator==(const OrbifoldPoint& o) const;
};

// Canonical representative in [0,1)^4 of the class of x under translations
// and x -> -x.
OrbifoldPoint make_orbifold_point(const Vec4& x, double tol = 1e-12);

// The 16 half-lattice points in [0,1)^4; index i+1 <-> bits of 2p.
std::array<Vec4, 16> singular_points();
int singular_index_of(const Vec4& half_lattice_point);

struct NearestSingular {
  double distance;
  int index;      // 1..16
  Vec4 offset;    // x - p in lattice coordinates, minimal image
};

NearestSingular nearest_singular(const Vec4& x, const FlatMetricSpec& spec);
double dist_to_singular_set(const Vec4& x, const FlatMetricSpec& spec);
double dist_to_singular_set(const OrbifoldPoint& x, const FlatMetricSpec& spec);

enum class Parity { Even, Odd };

struct ParityReport {
  bool ok;
  double violation;
};

// Checks iota^* v = +-v for samples of a degree-p form at paired points.
// values[i] holds the coefficients at points[i]; every point needs a partner
// at -x (tolerance pair_tol), otherwise ConfigError.
ParityReport z2_parity_check(const std::vector<Vec4>& points, const std::vector<VecX>& values,
                             int degree, Parity kind, double tol = 1e-12, double pair_tol = 1e-12);

int flat_moduli_dim();
// Rank of B -> d(B^T B) on gl(4): symmetric directions survive.
int gram_tangent_rank(const Mat4& B);

}  // namespace kummer
