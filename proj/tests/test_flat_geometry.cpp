#include <Eigen/LU>
#include <random>
#include <set>

#include "doctest.h"
#include "kummer/errors.hpp"
#include "kummer/flat_geometry.hpp"

using namespace kummer;

TEST_CASE("flat Kahler data is the standard constant structure") {
  auto d = flat_kahler_data(Vec4(0.3, -1.0, 2.0, 0.1));
  CHECK(d.g == Mat4::Identity());
  CHECK(d.omega == (Form2() << 1, 0, 0, 0, 0, 1).finished());
  CHECK(d.re_Omega == (Form2() << 0, 1, 0, 0, -1, 0).finished());
  CHECK(d.im_Omega == (Form2() << 0, 0, 1, 1, 0, 0).finished());
}

TEST_CASE("Omega = dz1 ^ dz2 expands to the stated real forms") {
  // dz1 = dx1 + i dx2, dz2 = dx3 + i dx4 as complex 1-forms
  Eigen::Matrix<Complex, 4, 1> dz1(1, Complex(0, 1), 0, 0), dz2(0, 0, 1, Complex(0, 1));
  for (int p = 0; p < 6; ++p) {
    int i = kPair[p][0], j = kPair[p][1];
    Complex c = dz1(i) * dz2(j) - dz1(j) * dz2(i);
    CHECK(c.real() == flat_re_omega()(p));
    CHECK(c.imag() == flat_im_omega()(p));
  }
}

TEST_CASE("wedge table: flat triple squares to twice the volume, mixed terms vanish") {
  Triple t = flat_triple();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(wedge<double>(t.col(i), t.col(j)) == (i == j ? 2.0 : 0.0));
}

TEST_CASE("wedge table agrees with the antisymmetrized 1-form products") {
  std::mt19937 rng(3);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 20; ++trial) {
    Vec4 a, b, c, d;
    for (int i = 0; i < 4; ++i) a(i) = n(rng), b(i) = n(rng), c(i) = n(rng), d(i) = n(rng);
    Mat4 m;
    m << a, b, c, d;
    double w = wedge<double>(wedge1<double>(a, b), wedge1<double>(c, d));
    CHECK(w == doctest::Approx(m.determinant()).epsilon(1e-12));
  }
}

TEST_CASE("flat star is an involution with alpha ^ *beta = <alpha, beta> vol") {
  for (int p = 0; p < 6; ++p)
    for (int q = 0; q < 6; ++q) {
      Form2 a = Form2::Unit(p), b = Form2::Unit(q);
      CHECK(wedge<double>(a, flat_star<double>(b)) == (p == q ? 1.0 : 0.0));
    }
  CHECK((wedge_matrix<double>() * wedge_matrix<double>()).isIdentity());
}

TEST_CASE("distance to the singular set") {
  FlatMetricSpec spec;
  CHECK(dist_to_singular_set(Vec4(0.5, 0, 0.5, 0), spec) == 0.0);
  CHECK(dist_to_singular_set(Vec4(0.25, 0, 0, 0), spec) == doctest::Approx(0.25));
  auto p = make_orbifold_point(Vec4(0.5, 0.5, 0.5, 0.5));
  CHECK(p.is_singular);
  CHECK(dist_to_singular_set(p, spec) == 0.0);
}

TEST_CASE("distance agrees with a brute-force search over translates") {
  FlatMetricSpec spec;
  spec.gram << 1.3, 0.2, 0, 0.1, 0.2, 0.9, 0.05, 0, 0, 0.05, 1.1, 0, 0.1, 0, 0, 1.0;
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1, 2);
  for (int trial = 0; trial < 30; ++trial) {
    Vec4 x(u(rng), u(rng), u(rng), u(rng));
    double best = 1e9;
    for (int a = -6; a <= 6; ++a)
      for (int b = -6; b <= 6; ++b)
        for (int c = -6; c <= 6; ++c)
          for (int d = -6; d <= 6; ++d) {
            Vec4 m = 0.5 * Vec4(a, b, c, d) + 0.5 * Vec4(std::round(2 * x(0)), std::round(2 * x(1)),
                                                        std::round(2 * x(2)), std::round(2 * x(3)));
            Vec4 e = x - m;
            if (e.cwiseAbs().maxCoeff() > 2) continue;
            best = std::min(best, std::sqrt(e.dot(spec.gram * e)));
          }
    CHECK(dist_to_singular_set(x, spec) == doctest::Approx(best).epsilon(1e-13));
  }
}

TEST_CASE("distance is 1-Lipschitz for the gram metric") {
  FlatMetricSpec spec;
  spec.gram = Mat4::Identity() * 1.7;
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 500; ++trial) {
    Vec4 x(u(rng), u(rng), u(rng), u(rng)), y(u(rng), u(rng), u(rng), u(rng));
    Vec4 d = x - y;
    double lhs = std::abs(dist_to_singular_set(x, spec) - dist_to_singular_set(y, spec));
    CHECK(lhs <= std::sqrt(d.dot(spec.gram * d)) + 1e-14);
  }
}

TEST_CASE("exhaustive search finds exactly 16 singular classes") {
  std::set<int> found;
  for (int m = 0; m < 3 * 3 * 3 * 3; ++m) {
    Vec4 x;
    int c = m;
    for (int i = 0; i < 4; ++i) x(i) = 0.5 * (c % 3), c /= 3;
    auto p = make_orbifold_point(x);
    REQUIRE(p.is_singular);
    found.insert(p.singular_index);
  }
  CHECK(found.size() == 16);
  for (auto& p : singular_points()) CHECK(make_orbifold_point(p).singular_index == singular_index_of(p));
}

TEST_CASE("orbifold representatives identify x with -x and translates") {
  Vec4 x(0.13, 0.77, 0.4, 0.91);
  CHECK(make_orbifold_point(x) == make_orbifold_point(-x));
  CHECK(make_orbifold_point(x) == make_orbifold_point(x + Vec4(1, -2, 3, 0)));
  CHECK(!make_orbifold_point(x).is_singular);
  CHECK(make_orbifold_point(Vec4(1.0, 0, 0, 0)).rep == Vec4::Zero());
}

TEST_CASE("parity checks") {
  std::vector<Vec4> pts;
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int i = 0; i < 10; ++i) {
    Vec4 x(u(rng), u(rng), u(rng), u(rng));
    pts.push_back(x);
    pts.push_back(-x);
  }
  std::vector<VecX> sq, coframe, lin;
  double maxx = 0;
  for (auto& x : pts) {
    sq.push_back(VecX::Constant(1, x.squaredNorm()));
    coframe.push_back(Vec4::Unit(0));
    lin.push_back(VecX::Constant(1, x(0)));
    maxx = std::max(maxx, std::abs(x(0)));
  }
  auto r1 = z2_parity_check(pts, sq, 0, Parity::Even);
  CHECK(r1.ok);
  CHECK(r1.violation == 0.0);
  auto r2 = z2_parity_check(pts, coframe, 1, Parity::Odd);
  CHECK(r2.ok);
  CHECK(r2.violation == 0.0);
  auto r3 = z2_parity_check(pts, lin, 0, Parity::Even);
  CHECK(!r3.ok);
  CHECK(r3.violation == doctest::Approx(2 * maxx));
  pts.pop_back();
  sq.pop_back();
  CHECK_THROWS_AS(z2_parity_check(pts, sq, 0, Parity::Even), ConfigError);
}

TEST_CASE("flat moduli count") {
  CHECK(flat_moduli_dim() == 10);
  CHECK(gram_tangent_rank(Mat4::Identity()) == 10);
  Mat4 B;
  B << 1, 0.2, 0, 0, 0, 1.1, 0.3, 0, 0.1, 0, 0.9, 0.2, 0, 0, 0, 1.2;
  CHECK(gram_tangent_rank(B) == 10);
  CHECK(16 - gram_tangent_rank(B) == 6);
}

TEST_CASE("flat metric spec JSON round trip and validation") {
  FlatMetricSpec s;
  s.gram(0, 1) = s.gram(1, 0) = 0.25;
  auto back = FlatMetricSpec::from_json(s.to_json());
  CHECK(back.gram == s.gram);
  CHECK_THROWS_AS(FlatMetricSpec::from_json(R"({"gram": [[1,0,0,0],[0,-1,0,0],[0,0,1,0],[0,0,0,1]]})"), ConfigError);
  Mat4 C = s.euclidean_frame();
  CHECK((C.transpose() * C - s.gram).cwiseAbs().maxCoeff() < 1e-15);
}
