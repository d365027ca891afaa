#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <random>

#include "doctest.h"
#include "kummer/errors.hpp"
#include "kummer/curvature.hpp"
#include "kummer/fit.hpp"
#include "kummer/gluing.hpp"
#include "kummer/triple.hpp"

using namespace kummer;

namespace {

Vec4 random_direction(std::mt19937& rng) {
  std::normal_distribution<double> n;
  return Vec4(n(rng), n(rng), n(rng), n(rng)).normalized();
}

Vec3 random_unit(std::mt19937& rng) {
  std::normal_distribution<double> n;
  return Vec3(n(rng), n(rng), n(rng)).normalized();
}

// Flux of omega_eps through the disc annulus {z2 = 0, a <= |z1| <= b}, by
// Gauss-Legendre on pieces split at the seams.
double disc_flux(double eps, double a, double b, const CutoffProfile& chi) {
  static const double xg[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                               0.9061798459386640};
  static const double wg[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
                               0.2369268850561891};
  std::vector<double> cuts = {a, std::sqrt(eps), 2 * std::sqrt(eps), b};
  double total = 0;
  for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
    const int m = 200;
    double h = (cuts[p + 1] - cuts[p]) / m;
    for (int i = 0; i < m; ++i) {
      double c = cuts[p] + (i + 0.5) * h;
      for (int q = 0; q < 5; ++q) {
        double r = c + 0.5 * h * xg[q];
        double coef = grafted_form(eps, C2(Complex(r, 0), 0), chi)(0);
        total += 0.5 * h * wg[q] * coef * 2 * M_PI * r;
      }
    }
  }
  return total;
}

PartialSmoothingConfig config_with(std::vector<int> I, double eps) {
  PartialSmoothingConfig c;
  c.I = I;
  for (int i : I) {
    c.eps[i] = eps;
    c.e[i] = Vec3::UnitX();
  }
  return c;
}

}  // namespace

TEST_CASE("cutoff profile values and bounds") {
  CutoffProfile chi = CutoffProfile::quintic();
  CHECK(cutoff_eval(chi, 1, 0.5, 0) == 1.0);
  CHECK(cutoff_eval(chi, 1, 3.0, 0) == 0.0);
  CHECK(cutoff_eval(chi, 2, 0.75, 1) == doctest::Approx(2 * -15.0 / 8.0).epsilon(1e-14));
  CHECK(kCutoffC1 == chi.c[1]);
  CHECK_THROWS_AS(cutoff_eval(chi, 0, 1, 0), DomainError);

  for (CutoffProfile p : {CutoffProfile::quintic(), CutoffProfile::septic()}) {
    std::array<double, 4> seen{};
    double prev = 1.0;
    for (int i = 0; i <= 200000; ++i) {
      double x = 3.0 * i / 200000;
      for (int k = 0; k < 4; ++k) seen[k] = std::max(seen[k], std::abs(p.eval(x, k)));
      double v = p.eval(x, 0);
      CHECK(v <= prev);
      prev = v;
      if (x < 1 || x > 2)
        for (int k = 1; k < 4; ++k) CHECK(p.eval(x, k) == 0.0);
    }
    for (int k = 0; k < 4; ++k) {
      CHECK(seen[k] <= p.c[k] * (1 + 1e-12));
      CHECK(seen[k] >= p.c[k] * (1 - 1e-4));
    }
    // derivatives against differences
    for (double x : {1.2, 1.5, 1.77}) {
      double h = 1e-5;
      for (int k = 0; k < 3; ++k)
        CHECK((p.eval(x + h, k) - p.eval(x - h, k)) / (2 * h) == doctest::Approx(p.eval(x, k + 1)).epsilon(1e-6));
    }
  }
}

TEST_CASE("interpolated potentials") {
  CHECK(preglue_potential(0.01, 0.05, PregluePotential::Tilde, 0) == eh_potential(1e-4, 0.05, 0));
  CHECK(preglue_potential(0.01, 0.5, PregluePotential::Tilde, 0) == 0.125);
  CHECK(preglue_potential(0.01, 5.0, PregluePotential::Hat, 0) == eh_potential(1.0, 5.0, 0));
  CHECK(preglue_potential(0.01, 25.0, PregluePotential::Hat, 0) == 312.5);
  CHECK_THROWS_AS(preglue_potential(1.5, 0.5, PregluePotential::Tilde, 0), ConfigError);
  CHECK_THROWS_AS(preglue_potential(0.01, 0.0, PregluePotential::Tilde, 0), DomainError);

  std::mt19937 rng(1);
  for (double eps : {0.04, 0.01, 0.0025}) {
    std::uniform_real_distribution<double> u(0.5 * std::sqrt(eps), 2.5 * std::sqrt(eps));
    for (int i = 0; i < 200; ++i) {
      double r = u(rng);
      for (int k = 0; k <= 4; ++k) {
        double t = preglue_potential(eps, r, PregluePotential::Tilde, k);
        double h = std::pow(eps, 2 - k) * preglue_potential(eps, r / eps, PregluePotential::Hat, k);
        CHECK(t == doctest::Approx(h).epsilon(1e-12));
      }
    }
    // derivative chain consistency
    for (double t : {1.2, 1.5, 1.8}) {
      double r = t * std::sqrt(eps), h = 1e-4 * r;
      for (int k = 0; k < 4; ++k) {
        double fd = (preglue_potential(eps, r + h, PregluePotential::Tilde, k) -
                     preglue_potential(eps, r - h, PregluePotential::Tilde, k)) / (2 * h);
        double an = preglue_potential(eps, r, PregluePotential::Tilde, k + 1);
        CHECK(std::abs(fd - an) < 1e-6 * (1 + std::abs(an)));
      }
    }
  }

  // difference from the flat potential scales as eps^3
  std::vector<double> es = {0.04, 0.01, 0.0025}, sup;
  for (double eps : es) {
    double m = 0;
    for (int j = 0; j < 200; ++j) {
      double r = std::sqrt(eps) * (1 + (j + 0.5) / 200);
      m = std::max(m, std::abs(preglue_potential(eps, r, PregluePotential::Tilde, 0) - 0.5 * r * r));
    }
    sup.push_back(m);
  }
  CHECK(fit_power_law(es, sup).slope == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("grafted form by region") {
  std::mt19937 rng(3);
  const double eps = 0.01;
  for (int i = 0; i < 20; ++i) {
    Vec4 y = random_direction(rng) * 2.5 * std::sqrt(eps);
    CHECK(grafted_form(eps, to_complex(y)) == flat_omega0());
    CHECK(ricci_potential(eps, y) == 0.0);
  }
  for (int i = 0; i < 20; ++i) {
    C2 z = to_complex(random_direction(rng) * eps / 2);
    Form2 scaled = eh_kahler_form(1.0, C2(z / eps));
    CHECK((grafted_form(eps, z) - scaled).cwiseAbs().maxCoeff() < 1e-12 * scaled.cwiseAbs().maxCoeff());
    CHECK(std::abs(ricci_potential(eps, to_real(z))) < 1e-14);
  }
  CHECK_THROWS_AS(grafted_form(eps, C2::Zero()), DomainError);
}

TEST_CASE("seams are continuous") {
  std::mt19937 rng(5);
  for (CutoffProfile chi : {CutoffProfile::quintic(), CutoffProfile::septic()})
    for (int i = 0; i < 200; ++i) {
      double eps = std::uniform_real_distribution<double>(0.001, 0.05)(rng);
      double r = (i % 2 ? 1.0 : 2.0) * std::sqrt(eps);
      C2 z = to_complex(random_direction(rng) * r);
      Form2 across = hermitian_form(radial_hermitian(interpolated_radial(eps, r, chi), z));
      CHECK((grafted_form(eps, z, chi) - across).cwiseAbs().maxCoeff() < 1e-10);
      // one step outside the seam the dispatched value is close as well
      double out = r * (i % 2 ? 1 - 1e-9 : 1 + 1e-9);
      C2 z2 = z * (out / r);
      CHECK((grafted_form(eps, z2, chi) - across).cwiseAbs().maxCoeff() < 1e-7);
    }
}

TEST_CASE("annulus estimates scale with eps") {
  std::vector<double> es = {0.04, 0.02, 0.01, 0.005}, w, p, ric, q, v;
  for (double e : es) {
    AnnulusEstimates a = annulus_estimates(e);
    w.push_back(a.form_deviation);
    p.push_back(a.ricci_potential);
    ric.push_back(a.ricci);
    q.push_back(a.q_deviation);
    v.push_back(a.volume_deviation);
  }
  CHECK(fit_power_law(es, w).slope == doctest::Approx(2.0).epsilon(0.05));
  CHECK(fit_power_law(es, p).slope == doctest::Approx(2.0).epsilon(0.05));
  CHECK(fit_power_law(es, ric).slope == doctest::Approx(1.0).epsilon(0.05));
  CHECK(fit_power_law(es, q).slope == doctest::Approx(2.0).epsilon(0.05));
  CHECK(fit_power_law(es, v).slope == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("Ricci curvature of the grafted metric outside the annulus") {
  const double eps = 0.01;
  CHECK(grafted_ricci_check(eps, {Vec4(0.3, 0.1, 0, 0)}) < 1e-10);
  // inner region is Eguchi-Hanson at scale eps^2
  std::vector<Vec4> inner = {Vec4(0.02, 0.01, 0, 0.01), Vec4(0, 0.05, 0.03, 0)};
  MetricField g = [eps](const Vec4& y) { return grafted_metric(eps, y); };
  for (const auto& y : inner) {
    Curvature c = richardson_curvature(g, y, 0.01 * y.norm());
    CHECK(c.ricci_norm < 1e-5 * c.riemann_norm);
  }
}

TEST_CASE("grafted form is closed") {
  std::mt19937 rng(7);
  auto dform = [](double eps, const Vec4& x, double h) {
    std::array<Mat4, 4> d;
    for (int c = 0; c < 4; ++c) {
      Vec4 e = Vec4::Unit(c) * h;
      d[c] = (form_to_matrix<double>(grafted_form(eps, to_complex(x + e))) -
              form_to_matrix<double>(grafted_form(eps, to_complex(x - e)))) / (2 * h);
    }
    double worst = 0;
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b)
        for (int c = b + 1; c < 4; ++c) worst = std::max(worst, std::abs(d[a](b, c) - d[b](a, c) + d[c](a, b)));
    return worst;
  };
  const double eps = 0.01;
  for (int i = 0; i < 10; ++i) {
    Vec4 y = random_direction(rng) * std::sqrt(eps) * std::uniform_real_distribution<double>(1.1, 1.9)(rng);
    double h = 2e-3 * std::sqrt(eps);
    double e1 = dform(eps, y, h), e2 = dform(eps, y, h / 2);
    CHECK(e2 < 1e-4);
    CHECK(e2 <= 0.3 * e1 + 1e-12);
  }
}

TEST_CASE("cutoff independence of the class") {
  const double eps = 0.01;
  double a = 0.5 * std::sqrt(eps), b = 3 * std::sqrt(eps);
  double q = disc_flux(eps, a, b, CutoffProfile::quintic());
  double s = disc_flux(eps, a, b, CutoffProfile::septic());
  // Stokes: 2 pi [u phi_u] between the ends, both outside the cutoff zone
  double exact = 2 * M_PI * (b * b * 0.5 - a * a * eh_radial(eps * eps, a * a).phi_u);
  CHECK(q == doctest::Approx(exact).epsilon(1e-10));
  CHECK(s == doctest::Approx(exact).epsilon(1e-10));
  // the bolt itself sits in the inner region, where both profiles agree
  for (double r : {0.2, 0.7}) {
    C2 z(Complex(r * std::sqrt(eps) / 2, 0), Complex(0, r * std::sqrt(eps) / 3));
    CHECK(grafted_form(eps, z, CutoffProfile::quintic()) == grafted_form(eps, z, CutoffProfile::septic()));
  }
  CHECK(bolt_geometry(eps * eps).volume == doctest::Approx(bubble_volume(eps)).epsilon(1e-6));
}

TEST_CASE("bubble rotation") {
  std::mt19937 rng(9);
  CHECK(bubble_frame_rotation(Vec3::UnitX()) == Mat4::Identity());
  for (int i = 0; i < 50; ++i) {
    Vec3 e = random_unit(rng);
    Mat4 R = bubble_frame_rotation(e);
    CHECK((R.transpose() * R - Mat4::Identity()).norm() < 1e-13);
    CHECK(R.determinant() == doctest::Approx(1.0));
    const double eps = 0.01;
    // flat outside the annulus, whatever the direction
    Vec4 y = random_direction(rng) * 2.2 * std::sqrt(eps);
    CHECK((grafted_chart_triple(eps, e, y) - flat_triple()).cwiseAbs().maxCoeff() < 1e-13);
    // inside, e . triple is the pulled-back Eguchi-Hanson Kahler form
    Vec4 yi = random_direction(rng) * 0.5 * std::sqrt(eps);
    Triple t = grafted_chart_triple(eps, e, yi);
    Form2 want = pullback<double>(eh_kahler_form(eps * eps, to_complex(R * yi)), R);
    CHECK((t * e - want).cwiseAbs().maxCoeff() < 1e-12 * want.cwiseAbs().maxCoeff());
    CHECK(su2_deviation(t) < 1e-9);
  }
  Vec4 y(0.05, 0.07, -0.02, 0.1);
  Triple plain;
  plain << grafted_form(0.01, to_complex(y)), flat_re_omega(), flat_im_omega();
  CHECK(grafted_chart_triple(0.01, Vec3::UnitX(), y) == plain);
}

TEST_CASE("partial smoothing configurations") {
  PartialSmoothingConfig all = config_with({1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16}, 0.002);
  CHECK_NOTHROW(all.validate());
  CHECK(all.parameter_count() == 58);
  CHECK(PartialSmoothingConfig{}.parameter_count() == 10);

  PartialSmoothingConfig bad = config_with({1}, 0.04);
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = config_with({1}, 0.002);
  bad.e[1] = Vec3(0, 2, 0);
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = config_with({17}, 0.002);
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK(max_config_eps() == doctest::Approx(0.0036));

  PartialSmoothingConfig c = config_with({1, 6}, 0.003);
  c.e[6] = Vec3(0, 0.6, 0.8);
  c.flat.gram << 1.2, 0.1, 0, 0, 0.1, 1.0, 0, 0.05, 0, 0, 0.9, 0, 0, 0.05, 0, 1.1;
  PartialSmoothingConfig back = PartialSmoothingConfig::from_json(c.to_json());
  CHECK(back.I == c.I);
  CHECK(back.eps == c.eps);
  CHECK((back.e.at(6) - c.e.at(6)).norm() == 0.0);
  CHECK(back.flat.gram == c.flat.gram);
  CHECK_THROWS_AS(PartialSmoothingConfig::from_json("{\"I\": [1]}"), ConfigError);
  CHECK_THROWS_AS(PartialSmoothingConfig::from_json("not json"), ConfigError);
}

TEST_CASE("grafted triple on the torus") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0, 1);
  PartialSmoothingConfig none;
  none.flat.gram << 1.2, 0.1, 0, 0, 0.1, 1.0, 0, 0.05, 0, 0, 0.9, 0, 0, 0.05, 0, 1.1;
  for (int i = 0; i < 50; ++i) {
    Vec4 x(u(rng), u(rng), u(rng), u(rng));
    CHECK((grafted_torus_metric(none, x) - none.flat.gram).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(classify(none, x).region == Region::Outer);
  }

  PartialSmoothingConfig c = none;
  c.I = {1, 16};
  c.eps = {{1, 0.003}, {16, 0.002}};
  c.e = {{1, Vec3(0, 0.6, 0.8)}, {16, Vec3::UnitX()}};
  c.validate();
  Mat4 C = c.flat.euclidean_frame();
  const Vec4 p16(0.5, 0.5, 0.5, 0.5);
  for (int i = 0; i < 50; ++i) {
    Vec4 d = random_direction(rng);
    for (double t : {0.5, 1.5, 2.5}) {
      Vec4 x = p16 + C.inverse() * d * t * std::sqrt(0.002);
      GraftedFieldPoint g = classify(c, x);
      CHECK(g.nearest_singular_index == 16);
      CHECK(g.radius == doctest::Approx(t * std::sqrt(0.002)).epsilon(1e-12));
      CHECK(g.region == (t < 1 ? Region::Inner : t < 2 ? Region::Annulus : Region::Outer));
      Triple a = grafted_triple(c, x);
      // periodic and invariant under x -> -x
      CHECK((grafted_triple(c, Vec4(x + Vec4(1, -2, 0, 3))) - a).cwiseAbs().maxCoeff() < 1e-9 * a.norm());
      CHECK((grafted_triple(c, Vec4(-x)) - a).cwiseAbs().maxCoeff() < 1e-9 * a.norm());
      Mat4 g4 = grafted_torus_metric(c, x);
      CHECK(Eigen::LLT<Mat4>(g4).info() == Eigen::Success);
    }
    // near point 1 the triple is rotated but still hyperkahler inside
    Vec4 x1 = C.inverse() * d * 0.5 * std::sqrt(0.003);
    CHECK(su2_deviation(grafted_triple(c, x1)) < 1e-9);
  }
}

TEST_CASE("degeneration schedule bookkeeping") {
  std::vector<int> all(16);
  for (int i = 0; i < 16; ++i) all[i] = i + 1;
  std::vector<PartialSmoothingConfig> stages = {config_with(all, 0.002), config_with({2, 5, 11}, 0.002),
                                                PartialSmoothingConfig{}};
  stages[0].eps[3] = 0.001;
  auto rep = degeneration_schedule(stages, 400, 3);
  REQUIRE(rep.size() == 3);
  CHECK(rep[0].parameter_count == 58);
  CHECK(rep[1].parameter_count == 19);
  CHECK(rep[2].parameter_count == 10);
  for (const auto& s : rep)
    for (const auto& b : s.bubbles) {
      CHECK(b.volume == M_PI * (b.eps * b.eps));
      CHECK(b.diameter == b.eps / 2);
      CHECK(b.volume_quadrature == doctest::Approx(b.volume).epsilon(1e-6));
      CHECK(s.q_deviation < 1e-3);
    }
  CHECK(rep[2].gh_distortion == 0.0);
  CHECK(rep[0].gh_distortion >= rep[1].gh_distortion);

  std::vector<PartialSmoothingConfig> bad = {config_with({1, 2}, 0.002), config_with({3}, 0.002)};
  CHECK_THROWS_AS(degeneration_schedule(bad), ConfigError);
  bad = {config_with({1, 2}, 0.002), config_with({1, 2}, 0.002)};
  CHECK_THROWS_AS(degeneration_schedule(bad), ConfigError);
}
