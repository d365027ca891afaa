#include <random>
#include <sstream>

#include <Eigen/LU>

#include "doctest.h"
#include "kummer/eguchi_hanson.hpp"
#include "kummer/errors.hpp"
#include "kummer/gluing.hpp"
#include "kummer/weighted.hpp"

using namespace kummer;

namespace {

double S(double t) { return t <= 0 ? 0 : t >= 1 ? 1 : t * t * t * (10 - 15 * t + 6 * t * t); }

Mat4 random_metric(std::mt19937& rng) {
  std::normal_distribution<double> n;
  Mat4 B;
  for (int i = 0; i < 16; ++i) B(i) = 0.3 * n(rng);
  return B * B.transpose() + Mat4::Identity();
}

// A 1-form field a = grad(f) sampled with its first covariant derivative
// taken in chart coefficients; enough for identity checks.
std::vector<FieldSample> synthetic_samples(std::mt19937& rng, int n, const WeightFunction& w) {
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  std::normal_distribution<double> g;
  std::vector<FieldSample> out;
  Mat4 metric = random_metric(rng);
  for (int i = 0; i < n; ++i) {
    FieldSample s;
    s.point = Vec4(u(rng), u(rng), u(rng), u(rng));
    s.metric = metric;
    s.weight = w(s.point.norm());
    VecX a(4), da(16);
    for (int c = 0; c < 4; ++c) a(c) = std::sin(3 * s.point(c)) + 0.1 * g(rng);
    for (int c = 0; c < 16; ++c) da(c) = std::cos(s.point(c % 4) + c);
    s.jets = {a, da};
    out.push_back(s);
  }
  return out;
}

}  // namespace

TEST_CASE("weight function examples") {
  WeightFunction w = WeightFunction::rho_eps(0.01);
  CHECK(w(0.005) == 0.01);
  CHECK(w(0.05) == 0.05);
  CHECK(w(0.5) == 1.0);
  CHECK(WeightFunction::rho_tilde0()(0.5) == 1.0);
  CHECK(WeightFunction::rho_tilde0()(3.0) == 3.0);
  CHECK(WeightFunction::rho0()(0.1) == 0.1);
  CHECK(WeightFunction::rho0()(0.3) == 1.0);
  CHECK(weight_eval(w, 0.05) == 0.05);
  CHECK_THROWS_AS(WeightFunction::rho_eps(0.1), ConfigError);
  CHECK_THROWS_AS(w(-1.0), DomainError);
}

TEST_CASE("weights match the zone formulas") {
  std::mt19937 rng(1);
  const double eps = 0.004;
  WeightFunction w = WeightFunction::rho_eps(eps), r0 = WeightFunction::rho0(), rt = WeightFunction::rho_tilde0();
  auto zone = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  for (int i = 0; i < 10000; ++i) {
    double x = zone(0, eps);
    CHECK(w(x) == eps);
    x = zone(2 * eps, 0.125);
    CHECK(w(x) == x);
    CHECK(r0(x) == x);
    x = zone(0.2, 3);
    CHECK(w(x) == 1.0);
    CHECK(r0(x) == 1.0);
    x = zone(0, 1);
    CHECK(rt(x) == 1.0);
    x = zone(2, 50);
    CHECK(rt(x) == x);
    // interpolation zones against the displayed smoothstep formulas
    x = zone(eps, 2 * eps);
    CHECK(w(x) == doctest::Approx(eps + (x - eps) * S((x - eps) / eps)).epsilon(1e-14));
    x = zone(0.125, 0.2);
    CHECK(w(x) == doctest::Approx(x + (1 - x) * S((x - 0.125) / 0.075)).epsilon(1e-14));
    x = zone(1, 2);
    CHECK(rt(x) == doctest::Approx(1 + (x - 1) * S(x - 1)).epsilon(1e-14));
  }
}

TEST_CASE("weights are monotone with bounded gradient") {
  const double eps = 0.004;
  WeightFunction w = WeightFunction::rho_eps(eps), rt = WeightFunction::rho_tilde0();
  const double C1 = kCutoffC1;
  double prev = 0, max_inner = 0, max_outer = 0, max_tilde = 0;
  for (int i = 0; i <= 100000; ++i) {
    double x = 0.3 * i / 100000;
    double v = w(x);
    CHECK(v >= prev);
    CHECK(v >= eps);
    CHECK(v <= 1.0);
    prev = v;
    if (x >= eps && x <= 2 * eps) max_inner = std::max(max_inner, std::abs(w.eval(x, 1)));
    if (x >= 0.125 && x <= 0.2) max_outer = std::max(max_outer, std::abs(w.eval(x, 1)));
  }
  for (int i = 0; i <= 10000; ++i) max_tilde = std::max(max_tilde, std::abs(rt.eval(1 + i / 10000.0, 1)));
  CHECK(max_inner <= C1);
  CHECK(max_outer <= 35 * C1 / 3);
  CHECK(max_tilde <= C1);
  // derivative against differences
  for (double x : {1.5 * eps, 0.15, 0.19}) {
    double h = 1e-7;
    CHECK((w(x + h) - w(x - h)) / (2 * h) == doctest::Approx(w.eval(x, 1)).epsilon(1e-6));
  }
}

TEST_CASE("tensor norms in the Cholesky frame") {
  std::mt19937 rng(3);
  std::normal_distribution<double> n;
  for (int t = 0; t < 20; ++t) {
    Mat4 g = random_metric(rng);
    Mat4 gi = g.inverse();
    Vec4 xi(n(rng), n(rng), n(rng), n(rng));
    CHECK(tensor_norm(xi, g, 0, 1) == doctest::Approx(std::sqrt(xi.dot(gi * xi))).epsilon(1e-12));
    CHECK(tensor_norm(xi, g, 1, 0) == doctest::Approx(std::sqrt(xi.dot(g * xi))).epsilon(1e-12));
    Mat4 T;
    for (int i = 0; i < 16; ++i) T(i) = n(rng);
    VecX flat(16);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) flat(4 * i + j) = T(i, j);
    double want = std::sqrt((gi * T * gi * T.transpose()).trace());
    CHECK(tensor_norm(flat, g, 0, 2) == doctest::Approx(want).epsilon(1e-12));
    VecX s(1);
    s << 2.5;
    CHECK(tensor_norm(s, g, 0, 0) == 2.5);
  }
}

TEST_CASE("weighted norms of model functions") {
  const double eps = 0.01;
  WeightFunction w = WeightFunction::rho_eps(eps);
  std::vector<FieldSample> samples;
  for (int i = 0; i <= 400; ++i) {
    double x = 0.3 * i / 400;
    FieldSample s;
    s.point = Vec4(x, 0, 0, 0);
    s.weight = w(x);
    s.jets = {VecX::Constant(1, 1.0)};
    samples.push_back(s);
  }
  WeightedNormSpec spec;
  spec.delta = -1.0;
  WeightedNorm one = weighted_holder_norm(spec, samples, {});
  CHECK(one.parts[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(one.seminorm_missing);
  CHECK(one.seminorm == 0.0);

  for (auto& s : samples) s.jets[0](0) = std::pow(s.weight, spec.delta);
  CHECK(weighted_holder_norm(spec, samples, {}).parts[0] == doctest::Approx(1.0).epsilon(1e-14));

  spec.alpha = 1.5;
  CHECK_THROWS_AS(weighted_holder_norm(spec, samples, {}), ConfigError);
}

TEST_CASE("norm grows with refinement") {
  std::mt19937 rng(5);
  WeightFunction w = WeightFunction::rho_eps(0.01);
  auto samples = synthetic_samples(rng, 300, w);
  MetricField g = [m = samples[0].metric](const Vec4&) { return m; };
  WeightedNormSpec spec;
  spec.k = 1;
  spec.q = 1;
  spec.delta = -0.5;
  double prev = 0;
  for (int n : {50, 100, 200, 300}) {
    std::vector<FieldSample> sub(samples.begin(), samples.begin() + n);
    WeightedNorm v = weighted_holder_norm(spec, sub, nearby_pairs(sub, g, 0.1));
    CHECK(v.total >= prev);
    prev = v.total;
  }
}

TEST_CASE("conformal rescaling of the weighted norm") {
  std::mt19937 rng(7);
  WeightFunction w = WeightFunction::rho_eps(0.01);
  auto samples = synthetic_samples(rng, 120, w);
  MetricField g = [m = samples[0].metric](const Vec4&) { return m; };
  auto pairs = nearby_pairs(samples, g, 0.2);
  for (double C : {2.0, 4.0, 10.0}) {
    WeightedNormSpec spec;
    spec.k = 1;
    spec.q = 1;
    spec.delta = -0.7;
    spec.alpha = 0.4;
    spec.pair_radius = 1e9;
    // left: metric C^2 g, weight rho; right: metric g, weight rho / C
    WeightedNorm lhs = weighted_holder_norm(spec, rescale_metric(samples, C), rescale_pairs(pairs, C));
    auto shrunk = samples;
    for (auto& s : shrunk) s.weight /= C;
    WeightedNorm rhs = weighted_holder_norm(spec, shrunk, pairs);
    double factor = std::pow(1.0 / C, spec.delta + spec.q - spec.p);
    CHECK(lhs.total == doctest::Approx(factor * rhs.total).epsilon(1e-13));
    CHECK(lhs.seminorm == doctest::Approx(factor * rhs.seminorm).epsilon(1e-13));
    for (int j = 0; j <= spec.k; ++j) CHECK(lhs.parts[j] == doctest::Approx(factor * rhs.parts[j]).epsilon(1e-13));
  }
}

TEST_CASE("chart distance") {
  MetricField flat = [](const Vec4&) { return Mat4::Identity(); };
  Vec4 x(0.1, 0.2, 0, 0), y = x + Vec4(0.3, 0, 0, 0);
  CHECK(chart_distance(flat, x, y) == doctest::Approx(0.3).epsilon(1e-15));
  MetricField scaled = [](const Vec4&) { return Mat4(9.0 * Mat4::Identity()); };
  CHECK(chart_distance(scaled, x, y) == doctest::Approx(0.9).epsilon(1e-15));
  CHECK_THROWS_AS(chart_distance(flat, x, y, 0.2), DomainError);

  MetricField eh = [](const Vec4& p) { return eh_metric(1.0, p); };
  for (double r : {4.0, 8.0}) {
    Vec4 a(r, 0.3, 0.1, 0), b(r + 0.2, 0.1, 0.25, 0.05);
    // dense midpoint polyline
    const int m = 20000;
    double dense = 0;
    Vec4 v = b - a;
    for (int i = 0; i < m; ++i) {
      Vec4 p = a + (i + 0.5) / m * v;
      dense += std::sqrt(v.dot(eh(p) * v)) / m;
    }
    double d = chart_distance(eh, a, b);
    CHECK(d == doctest::Approx(dense).epsilon(1e-8));
    CHECK(std::abs(d - v.norm()) < 20 * v.norm() * std::pow(r, -4));
  }
}

TEST_CASE("weighted product estimate") {
  const double delta = -1, l = 2;
  std::vector<double> ratios;
  for (double eps : {0.02, 0.01, 0.005, 0.0025}) {
    WeightFunction w = WeightFunction::rho_eps(eps);
    const int n = 2000;
    VecX rho(n), one = VecX::Ones(n), f(n);
    for (int i = 0; i < n; ++i) {
      rho(i) = w(0.3 * i / (n - 1));
      f(i) = std::pow(rho(i), delta - l);
    }
    ProductCheck c1 = product_estimate_check(one, one, rho, delta, l, eps);
    CHECK(c1.pass);
    CHECK(c1.ratio == doctest::Approx(std::pow(eps, l - delta)).epsilon(1e-12));
    ProductCheck c2 = product_estimate_check(f, f, rho, delta, l, eps);
    CHECK(c2.pass);
    CHECK(c2.ratio == doctest::Approx(1.0).epsilon(1e-12));
    ratios.push_back(c2.ratio);
  }
  double lo = *std::min_element(ratios.begin(), ratios.end()), hi = *std::max_element(ratios.begin(), ratios.end());
  CHECK(hi / lo < 1.1);
  VecX a = VecX::Ones(3);
  CHECK_THROWS_AS(product_estimate_check(a, a, a, 2.0, 2.0, 0.01), ConfigError);
}

TEST_CASE("sample file round trip") {
  std::mt19937 rng(9);
  auto samples = synthetic_samples(rng, 10, WeightFunction::rho0());
  std::stringstream ss;
  write_field_samples(ss, samples);
  auto back = read_field_samples(ss);
  REQUIRE(back.size() == samples.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].point == samples[i].point);
    CHECK(back[i].metric == samples[i].metric);
    CHECK(back[i].weight == samples[i].weight);
    REQUIRE(back[i].jets.size() == 2);
    CHECK(back[i].jets[1] == samples[i].jets[1]);
  }
  std::stringstream bad("x1,x2\n1,2\n");
  CHECK_THROWS_AS(read_field_samples(bad), ConfigError);
}
