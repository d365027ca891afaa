#include "kummer/eguchi_hanson.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "kummer/curvature.hpp"
#include "kummer/errors.hpp"
#include "kummer/flat_geometry.hpp"

namespace kummer {

namespace {

void check_radius(double s, double r, int k) {
  if (!(r > 0)) throw DomainError("Eguchi-Hanson potential: r must be positive");
  if (!(s >= 0)) throw DomainError("Eguchi-Hanson potential: s must be nonnegative");
  if (k < 0 || k > 4) throw DomainError("Eguchi-Hanson potential: derivative order must be in 0..4");
}

double flat_potential(double r, int k) {
  switch (k) {
    case 0: return 0.5 * r * r;
    case 1: return r;
    case 2: return 1.0;
    default: return 0.0;
  }
}

}  // namespace

double eh_potential_difference(double s, double r, int k) {
  check_radius(s, r, k);
  return eh_difference_jet<4>(s, Jet<4>::variable(r)).derivative(k);
}

double eh_potential(double s, double r, int k) {
  check_radius(s, r, k);
  if (k == 0) {
    if (s == 0.0) return 0.5 * r * r;
    double r2 = r * r;
    double W = std::sqrt(s * s + r2 * r2);
    return 0.5 * (s * std::log(r2) + W - s * std::log(s + W));
  }
  return flat_potential(r, k) + eh_potential_difference(s, r, k);
}

RadialKahler eh_radial(double s, double u) {
  if (!(u > 0)) throw DomainError("Eguchi-Hanson: z = 0 is not in the chart");
  double W = std::hypot(s, u);
  // phi_u = W/(2u), phi_uu = -s^2/(2u^2 W)
  return {0.5 + s * s / (2.0 * u * (W + u)), -s * s / (2.0 * u * u * W)};
}

RadialKahler radial_from_r(double r, double phi_r, double phi_rr) {
  return {phi_r / (2.0 * r), (phi_rr - phi_r / r) / (4.0 * r * r)};
}

Vec4 to_real(const C2& z) { return Vec4(z(0).real(), z(0).imag(), z(1).real(), z(1).imag()); }
C2 to_complex(const Vec4& x) { return C2(Complex(x(0), x(1)), Complex(x(2), x(3))); }

Mat2c radial_hermitian(const RadialKahler& p, const C2& z) {
  Mat2c h;
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < 2; ++k) h(j, k) = (j == k ? p.phi_u : 0.0) + p.phi_uu * std::conj(z(j)) * z(k);
  return h;
}

Mat4 hermitian_metric(const Mat2c& h) {
  Mat4 g;
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < 2; ++k) {
      double a = h(j, k).real(), b = h(j, k).imag();
      g(2 * j, 2 * k) = 2 * a;
      g(2 * j, 2 * k + 1) = 2 * b;
      g(2 * j + 1, 2 * k) = -2 * b;
      g(2 * j + 1, 2 * k + 1) = 2 * a;
    }
  return g;
}

Form2 hermitian_form(const Mat2c& h) {
  // omega(X, Y) = g(JX, Y)
  Mat4 w = flat_complex_structure().transpose() * hermitian_metric(h);
  return matrix_to_form<double>(w);
}

Form2 eh_kahler_form(double s, const C2& z) {
  return hermitian_form(radial_hermitian(eh_radial(s, z.squaredNorm()), z));
}

Mat4 eh_metric(double s, const C2& z) {
  Mat4 g = hermitian_metric(radial_hermitian(eh_radial(s, z.squaredNorm()), z));
  Eigen::SelfAdjointEigenSolver<Mat4> es(g, Eigen::EigenvaluesOnly);
  if (!(es.eigenvalues().minCoeff() > 0)) throw DefinitenessError("Eguchi-Hanson metric is not positive definite");
  return g;
}

Mat4 eh_metric(double s, const Vec4& x) { return eh_metric(s, to_complex(x)); }

Triple eh_triple(double s, const C2& z) {
  Triple t;
  t << eh_kahler_form(s, z), flat_re_omega(), flat_im_omega();
  return t;
}

C2 BlowupChartPoint::lift() const {
  Complex z1 = std::sqrt(u);
  return C2(z1, z1 * v);
}

BlowupChartPoint BlowupChartPoint::from_z(const C2& z) {
  if (std::abs(z(0)) == 0.0) throw DomainError("blow-up chart: z1 = 0 lies outside this chart");
  return {z(0) * z(0), z(1) / z(0)};
}

double eh_blowup_potential(double s, const BlowupChartPoint& p) {
  // phi_EH(|z|) - (s/2) log|u|; the removed term is pluriharmonic away from u = 0.
  double q = 1.0 + std::norm(p.v);
  double U = std::abs(p.u) * q;
  double W = std::hypot(s, U);
  return 0.5 * s * std::log(q) + 0.5 * (W - s * std::log(s + W));
}

double eh_bolt_area_density(double s, Complex v) {
  // omega|_bolt = i phi_{v vbar} dv ^ dvbar = (1/2) Lap_v phi dx ^ dy
  auto f = [&](Complex w) { return eh_blowup_potential(s, {Complex(0.0), w}); };
  auto lap = [&](double h) {
    return (f(v + h) + f(v - h) + f(v + Complex(0, h)) + f(v - Complex(0, h)) - 4.0 * f(v)) / (h * h);
  };
  double h = 0.01 * std::max(1.0, std::abs(v));
  double l = (4.0 * lap(h / 2) - lap(h)) / 3.0;
  return 0.5 * l;
}

namespace {

struct Simpson {
  std::function<double(double)> f;
  double tol;
  int max_depth;
  int worst_depth = 0;
  double error = 0;

  double run(double a, double b, double fa, double fm, double fb, double whole, int depth) {
    double m = 0.5 * (a + b);
    double lm = f(0.5 * (a + m)), rm = f(0.5 * (m + b));
    double left = (m - a) / 6 * (fa + 4 * lm + fm), right = (b - m) / 6 * (fm + 4 * rm + fb);
    double delta = left + right - whole;
    worst_depth = std::max(worst_depth, depth);
    if (depth >= max_depth) {
      error += std::abs(delta);
      if (std::abs(delta) > 15 * tol) throw ConvergenceError("bolt quadrature did not converge", {left + right});
      return left + right + delta / 15;
    }
    if (std::abs(delta) <= 15 * tol) {
      error += std::abs(delta) / 15;
      return left + right + delta / 15;
    }
    return run(a, m, fa, lm, fm, left, depth + 1) + run(m, b, fm, rm, fb, right, depth + 1);
  }
};

}  // namespace

BoltGeometry bolt_geometry(double s, double V, double rel_tol) {
  if (!(s > 0)) throw DomainError("bolt geometry: s must be positive");
  constexpr int M = 16;
  auto ring = [&](double rho) {
    double acc = 0;
    for (int m = 0; m < M; ++m) acc += eh_bolt_area_density(s, std::polar(rho, 2 * M_PI * m / M));
    return rho * acc * (2 * M_PI / M);
  };
  // Split at rho = 1 so both pieces are well resolved.
  double total = 0, err = 0;
  const double edges[] = {0.0, 1.0, 4.0, V};
  for (int i = 0; i < 3; ++i) {
    double a = edges[i], b = edges[i + 1];
    Simpson q{ring, rel_tol * s * M_PI, 40};
    double fa = ring(a), fb = ring(b), fm = ring(0.5 * (a + b));
    total += q.run(a, b, fa, fm, fb, (b - a) / 6 * (fa + 4 * fm + fb), 0);
    err += q.error;
  }

  // Meridians from v = 0 to v = infinity, parametrized by v = tan(t) e^{i theta}.
  const double gl[3] = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
  const double gw[3] = {5.0 / 9, 8.0 / 9, 5.0 / 9};
  double shortest = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 8; ++k) {
    double theta = 2 * M_PI * k / 8;
    const int n = 400;
    double len = 0, dt = 0.5 * M_PI / n;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < 3; ++j) {
        double t = (i + 0.5 + 0.5 * gl[j]) * dt;
        double x = std::tan(t);
        double sec2 = 1.0 + x * x;
        len += 0.5 * dt * gw[j] * std::sqrt(eh_bolt_area_density(s, std::polar(x, theta))) * sec2;
      }
    shortest = std::min(shortest, len);
  }

  BoltGeometry b;
  b.volume = total;
  b.volume_error = err;
  b.tail_fraction = 1.0 / (1.0 + V * V);
  b.diameter = 0.5 * std::sqrt(s);
  b.geodesic_diameter = shortest;
  b.radius_estimate = shortest / M_PI;
  b.self_intersection = -2;
  return b;
}

DecayFit eh_decay_profile(double s, int k, double r_min, double r_max, int samples, double max_residual) {
  if (k < 0 || k > 2) throw DomainError("decay profile: k must be 0, 1 or 2");
  if (s > 0 && r_min < 4.0 * std::pow(s, 0.25)) throw DomainError("decay profile: range starts inside the core");
  DecayFit out;
  std::vector<double> rs, vs;
  for (int i = 0; i < samples; ++i) {
    double r = r_min * std::pow(r_max / r_min, double(i) / (samples - 1));
    rs.push_back(r);
    vs.push_back(std::abs(eh_potential_difference(s, r, k)));
  }
  if (*std::max_element(vs.begin(), vs.end()) == 0.0) {
    out.zero_signal = true;
    return out;
  }
  out.fit = fit_power_law(rs, vs);
  if (out.fit.residual > max_residual) throw ConvergenceError("decay profile: fit residual above threshold", {out.fit.residual});
  out.exponent = out.fit.slope;
  for (std::size_t i = 0; i < rs.size(); ++i) out.c0 = std::max(out.c0, vs[i] * std::pow(rs[i], 2.0 + k));
  return out;
}

DecayFit eh_metric_decay(double s, double r_min, double r_max, int samples) {
  const C2 dirs[] = {C2(1, 0), C2(0, 1), C2(1, 1) / std::sqrt(2.0), C2(Complex(0.6, 0), Complex(0, 0.8)),
                     C2(Complex(0.3, 0.4), Complex(-0.5, std::sqrt(0.5)))};
  DecayFit out;
  std::vector<double> rs, vs;
  for (int i = 0; i < samples; ++i) {
    double r = r_min * std::pow(r_max / r_min, double(i) / (samples - 1));
    double worst = 0;
    for (const auto& d : dirs) worst = std::max(worst, (eh_metric(s, C2(d * r)) - Mat4::Identity()).cwiseAbs().maxCoeff());
    rs.push_back(r);
    vs.push_back(worst);
  }
  if (*std::max_element(vs.begin(), vs.end()) == 0.0) {
    out.zero_signal = true;
    return out;
  }
  out.fit = fit_power_law(rs, vs);
  out.exponent = out.fit.slope;
  for (std::size_t i = 0; i < rs.size(); ++i) out.c0 = std::max(out.c0, vs[i] * std::pow(rs[i], 4.0));
  return out;
}

RicciCheck eh_ricci_check(double s, const std::vector<Vec4>& points) {
  RicciCheck out;
  MetricField g = [s](const Vec4& x) { return eh_metric(s, x); };
  for (const auto& x : points) {
    double r = x.norm();
    if (!(r > 0)) throw DomainError("Ricci check: point at the origin of the chart");
    Curvature c = richardson_curvature(g, x, 0.02 * r);
    out.max_abs = std::max(out.max_abs, c.ricci_norm);
    out.max_riemann = std::max(out.max_riemann, c.riemann_norm);
    if (c.riemann_norm > 0) out.max_relative = std::max(out.max_relative, c.ricci_norm / c.riemann_norm);
  }
  return out;
}

}  // namespace kummer
