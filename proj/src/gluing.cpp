#include "kummer/gluing.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Geometry>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "json.hpp"
#include "kummer/curvature.hpp"
#include "kummer/errors.hpp"
#include "kummer/parallel.hpp"
#include "kummer/triple.hpp"

namespace kummer {

CutoffProfile CutoffProfile::quintic() {
  return {CutoffKind::Quintic, {1.0, 15.0 / 8.0, 10.0 / std::sqrt(3.0), 60.0}};
}

CutoffProfile CutoffProfile::septic() {
  // S = 35t^4 - 84t^5 + 70t^6 - 20t^7; extrema of S', S'', S''' in closed form.
  return {CutoffKind::Septic, {1.0, 35.0 / 16.0, 420.0 / (25.0 * std::sqrt(5.0)), 52.5}};
}

double CutoffProfile::eval(double x, int k) const {
  if (k < 0 || k > 3) throw DomainError("cutoff derivatives are provided up to order 3");
  return (*this)(Jet<3>::variable(x)).derivative(k);
}

double cutoff_eval(const CutoffProfile& chi, double sigma, double x, int k) {
  if (!(sigma > 0)) throw DomainError("cutoff scale must be positive");
  return std::pow(sigma, k) * chi.eval(sigma * x, k);
}

namespace {

void check_chart_eps(double eps) {
  if (!(eps > 0 && eps < 1)) throw ConfigError("gluing scale must lie in (0, 1)");
}

double flat_potential(double r, int k) {
  switch (k) {
    case 0: return 0.5 * r * r;
    case 1: return r;
    case 2: return 1.0;
    default: return 0.0;
  }
}

// chi(sigma r) (phi_EH,s - r^2/2) as a jet in r.
template <int N>
Jet<N> cut_difference(double s, double sigma, double r, const CutoffProfile& chi) {
  Jet<N> rj = Jet<N>::variable(r);
  return chi(rj * sigma) * eh_difference_jet<N>(s, rj);
}

}  // namespace

Region chart_region(double eps, double r) {
  double a = std::sqrt(eps);
  if (r <= a) return Region::Inner;
  if (r >= 2 * a) return Region::Outer;
  return Region::Annulus;
}

double preglue_potential(double eps, double r, PregluePotential variant, int k, const CutoffProfile& chi) {
  check_chart_eps(eps);
  if (!(r > 0)) throw DomainError("preglue potential needs r > 0");
  if (k < 0 || k > 4) throw DomainError("preglue potential derivatives are provided up to order 4");
  const bool tilde = variant == PregluePotential::Tilde;
  const double s = tilde ? eps * eps : 1.0;
  const double sigma = tilde ? 1.0 / std::sqrt(eps) : std::sqrt(eps);
  const double inner = 1.0 / sigma;
  if (r <= inner) return eh_potential(s, r, k);
  if (r >= 2 * inner) return flat_potential(r, k);
  return flat_potential(r, k) + cut_difference<4>(s, sigma, r, chi).derivative(k);
}

RadialKahler interpolated_radial(double eps, double r, const CutoffProfile& chi) {
  check_chart_eps(eps);
  if (!(r > 0)) throw DomainError("grafted data at the centre of the chart");
  Jet<2> d = cut_difference<2>(eps * eps, 1.0 / std::sqrt(eps), r, chi);
  double dr = d.derivative(1), drr = d.derivative(2);
  return {0.5 + dr / (2 * r), (drr - dr / r) / (4 * r * r)};
}

RadialKahler grafted_radial(double eps, double r, const CutoffProfile& chi) {
  check_chart_eps(eps);
  if (!(r > 0)) throw DomainError("grafted data at the centre of the chart");
  switch (chart_region(eps, r)) {
    case Region::Inner: return eh_radial(eps * eps, r * r);
    case Region::Outer: return {0.5, 0.0};
    default: return interpolated_radial(eps, r, chi);
  }
}

Form2 grafted_form(double eps, const C2& z, const CutoffProfile& chi) {
  return hermitian_form(radial_hermitian(grafted_radial(eps, z.norm(), chi), z));
}

Mat4 grafted_metric(double eps, const Vec4& y, const CutoffProfile& chi) {
  C2 z = to_complex(y);
  Mat4 g = hermitian_metric(radial_hermitian(grafted_radial(eps, z.norm(), chi), z));
  if (Eigen::LLT<Mat4>(g).info() != Eigen::Success) throw DefinitenessError("grafted metric is not positive definite");
  return g;
}

Mat4 bubble_frame_rotation(const Vec3& e) {
  Mat3 A = rotation_to(e);
  if (A == Mat3::Identity()) return Mat4::Identity();
  Eigen::AngleAxisd aa(A);
  Triple t = flat_triple();
  Mat4 K = Mat4::Zero();
  for (int j = 0; j < 3; ++j) K += aa.axis()(j) * form_to_matrix<double>(t.col(j));
  Triple want = t * A;
  Mat4 best;
  double best_err = std::numeric_limits<double>::infinity();
  for (double sign : {1.0, -1.0}) {
    double th = sign * aa.angle() / 2;
    Mat4 R = std::cos(th) * Mat4::Identity() + std::sin(th) * K;
    Triple pulled;
    for (int j = 0; j < 3; ++j) pulled.col(j) = pullback<double>(t.col(j), R);
    double err = (pulled - want).cwiseAbs().maxCoeff();
    if (err < best_err) best_err = err, best = R;
  }
  if (best_err > 1e-12) throw DomainError("no frame rotation realizes the bubble direction");
  return best;
}

Triple grafted_chart_triple(double eps, const Vec3& e, const Vec4& y, const CutoffProfile& chi) {
  Mat3 A = rotation_to(e);
  Mat4 R = bubble_frame_rotation(e);
  Vec4 ry = R * y;
  Triple t;
  t << grafted_form(eps, to_complex(ry), chi), flat_re_omega(), flat_im_omega();
  if (A == Mat3::Identity()) return t;
  Triple pulled;
  for (int j = 0; j < 3; ++j) pulled.col(j) = pullback<double>(t.col(j), R);
  return pulled * A.transpose();
}

double ricci_potential(double eps, const Vec4& y, const CutoffProfile& chi) {
  double r = y.norm();
  RadialKahler p = grafted_radial(eps, r, chi);
  // 4 det h - 1 with det h = phi_u (phi_u + u phi_uu), kept free of cancellation
  double a = p.phi_u - 0.5, b = r * r * p.phi_uu;
  double q = 4 * a + 2 * b + 4 * a * (a + b);
  if (!(1 + q > 0)) throw DefinitenessError("grafted form has nonpositive volume");
  return -std::log1p(q);
}

double grafted_ricci_check(double eps, const std::vector<Vec4>& samples, const CutoffProfile& chi) {
  MetricField g = [eps, chi](const Vec4& y) { return grafted_metric(eps, y, chi); };
  double worst = 0;
  for (const auto& y : samples) {
    double r = y.norm();
    if (!(r > 0)) throw DomainError("Ricci check at the centre of the chart");
    worst = std::max(worst, richardson_curvature(g, y, 0.01 * r).ricci_norm);
  }
  return worst;
}

double max_config_eps() {
  // 3 sqrt(eps) < 1/2, 2 sqrt(eps) < 3/25, eps < 1
  return std::min({1.0 / 36.0, 0.0036, 1.0});
}

bool PartialSmoothingConfig::resolves(int index) const {
  return std::find(I.begin(), I.end(), index) != I.end();
}

static double min_singular_separation(const FlatMetricSpec& flat) {
  Mat4 C = flat.euclidean_frame();
  double best = std::numeric_limits<double>::infinity();
  for (int c = 0; c < 625; ++c) {
    Vec4 v;
    int code = c;
    for (int i = 0; i < 4; ++i, code /= 5) v(i) = 0.5 * (code % 5 - 2);
    if (v.isZero()) continue;
    best = std::min(best, (C * v).norm());
  }
  return best;
}

void PartialSmoothingConfig::validate() const {
  flat.validate();
  std::set<int> seen;
  double largest = 0;
  for (int i : I) {
    if (i < 1 || i > 16) throw ConfigError("singular index out of range 1..16");
    if (!seen.insert(i).second) throw ConfigError("singular index listed twice");
    auto ei = eps.find(i);
    auto di = e.find(i);
    if (ei == eps.end() || di == e.end()) throw ConfigError("resolved point without scale or direction");
    double s = ei->second;
    if (!(s > 0 && s < max_config_eps()))
      throw ConfigError("gluing scale violates 3 sqrt(eps) < 1/2, 2 sqrt(eps) < 3/25, eps < 1");
    if (std::abs(di->second.norm() - 1.0) > 1e-12) throw ConfigError("bubble direction must be a unit vector");
    largest = std::max(largest, s);
  }
  if (!I.empty() && 4 * std::sqrt(largest) >= min_singular_separation(flat))
    throw ConfigError("gluing regions of neighbouring singular points overlap");
}

std::string PartialSmoothingConfig::to_json() const {
  nlohmann::json j = nlohmann::json::parse(flat.to_json());
  j["I"] = I;
  nlohmann::json je = nlohmann::json::object(), jd = nlohmann::json::object();
  for (auto& [k, v] : eps) je[std::to_string(k)] = v;
  for (auto& [k, v] : e) jd[std::to_string(k)] = {v(0), v(1), v(2)};
  j["eps"] = je;
  j["e"] = jd;
  return j.dump();
}

PartialSmoothingConfig PartialSmoothingConfig::from_json(const std::string& text) {
  PartialSmoothingConfig c;
  try {
    auto j = nlohmann::json::parse(text);
    c.flat = FlatMetricSpec::from_json(text);
    if (j.contains("I")) c.I = j["I"].get<std::vector<int>>();
    if (j.contains("eps"))
      for (auto& [k, v] : j["eps"].items()) c.eps[std::stoi(k)] = v.get<double>();
    if (j.contains("e"))
      for (auto& [k, v] : j["e"].items()) {
        auto a = v.get<std::vector<double>>();
        if (a.size() != 3) throw ConfigError("bubble direction needs three components");
        c.e[std::stoi(k)] = Vec3(a[0], a[1], a[2]);
      }
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(std::string("bad smoothing config: ") + ex.what());
  }
  std::sort(c.I.begin(), c.I.end());
  c.validate();
  return c;
}

GraftedFieldPoint classify(const PartialSmoothingConfig& config, const Vec4& x) {
  GraftedFieldPoint p;
  NearestSingular ns = nearest_singular(x, config.flat);
  p.base = make_orbifold_point(x);
  p.nearest_singular_index = ns.index;
  p.chart = config.flat.euclidean_frame() * ns.offset;
  p.radius = p.chart.norm();
  p.resolved = config.resolves(ns.index);
  if (p.resolved) {
    p.eps = config.eps.at(ns.index);
    p.region = chart_region(p.eps, p.radius);
  }
  return p;
}

Triple grafted_triple(const PartialSmoothingConfig& config, const Vec4& x, const CutoffProfile& chi) {
  GraftedFieldPoint p = classify(config, x);
  Mat4 C = config.flat.euclidean_frame();
  Triple t = (p.resolved && p.region != Region::Outer)
                 ? grafted_chart_triple(p.eps, config.e.at(p.nearest_singular_index), p.chart, chi)
                 : flat_triple();
  Triple out;
  for (int j = 0; j < 3; ++j) out.col(j) = pullback<double>(t.col(j), C);
  return out;
}

Mat4 grafted_torus_metric(const PartialSmoothingConfig& config, const Vec4& x, const CutoffProfile& chi) {
  return triple_to_metric(grafted_triple(config, x, chi));
}

namespace {

// Annulus sample points in Euclidean chart coordinates, away from the seams.
std::vector<Vec4> annulus_samples(double eps, int n, std::mt19937& rng) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(1.05, 1.95);
  std::vector<Vec4> out(n);
  for (auto& y : out) {
    Vec4 d(g(rng), g(rng), g(rng), g(rng));
    y = d.normalized() * u(rng) * std::sqrt(eps);
  }
  return out;
}

}  // namespace

std::vector<StageReport> degeneration_schedule(const std::vector<PartialSmoothingConfig>& stages, int samples,
                                               unsigned seed) {
  if (stages.empty()) throw ConfigError("empty degeneration schedule");
  for (const auto& s : stages) s.validate();
  for (std::size_t j = 1; j < stages.size(); ++j) {
    const auto& prev = stages[j - 1];
    const auto& cur = stages[j];
    if (prev.flat.gram != cur.flat.gram || prev.flat.lattice != cur.flat.lattice)
      throw ConfigError("schedule stages must share the flat data");
    bool subset = std::includes(prev.I.begin(), prev.I.end(), cur.I.begin(), cur.I.end());
    if (!subset || cur.I.size() >= prev.I.size()) throw ConfigError("schedule stages must be strictly nested");
  }

  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vec4> torus(samples);
  for (auto& x : torus) x = Vec4(u(rng), u(rng), u(rng), u(rng));
  const auto& last = stages.back();

  std::vector<StageReport> out(stages.size());
  parallel_for(stages.size(), [&](std::size_t j) {
    const auto& cfg = stages[j];
    StageReport rep{static_cast<int>(j), static_cast<int>(cfg.I.size()), cfg.parameter_count(), {}, 0.0, 0.0};
    std::mt19937 local(seed + 7919u * static_cast<unsigned>(j));
    for (int i : cfg.I) {
      double e = cfg.eps.at(i);
      BubbleReport b{i, e, bubble_volume(e), bubble_diameter(e), bolt_geometry(e * e, 40.0, 1e-9).volume};
      rep.bubbles.push_back(b);
      for (const auto& y : annulus_samples(e, 64, local))
        rep.q_deviation = std::max(rep.q_deviation, su2_deviation(grafted_chart_triple(e, cfg.e.at(i), y)));
    }
    for (const auto& x : torus) {
      GraftedFieldPoint a = classify(cfg, x), b = classify(last, x);
      // skip the bubble cores, where the limit has its orbifold points
      if ((a.resolved && a.radius < a.eps) || (b.resolved && b.radius < b.eps)) continue;
      if (a.radius == 0 || b.radius == 0) continue;
      double d = (grafted_torus_metric(cfg, x) - grafted_torus_metric(last, x)).cwiseAbs().maxCoeff();
      rep.gh_distortion = std::max(rep.gh_distortion, d);
    }
    out[j] = std::move(rep);
  }, 1);
  return out;
}

}  // namespace kummer

namespace kummer {

AnnulusEstimates annulus_estimates(double eps, int radial, int ricci_radial, const CutoffProfile& chi) {
  check_chart_eps(eps);
  static const Vec4 dirs[] = {Vec4(1, 0, 0, 0), Vec4(0.6, 0, 0.8, 0), Vec4(0.5, 0.5, 0.5, 0.5),
                              Vec4(0.3, -0.4, 0.5, std::sqrt(0.5))};
  const double a = std::sqrt(eps);
  AnnulusEstimates out;
  out.eps = eps;
  std::vector<Vec4> ricci_pts;
  for (int j = 0; j < radial; ++j) {
    double r = a * (1.0 + (j + 0.5) / radial);
    for (const auto& d : dirs) {
      Vec4 y = d.normalized() * r;
      out.form_deviation = std::max(out.form_deviation,
                                    (grafted_form(eps, to_complex(y), chi) - flat_omega0()).cwiseAbs().maxCoeff());
      out.ricci_potential = std::max(out.ricci_potential, std::abs(ricci_potential(eps, y, chi)));
      out.q_deviation = std::max(out.q_deviation, su2_deviation(grafted_chart_triple(eps, Vec3::UnitX(), y, chi)));
      double vol = std::sqrt(grafted_metric(eps, y, chi).determinant());
      out.volume_deviation = std::max(out.volume_deviation, std::abs(vol - 1.0));
    }
  }
  for (int j = 0; j < ricci_radial; ++j) {
    double r = a * (1.05 + 0.9 * (j + 0.5) / ricci_radial);
    for (const auto& d : dirs) ricci_pts.push_back(d.normalized() * r);
  }
  std::vector<double> ric(ricci_pts.size());
  parallel_for(ricci_pts.size(), [&](std::size_t i) { ric[i] = grafted_ricci_check(eps, {ricci_pts[i]}, chi); }, 4);
  for (double v : ric) out.ricci = std::max(out.ricci, v);
  return out;
}

}  // namespace kummer
