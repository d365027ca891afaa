#pragma once
#include <iosfwd>
#include <string>
#include <vector>

#include "kummer/curvature.hpp"
#include "kummer/types.hpp"

namespace kummer {

enum class WeightKind { RhoTilde0, Rho0, RhoEps, Chart };

// Distance-like weights as functions of the flat distance x to the
// exceptional set (or singular set):
//   rho_tilde0: 1 on x <= 1, x on x >= 2
//   rho0:       x on x <= 1/8, 1 on x >= 1/5
//   rho_eps:    eps on x <= eps, x on [2 eps, 1/8], 1 on x >= 1/5
//   chart:      eps on x <= eps, x on x >= 2 eps (single-chart problems)
// Interpolation zones use the quintic smoothstep S.
struct WeightFunction {
  WeightKind kind = WeightKind::RhoEps;
  double eps = 0.0;

  static WeightFunction rho_tilde0() { return {WeightKind::RhoTilde0, 0.0}; }
  static WeightFunction rho0() { return {WeightKind::Rho0, 0.0}; }
  static WeightFunction rho_eps(double eps);
  static WeightFunction chart(double eps);  // 0 < eps < 1

  double operator()(double x) const { return eval(x, 0); }
  // k-th derivative in x, k <= 2.
  double eval(double x, int k) const;
};

double weight_eval(const WeightFunction& w, double x);

// One sample of a (p, q)-tensor field: jets[j] holds the chart coefficients
// of nabla^j s, flattened with the p upper indices first, then q + j lower
// ones, last index fastest.
struct FieldSample {
  Vec4 point = Vec4::Zero();
  Mat4 metric = Mat4::Identity();
  std::vector<VecX> jets;
  double weight = 1.0;
};

struct SamplePair {
  int a;
  int b;
  double distance;  // metric distance between the two samples
};

struct WeightedNormSpec {
  int k = 0;
  double alpha = 0.5;
  double delta = 0.0;
  int p = 0;  // upper indices
  int q = 0;  // lower indices
  double pair_radius = 0.1;     // cap on pair distance
  double injectivity = 1e300;   // injectivity-radius proxy
  double curvature_bound = 0.0; // |Rm| bound for the transport error budget
};

struct WeightedNorm {
  std::vector<double> parts;  // sup rho^{-delta+j} |nabla^j s|, j <= k
  double seminorm = 0;
  int pairs_used = 0;
  bool seminorm_missing = false;  // no admissible pair at order k
  double transport_budget = 0;    // max d^2 |Rm| over pairs used
  double total = 0;
};

// |T|_g via the Cholesky frame of g.
double tensor_norm(const VecX& coeffs, const Mat4& g, int upper, int lower);

WeightedNorm weighted_holder_norm(const WeightedNormSpec& spec, const std::vector<FieldSample>& samples,
                                  const std::vector<SamplePair>& pairs);

// Metric length of the straight chart segment, Simpson rule on 16 intervals.
double chart_distance(const MetricField& g, const Vec4& x, const Vec4& y, double chart_bound = 1e300);

// All pairs closer than radius in the flat chart metric, with chart distances.
std::vector<SamplePair> nearby_pairs(const std::vector<FieldSample>& samples, const MetricField& g,
                                     double radius);

// Samples for the conformally rescaled metric C^2 g (weights unchanged).
std::vector<FieldSample> rescale_metric(std::vector<FieldSample> samples, double C);
std::vector<SamplePair> rescale_pairs(std::vector<SamplePair> pairs, double C);

struct ProductCheck {
  double lhs;    // |f g|_{C0, delta - l}
  double rhs;    // eps^{delta - l} |f| |g|
  double ratio;  // measured constant lhs / rhs
  bool pass;     // ratio <= 1, the constant from rho >= eps
};

// Products of scalar fields sampled with weight values rho >= eps.
ProductCheck product_estimate_check(const VecX& f, const VecX& g, const VecX& rho, double delta, double l,
                                    double eps);

// Columnar text IO for scalar or tensor samples (CSV with header).
void write_field_samples(std::ostream& os, const std::vector<FieldSample>& samples);
std::vector<FieldSample> read_field_samples(std::istream& is);

}  // namespace kummer
