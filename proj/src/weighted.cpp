#include "kummer/weighted.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "kummer/errors.hpp"
#include "kummer/jet.hpp"

namespace kummer {

namespace {

Jet<2> smoothstep(const Jet<2>& t) {
  if (t.value() <= 0) return Jet<2>(0.0);
  if (t.value() >= 1) return Jet<2>(1.0);
  return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

// x + (1 - x) S((x - 1/8) / (3/40)): from the identity to the constant 1.
Jet<2> outer_blend(const Jet<2>& x) { return x + (1.0 - x) * smoothstep((x - 0.125) / 0.075); }

}  // namespace

WeightFunction WeightFunction::rho_eps(double eps) {
  if (!(eps > 0 && eps < 1.0 / 16.0)) throw ConfigError("rho_eps needs 0 < eps < 1/16");
  return {WeightKind::RhoEps, eps};
}

WeightFunction WeightFunction::chart(double eps) {
  if (!(eps > 0 && eps < 1.0)) throw ConfigError("chart weight needs 0 < eps < 1");
  return {WeightKind::Chart, eps};
}

double WeightFunction::eval(double x0, int k) const {
  if (!(x0 >= 0)) throw DomainError("weights are evaluated at nonnegative distances");
  if (k < 0 || k > 2) throw DomainError("weight derivatives are provided up to order 2");
  Jet<2> x = Jet<2>::variable(x0);
  Jet<2> v;
  switch (kind) {
    case WeightKind::RhoTilde0:
      v = x0 <= 1 ? Jet<2>(1.0) : x0 >= 2 ? x : 1.0 + (x - 1.0) * smoothstep(x - 1.0);
      break;
    case WeightKind::Rho0:
      v = x0 <= 0.125 ? x : x0 >= 0.2 ? Jet<2>(1.0) : outer_blend(x);
      break;
    case WeightKind::RhoEps:
      if (x0 <= eps)
        v = Jet<2>(eps);
      else if (x0 <= 2 * eps)
        v = eps + (x - eps) * smoothstep((x - eps) / eps);
      else if (x0 <= 0.125)
        v = x;
      else
        v = x0 >= 0.2 ? Jet<2>(1.0) : outer_blend(x);
      break;
    case WeightKind::Chart:
      if (x0 <= eps)
        v = Jet<2>(eps);
      else if (x0 <= 2 * eps)
        v = eps + (x - eps) * smoothstep((x - eps) / eps);
      else
        v = x;
      break;
  }
  return v.derivative(k);
}

double weight_eval(const WeightFunction& w, double x) { return w(x); }

double tensor_norm(const VecX& coeffs, const Mat4& g, int upper, int lower) {
  const int n = upper + lower;
  long size = 1;
  for (int i = 0; i < n; ++i) size *= 4;
  if (coeffs.size() != size) throw DomainError("tensor coefficient count does not match the valence");
  Eigen::LLT<Mat4> llt(g);
  if (llt.info() != Eigen::Success) throw DefinitenessError("metric is not positive definite");
  Mat4 L = llt.matrixL();
  Mat4 low = L.inverse();  // covector components in an orthonormal frame
  Mat4 up = L.transpose();
  VecX t = coeffs;
  long stride = size;
  for (int s = 0; s < n; ++s) {
    stride /= 4;
    const Mat4& M = s < upper ? up : low;
    VecX u = VecX::Zero(size);
    for (long idx = 0; idx < size; ++idx) {
      long i = (idx / stride) % 4;
      long base = idx - i * stride;
      double v = 0;
      for (int m = 0; m < 4; ++m) v += M(i, m) * t(base + m * stride);
      u(idx) = v;
    }
    t = u;
  }
  return t.norm();
}

WeightedNorm weighted_holder_norm(const WeightedNormSpec& spec, const std::vector<FieldSample>& samples,
                                  const std::vector<SamplePair>& pairs) {
  if (!(spec.alpha > 0 && spec.alpha < 1)) throw ConfigError("Holder exponent must lie in (0, 1)");
  if (spec.k < 0) throw ConfigError("negative derivative order");
  WeightedNorm out;
  out.parts.assign(spec.k + 1, 0.0);
  for (const auto& s : samples) {
    if (static_cast<int>(s.jets.size()) <= spec.k) throw ConfigError("sample lacks derivatives up to order k");
    if (!(s.weight > 0)) throw DomainError("weights must be positive");
    for (int j = 0; j <= spec.k; ++j) {
      double v = std::pow(s.weight, -spec.delta + j) * tensor_norm(s.jets[j], s.metric, spec.p, spec.q + j);
      out.parts[j] = std::max(out.parts[j], v);
    }
  }
  const double cap = std::min(spec.injectivity, spec.pair_radius);
  for (const auto& pr : pairs) {
    if (!(pr.distance > 0) || pr.distance > cap) continue;
    const auto& a = samples.at(pr.a);
    const auto& b = samples.at(pr.b);
    // chart-coefficient comparison in place of parallel transport
    double diff = tensor_norm(a.jets[spec.k] - b.jets[spec.k], a.metric, spec.p, spec.q + spec.k);
    double w = std::pow(std::min(a.weight, b.weight), -spec.delta + spec.k + spec.alpha);
    out.seminorm = std::max(out.seminorm, w * diff / std::pow(pr.distance, spec.alpha));
    out.transport_budget = std::max(out.transport_budget, pr.distance * pr.distance * spec.curvature_bound);
    ++out.pairs_used;
  }
  out.seminorm_missing = out.pairs_used == 0;
  out.total = out.seminorm;
  for (double v : out.parts) out.total += v;
  return out;
}

double chart_distance(const MetricField& g, const Vec4& x, const Vec4& y, double chart_bound) {
  Vec4 v = y - x;
  if (v.norm() > chart_bound) throw DomainError("segment leaves the chart");
  const int n = 16;
  double sum = 0;
  for (int i = 0; i <= n; ++i) {
    double t = double(i) / n;
    double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    sum += w * std::sqrt(std::max(0.0, v.dot(g(x + t * v) * v)));
  }
  return sum / (3.0 * n);
}

std::vector<SamplePair> nearby_pairs(const std::vector<FieldSample>& samples, const MetricField& g, double radius) {
  std::vector<SamplePair> out;
  for (std::size_t a = 0; a < samples.size(); ++a)
    for (std::size_t b = a + 1; b < samples.size(); ++b)
      if ((samples[a].point - samples[b].point).norm() <= radius)
        out.push_back({static_cast<int>(a), static_cast<int>(b), chart_distance(g, samples[a].point, samples[b].point)});
  return out;
}

std::vector<FieldSample> rescale_metric(std::vector<FieldSample> samples, double C) {
  for (auto& s : samples) s.metric *= C * C;
  return samples;
}

std::vector<SamplePair> rescale_pairs(std::vector<SamplePair> pairs, double C) {
  for (auto& p : pairs) p.distance *= C;
  return pairs;
}

ProductCheck product_estimate_check(const VecX& f, const VecX& g, const VecX& rho, double delta, double l,
                                    double eps) {
  if (!(delta < l)) throw ConfigError("product estimate needs delta < l");
  if (f.size() != g.size() || f.size() != rho.size()) throw ConfigError("sample arrays differ in length");
  if (rho.minCoeff() < eps * (1 - 1e-12)) throw DomainError("weight samples below eps");
  const double w = -(delta - l);
  double nf = 0, ng = 0, nfg = 0;
  for (long i = 0; i < f.size(); ++i) {
    double r = std::pow(rho(i), w);
    nf = std::max(nf, r * std::abs(f(i)));
    ng = std::max(ng, r * std::abs(g(i)));
    nfg = std::max(nfg, r * std::abs(f(i) * g(i)));
  }
  double rhs = std::pow(eps, delta - l) * nf * ng;
  double ratio = rhs > 0 ? nfg / rhs : 0.0;
  return {nfg, rhs, ratio, ratio <= 1.0 + 1e-12};
}

void write_field_samples(std::ostream& os, const std::vector<FieldSample>& samples) {
  os << "x1,x2,x3,x4";
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) os << ",g" << i + 1 << j + 1;
  os << ",rho";
  if (!samples.empty())
    for (std::size_t j = 0; j < samples[0].jets.size(); ++j)
      for (long c = 0; c < samples[0].jets[j].size(); ++c) os << ",d" << j << "_" << c;
  os << "\n";
  os.precision(17);
  for (const auto& s : samples) {
    for (int i = 0; i < 4; ++i) os << (i ? "," : "") << s.point(i);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) os << "," << s.metric(i, j);
    os << "," << s.weight;
    for (const auto& jet : s.jets)
      for (long c = 0; c < jet.size(); ++c) os << "," << jet(c);
    os << "\n";
  }
}

std::vector<FieldSample> read_field_samples(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("empty sample file");
  std::vector<int> order;  // derivative order of each jet column
  {
    std::stringstream ss(line);
    std::string col;
    int idx = 0;
    while (std::getline(ss, col, ',')) {
      if (idx >= 21) {
        if (col.size() < 2 || col[0] != 'd') throw ConfigError("unexpected column " + col);
        order.push_back(std::stoi(col.substr(1, col.find('_') - 1)));
      }
      ++idx;
    }
    if (idx < 21) throw ConfigError("sample file lacks point, metric or weight columns");
  }
  int orders = order.empty() ? 0 : *std::max_element(order.begin(), order.end()) + 1;
  std::vector<int> counts(orders, 0);
  for (int o : order) ++counts[o];
  std::vector<FieldSample> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
    if (v.size() != 21 + order.size()) throw ConfigError("ragged sample row");
    FieldSample s;
    for (int i = 0; i < 4; ++i) s.point(i) = v[i];
    for (int i = 0; i < 16; ++i) s.metric(i / 4, i % 4) = v[4 + i];
    s.weight = v[20];
    std::size_t pos = 21;
    for (int j = 0; j < orders; ++j) {
      VecX jet(counts[j]);
      for (int c = 0; c < counts[j]; ++c) jet(c) = v[pos++];
      s.jets.push_back(jet);
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace kummer
