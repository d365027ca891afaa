#include "kummer/radial.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>

#include "kummer/errors.hpp"
#include "kummer/flat_geometry.hpp"
#include "kummer/gluing.hpp"
#include "kummer/grid.hpp"

namespace kummer {

RadialProfile RadialProfile::flat(double r_min, double r_max) {
  RadialProfile p;
  p.kind = RadialProfileKind::Flat;
  p.r_min = r_min;
  p.r_max = r_max;
  return p;
}

RadialProfile RadialProfile::eguchi_hanson(double s, double r_max) {
  RadialProfile p;
  p.kind = RadialProfileKind::EguchiHanson;
  p.s = s;
  p.r_max = r_max;
  return p;
}

RadialProfile RadialProfile::grafted(double eps) {
  RadialProfile p;
  p.kind = RadialProfileKind::Grafted;
  p.eps = eps;
  p.s = eps * eps;
  p.r_max = 1.0;
  p.outer = OuterCondition::Dirichlet;
  return p;
}

RadialKahler RadialProfile::kahler(double r) const {
  switch (kind) {
    case RadialProfileKind::Flat:
      return {0.5, 0.0};
    case RadialProfileKind::EguchiHanson:
      return eh_radial(s, r * r);
    case RadialProfileKind::Grafted:
      return grafted_radial(eps, r);
  }
  return {0.5, 0.0};
}

double RadialProfile::inner_radius() const {
  if (r_min > 0) return r_min;
  switch (kind) {
    case RadialProfileKind::EguchiHanson:
      return 1e-3 * std::sqrt(s);
    case RadialProfileKind::Grafted:
      return 1e-3 * eps;
    default:
      return 1e-3;
  }
}

WeightFunction RadialProfile::weight() const {
  return kind == RadialProfileKind::Grafted ? WeightFunction::chart(eps) : WeightFunction::rho_tilde0();
}

void RadialProfile::validate() const {
  if (kind == RadialProfileKind::EguchiHanson && !(s > 0)) throw ConfigError("radial profile: EH scale must be positive");
  if (kind == RadialProfileKind::Grafted && !(eps > 0 && eps < 1))
    throw ConfigError("radial profile: gluing scale must lie in (0, 1)");
  if (!(inner_radius() > 0 && r_max > inner_radius())) throw ConfigError("radial profile: need 0 < r_min < r_max");
}

void validate_delta(RadialProblem problem, double delta) {
  double lo = problem == RadialProblem::Scalar ? -2.0 : -1.0;
  if (!(delta > lo && delta < 0))
    throw ConfigError("weight exponent " + std::to_string(delta) + " outside (" + std::to_string(lo) + ", 0)");
}

namespace {

struct Discretization {
  std::vector<double> t, r, w, q_half, r_half;
  double dt = 0;
};

Discretization discretize(const RadialProfile& p, int nodes) {
  if (nodes < 16) throw ConfigError("radial solve needs at least 16 nodes");
  p.validate();
  Discretization d;
  const double t0 = std::log(p.inner_radius()), t1 = std::log(p.r_max);
  d.dt = (t1 - t0) / (nodes - 1);
  d.t.resize(nodes);
  d.r.resize(nodes);
  d.w.resize(nodes);
  for (int i = 0; i < nodes; ++i) {
    d.t[i] = t0 + i * d.dt;
    d.r[i] = std::exp(d.t[i]);
    RadialKahler k = p.kahler(d.r[i]);
    double det_h = k.phi_u * (k.phi_u + d.r[i] * d.r[i] * k.phi_uu);
    d.w[i] = 2 * std::pow(d.r[i], 4) * det_h;
  }
  d.q_half.resize(nodes - 1);
  d.r_half.resize(nodes - 1);
  for (int i = 0; i + 1 < nodes; ++i) {
    d.r_half[i] = std::exp(d.t[i] + 0.5 * d.dt);
    d.q_half[i] = d.r_half[i] * d.r_half[i] * p.kahler(d.r_half[i]).phi_u;
  }
  return d;
}

// Control-volume widths: half cells at both ends.
double cell(const Discretization& d, int i) {
  int n = static_cast<int>(d.t.size());
  return (i == 0 || i == n - 1) ? 0.5 * d.dt : d.dt;
}

// Stiffness row sums: (K f)_i = sum of outgoing fluxes.
std::vector<double> stiffness_apply(const RadialProfile& p, const Discretization& d, const std::vector<double>& f) {
  const int n = static_cast<int>(d.t.size());
  std::vector<double> out(n, 0.0);
  for (int i = 0; i + 1 < n; ++i) {
    double flux = d.q_half[i] * (f[i + 1] - f[i]) / d.dt;
    out[i] -= flux;
    out[i + 1] += flux;
  }
  if (p.outer == OuterCondition::Decay) {
    RadialKahler k = p.kahler(d.r[n - 1]);
    out[n - 1] += 2 * d.r[n - 1] * d.r[n - 1] * k.phi_u * f[n - 1];
  }
  return out;
}

}  // namespace

std::vector<double> radial_nodes(const RadialProfile& p, int nodes) { return discretize(p, nodes).r; }

std::vector<double> radial_apply(const RadialProfile& p, const std::vector<double>& f, int nodes) {
  Discretization d = discretize(p, nodes);
  if (static_cast<int>(f.size()) != nodes) throw ConfigError("radial_apply: value count does not match the nodes");
  std::vector<double> k = stiffness_apply(p, d, f);
  for (int i = 0; i < nodes; ++i) k[i] /= cell(d, i) * d.w[i];
  return k;
}

RadialSolution radial_reduced_solve(const RadialProfile& p, const std::function<double(double)>& rhs, int nodes) {
  Discretization d = discretize(p, nodes);
  const int n = nodes;
  const int m = p.outer == OuterCondition::Dirichlet ? n - 1 : n;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(3 * n);
  for (int i = 0; i + 1 < n; ++i) {
    double c = d.q_half[i] / d.dt;
    if (i < m) trips.emplace_back(i, i, c);
    if (i + 1 < m) {
      trips.emplace_back(i + 1, i + 1, c);
      trips.emplace_back(i, i + 1, -c);
      trips.emplace_back(i + 1, i, -c);
    }
  }
  if (p.outer == OuterCondition::Decay) {
    RadialKahler k = p.kahler(d.r[n - 1]);
    trips.emplace_back(n - 1, n - 1, 2 * d.r[n - 1] * d.r[n - 1] * k.phi_u);
  }
  Eigen::SparseMatrix<double> K(m, m);
  K.setFromTriplets(trips.begin(), trips.end());
  VecX b(m);
  RadialSolution sol;
  sol.r = d.r;
  sol.rhs.resize(n);
  for (int i = 0; i < n; ++i) sol.rhs[i] = rhs(d.r[i]);
  for (int i = 0; i < m; ++i) b(i) = cell(d, i) * d.w[i] * sol.rhs[i];
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(K);
  if (ldlt.info() != Eigen::Success) throw ConvergenceError("radial solve: factorization failed");
  VecX f = ldlt.solve(b);
  sol.f.assign(n, 0.0);
  for (int i = 0; i < m; ++i) sol.f[i] = f(i);
  sol.r_half = d.r_half;
  sol.df.resize(n - 1);
  for (int i = 0; i + 1 < n; ++i) {
    double r = d.r_half[i];
    RadialKahler k = p.kahler(r);
    double psi_u = k.phi_u + r * r * k.phi_uu;
    double f_r = (sol.f[i + 1] - sol.f[i]) / d.dt / r;
    sol.df[i] = std::abs(f_r) / std::sqrt(2 * psi_u);
  }
  return sol;
}

namespace {

double weighted_ratio(const RadialProfile& p, const RadialSolution& s, double delta, RadialProblem problem) {
  WeightFunction rho = p.weight();
  double num = 0, den = 0;
  const double order = problem == RadialProblem::Scalar ? 2.0 : 1.0;
  for (std::size_t i = 0; i < s.r.size(); ++i) den = std::max(den, std::pow(rho(s.r[i]), order - delta) * std::abs(s.rhs[i]));
  if (problem == RadialProblem::Scalar) {
    for (std::size_t i = 0; i < s.r.size(); ++i) num = std::max(num, std::pow(rho(s.r[i]), -delta) * std::abs(s.f[i]));
  } else {
    for (std::size_t i = 0; i < s.r_half.size(); ++i)
      num = std::max(num, std::pow(rho(s.r_half[i]), -delta) * s.df[i]);
  }
  return num / den;
}

double bound_at(const RadialProfile& p, double delta, RadialProblem problem, int nodes) {
  WeightFunction rho = p.weight();
  const double order = problem == RadialProblem::Scalar ? 2.0 : 1.0;
  // The Green's function is positive, so the extremal datum is the
  // positive one saturating the weighted sup; bumps are a cross-check.
  auto extremal = [&](double r) { return std::pow(rho(r), delta - order); };
  double best = weighted_ratio(p, radial_reduced_solve(p, extremal, nodes), delta, problem);
  const double t0 = std::log(p.inner_radius()), t1 = std::log(p.r_max);
  for (int k = 1; k <= 8; ++k) {
    double tc = t0 + (t1 - t0) * k / 9.0;
    auto bump = [&](double r) {
      double z = (std::log(r) - tc) / 0.5;
      return extremal(r) * std::exp(-0.5 * z * z);
    };
    best = std::max(best, weighted_ratio(p, radial_reduced_solve(p, bump, nodes), delta, problem));
  }
  return best;
}

}  // namespace

InverseBound radial_inverse_bound(const RadialProfile& p, double delta, RadialProblem problem, int nodes) {
  validate_delta(problem, delta);
  InverseBound b;
  b.nodes = nodes;
  b.bound = bound_at(p, delta, problem, nodes);
  b.refined = bound_at(p, delta, problem, 2 * nodes);
  if (std::abs(b.refined - b.bound) > 1e-2 * b.refined)
    throw ConvergenceError("radial inverse bound not resolved: " + std::to_string(b.bound) + " vs " +
                               std::to_string(b.refined) + " after refinement",
                           {b.bound, b.refined});
  return b;
}

double grid_inverse_bound(int n, double eps, double delta, RadialProblem problem) {
  validate_delta(problem, delta);
  Grid grid(n);
  const WeightFunction rho = WeightFunction::chart(eps);
  const FlatMetricSpec spec;
  const double order = problem == RadialProblem::Scalar ? 2.0 : 1.0;
  VecX w(grid.sites());
  for (std::size_t s = 0; s < grid.sites(); ++s) w(s) = rho(dist_to_singular_set(grid.point(s), spec));
  GridField rhs = w.array().pow(delta - order).matrix();
  rhs.array() -= rhs.mean();
  const double h = grid.spacing();
  GridField f = spectral_multiply(grid, rhs, [&](const std::array<int, 4>& k) {
    double lam = 0;
    for (int a : k) lam += 4 * std::pow(std::sin(M_PI * a / grid.n) / h, 2);
    return lam > 0 ? 1.0 / lam : 0.0;
  });
  double den = (w.array().pow(order - delta) * rhs.col(0).array().abs()).maxCoeff();
  double num = 0;
  if (problem == RadialProblem::Scalar) {
    num = (w.array().pow(-delta) * f.col(0).array().abs()).maxCoeff();
  } else {
    VecX g2 = VecX::Zero(grid.sites());
    for (int a = 0; a < 4; ++a) g2 += central_diff(grid, f, a).col(0).cwiseAbs2();
    num = (w.array().pow(-delta) * g2.array().sqrt()).maxCoeff();
  }
  return num / den;
}

UniformInverseTable uniform_inverse_sweep(const std::vector<double>& eps, double delta, RadialProblem problem,
                                          int grid_n, int nodes) {
  validate_delta(problem, delta);
  if (eps.empty()) throw ConfigError("uniform_inverse_sweep needs at least one eps");
  UniformInverseTable table;
  double lo = INFINITY, hi = 0, glo = INFINITY, ghi = 0;
  for (double e : eps) {
    UniformInverseRow row;
    row.eps = e;
    InverseBound b = radial_inverse_bound(RadialProfile::grafted(e), delta, problem, nodes);
    row.radial = b.bound;
    row.refined = b.refined;
    if (grid_n > 0) {
      row.grid = grid_inverse_bound(grid_n, e, delta, problem);
      glo = std::min(glo, row.grid);
      ghi = std::max(ghi, row.grid);
    }
    lo = std::min(lo, row.radial);
    hi = std::max(hi, row.radial);
    table.rows.push_back(row);
  }
  table.ratio = hi / lo;
  table.grid_ratio = grid_n > 0 ? ghi / glo : 0.0;
  return table;
}

}  // namespace kummer
