#pragma once
#include <functional>
#include <vector>

#include "kummer/eguchi_hanson.hpp"
#include "kummer/types.hpp"
#include "kummer/weighted.hpp"

namespace kummer {

// U(2)-invariant reduction of the Laplacian of a radial Kaehler metric,
//   Delta f = -(1 / (2 r^3 det h)) (r^3 phi_u f_r)_r,
// discretized by finite volumes on a uniform grid in t = log r. The inner
// end carries zero flux (regular at the bolt or origin).

enum class RadialProfileKind { Flat, EguchiHanson, Grafted };
enum class RadialProblem { Scalar, HK };
enum class OuterCondition { Decay, Dirichlet };  // Decay: f_t = -2 f

struct RadialProfile {
  RadialProfileKind kind = RadialProfileKind::EguchiHanson;
  double s = 1.0;    // EH scale
  double eps = 0.1;  // gluing scale; the bubble has s = eps^2
  double r_min = 0;  // 0 selects 1e-3 sqrt(s), 1e-3 eps or 1e-3
  double r_max = 8;
  OuterCondition outer = OuterCondition::Decay;

  static RadialProfile flat(double r_min, double r_max);
  static RadialProfile eguchi_hanson(double s, double r_max);
  // Outer radius 1 with f = 0 there.
  static RadialProfile grafted(double eps);

  RadialKahler kahler(double r) const;
  double inner_radius() const;
  WeightFunction weight() const;  // rho_tilde0 for EH (s = 1 scale), chart(eps) otherwise
  void validate() const;          // ConfigError
};

struct RadialSolution {
  std::vector<double> r;    // nodes
  std::vector<double> f;
  std::vector<double> rhs;
  std::vector<double> r_half;  // midpoints in t
  std::vector<double> df;      // |df|_g at midpoints
};

RadialSolution radial_reduced_solve(const RadialProfile& p, const std::function<double(double)>& rhs,
                                    int nodes = 4000);

// Discrete operator on nodal values (interior rows only are meaningful near
// the ends). Used to check the reduction against exact identities.
std::vector<double> radial_apply(const RadialProfile& p, const std::vector<double>& f, int nodes);
std::vector<double> radial_nodes(const RadialProfile& p, int nodes);

// Scalar: delta in (-2, 0). HK: delta in (-1, 0). ConfigError otherwise.
void validate_delta(RadialProblem problem, double delta);

struct InverseBound {
  double bound = 0;    // sup over the tested data of the weighted ratio
  double refined = 0;  // same with twice the nodes
  int nodes = 0;
};

// Scalar: sup rho^-delta |f| / sup rho^(2-delta) |Delta f|.
// HK:     sup rho^-delta |df|_g / sup rho^(1-delta) |Delta f|.
// ConvergenceError when refinement changes the bound by more than 1%.
InverseBound radial_inverse_bound(const RadialProfile& p, double delta, RadialProblem problem = RadialProblem::Scalar,
                                  int nodes = 4000);

// Same ratio for the flat Laplacian on the Z2-even periodic grid of size n
// with the chart weight on the distance to the singular set.
double grid_inverse_bound(int n, double eps, double delta, RadialProblem problem = RadialProblem::Scalar);

struct UniformInverseRow {
  double eps = 0;
  double radial = 0;
  double refined = 0;
  double grid = 0;  // 0 when the grid model is off
};

struct UniformInverseTable {
  std::vector<UniformInverseRow> rows;
  double ratio = 0;       // max / min of the radial bounds
  double grid_ratio = 0;  // same for the grid model
};

UniformInverseTable uniform_inverse_sweep(const std::vector<double>& eps, double delta,
                                          RadialProblem problem = RadialProblem::Scalar, int grid_n = 16,
                                          int nodes = 4000);

}  // namespace kummer
