#pragma once
#include <vector>

#include "kummer/grid.hpp"
#include "kummer/types.hpp"

namespace kummer {

// Hyper-Kaehler perturbation of a closed definite triple on the periodic
// grid. Triple fields carry 18 columns (component i in columns 6i..6i+5),
// triples of 1-forms 12 columns (component i in columns 4i..4i+3).

struct HKBackground {
  Grid grid{8};
  GridField omega;  // 18 columns

  static HKBackground flat(const Grid& grid);
  // omega0 + d b with b an odd (sine) triple of 1-forms of the given size,
  // so the background is Z2-even and closed.
  static HKBackground perturbed(const Grid& grid, double amplitude);
  Triple at(std::size_t site) const;
};

struct HKState {
  GridField a;              // 12 columns
  Mat3 Z = Mat3::Zero();    // zeta_i = sum_j Z_ij omega_j
};

GridField triple_field(const Grid& grid, const Triple& t);

// d+a + zeta - F((-Q - M)_0) omega with M_ij = (d-a_i ^ d-a_j) / (2 mu),
// self-dual for the metric of omega. Site failures name the site.
GridField hk_residual(const HKBackground& bg, const HKState& x);

// Pointwise -F((-Q_t)_0) t, the residual of the unperturbed triple.
Triple hk_initial_residual(const Triple& t);

struct HKLinearReport {
  GridField a;
  Mat3 Z = Mat3::Zero();
  double residual = 0;       // sup |d+a + zeta - P+ rhs| / sup |P+ rhs|
  double gauge = 0;          // sup |d*a|
  double orthogonality = 0;  // max_ij |<d+a_i, omega0_j>|
  double dropped = 0;        // sup of the removed Nyquist part of rhs
  int iterations = 0;
};

// Solves d+a + zeta = P+ rhs on the flat grid with d*a = 0 and zeta a
// constant combination of the flat triple. Nyquist modes are dropped.
HKLinearReport hk_linear_solve(const Grid& grid, const GridField& rhs, bool even = true, double tol = 1e-12,
                               int max_iter = 200);

struct HKSolveOptions {
  double tol = 1e-12;
  int max_iter = 60;
  bool even = true;
  double r0 = 0.05;
  int lipschitz_samples = 4;
  unsigned seed = 11;
};

struct HKSolveReport {
  HKState state;
  double L = 0;    // bound on the right inverse
  double C18 = 0;  // nonlinearity constant
  double C19 = 0;  // |Phi(0)|
  double C20 = 0;  // ball radius 2 L |Phi(0)|
  double r0 = 0;
  double norm = 0;  // domain norm of the solution
  double contraction = 0, predicted_contraction = 0;
  double final_residual = 0;   // sup |Phi(a, zeta)|
  double su2_deviation = 0;    // of omega + da + zeta
  double gauge = 0;
  std::vector<double> trace;
  int iterations = 0;
};

// Chord iteration with the flat right inverse; constants are measured.
HKSolveReport hk_solve(const HKBackground& bg, const HKSolveOptions& opt = {});

// max(sup |a|, sup |da|, max |Z_ij|)
double hk_domain_norm(const Grid& grid, const HKState& x);

}  // namespace kummer
