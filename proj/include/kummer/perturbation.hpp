#pragma once
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kummer/grid.hpp"
#include "kummer/types.hpp"

namespace kummer {

// ---------------------------------------------------------------------------
// Fixed point engine for Phi(x) = Phi(0) + D x + N(x) with a right inverse R
// of D: iterates A(x) = -R(Phi(0) + N(x)).

struct BanachProblem {
  VecX phi0;
  std::function<VecX(const VecX&)> apply_R;
  std::function<VecX(const VecX&)> nonlinearity;  // N(0) = 0
  double L = 1;   // bound on |R|
  double N = 1;   // |N(x) - N(y)| <= N |x - y| (|x| + |y|)
  double r0 = 1;  // radius where the bounds hold
  std::function<double(const VecX&)> domain_norm;    // sup norm when empty
  std::function<double(const VecX&)> codomain_norm;  // sup norm when empty
};

struct SmallnessReport {
  double phi0_norm = 0;
  double r = 0;      // 2 L |Phi(0)|
  double bound = 0;  // min(r0, 1 / (2 N L))
  bool ok = false;
};

SmallnessReport smallness(const BanachProblem& p);

struct SmallnessError : std::runtime_error {
  SmallnessReport report;
  SmallnessError(const std::string& what, SmallnessReport r) : std::runtime_error(what), report(r) {}
};

struct BanachResult {
  VecX x;
  std::vector<double> steps;  // |x_{n+1} - x_n|
  double contraction = 0;     // largest observed step ratio
  double predicted_contraction = 0;  // 4 N L^2 |Phi(0)|
  SmallnessReport smallness;
  int iterations = 0;
};

// Refuses with SmallnessError when the smallness test fails. Throws
// ConvergenceError when an iterate leaves the ball of radius r or max_iter
// is reached. x0, when given, must lie in that ball.
BanachResult banach_iterate(const BanachProblem& p, double tol, int max_iter, const VecX& x0 = VecX());

// ---------------------------------------------------------------------------
// The matrix map: A symmetric trace-free with (Q A^T + A Q + A Q A^T)_0 = S.

Mat3 trace_free(const Mat3& m);
Mat3 matrix_F_lhs(const Mat3& Q, const Mat3& A);

struct MatrixFOptions {
  double sigma = 0.1;   // admissible |Q - id|
  double trust = 0.5;   // Newton iterates must stay in |A| < trust
  double tol = 1e-12;   // required residual
  int max_iter = 50;
};

Mat3 matrix_F_solve(const Mat3& Q, const Mat3& S, const MatrixFOptions& opt = {});

// ---------------------------------------------------------------------------
// Complex Monge-Ampere on the periodic grid, complex coordinates
// z1 = x1 + i x2, z2 = x3 + i x4.

struct KahlerBackground {
  Grid grid{8};
  Mat2c h0 = Mat2c::Identity() * 0.5;  // used when h is empty
  std::vector<Mat2c> h;                // per site
  GridField phi;                       // Ricci potential, one column

  static KahlerBackground flat(const Grid& grid, const GridField& phi);
  const Mat2c& at(std::size_t site) const { return h.empty() ? h0 : h[site]; }
  GridMetric metric() const;
};

// F_{jk} = d_{z_j} d_{zbar_k} f from second differences.
std::vector<Mat2c> complex_hessian(const Grid& grid, const GridField& f);
// Delta f = -2 tr(h^{-1} F), nonnegative spectrum.
GridField kahler_laplacian(const KahlerBackground& bg, const GridField& f);

// det(h + F) / det h - e^phi. DefinitenessError names the first bad site.
GridField ma_residual(const KahlerBackground& bg, const GridField& f);

// residual = f0 - laplacian / 2 + quadratic, with quadratic = det F / det h.
struct MADecomposition {
  GridField f0;
  GridField laplacian;
  GridField quadratic;
};
MADecomposition ma_decomposition(const KahlerBackground& bg, const GridField& f);

// Divergence-form Laplacian (1/sqrt g) sum A_ij, each term averaged over
// forward and backward differences so the operator is symmetric.
GridField apply_laplacian(const Grid& grid, const GridMetric& g, const GridField& f);

struct LinearSolveReport {
  GridField f;
  int iterations = 0;
  std::vector<double> history;  // relative residual per CG step
};

// Delta_g f = rhs on integral-zero functions: preconditioned CG with the
// Fourier inverse of the mean-coefficient operator.
LinearSolveReport ma_linear_solve(const Grid& grid, const GridMetric& g, const GridField& rhs, double tol = 1e-10,
                                  int max_iter = 500);

struct MASolveOptions {
  double tol = 1e-13;
  int max_iter = 200;
  bool even = true;  // require Z2-even data
};

struct MASolveReport {
  GridField f;
  double normalization = 0;  // mean of the final residual
  double residual = 0;       // sup |residual - normalization|
  double L = 0, N = 0, r0 = 0, r = 0;
  double C7 = 0;  // nonlinearity constant
  double C8 = 0;  // |Phi(0)|
  double C9 = 0;  // ball radius 2 L |Phi(0)|
  double contraction = 0, predicted_contraction = 0;
  double parity_violation = 0;
  std::vector<double> trace;
  int iterations = 0;
};

// Fixed-point solve of the Monge-Ampere equation on a constant background.
MASolveReport ma_solve(const KahlerBackground& bg, const MASolveOptions& opt = {});

// Smooth Z2-even potential with its exact complex Hessian; phi is chosen so
// that f_star solves the equation on the flat background.
struct ManufacturedMA {
  KahlerBackground background;
  GridField f_star;
};
double manufactured_potential(double amplitude, const Vec4& x);
Mat2c manufactured_hessian(double amplitude, const Vec4& x);
ManufacturedMA manufactured_ma(const Grid& grid, double amplitude);

}  // namespace kummer
