#include "kummer/perturbation.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "kummer/eguchi_hanson.hpp"
#include "kummer/errors.hpp"
#include "kummer/parallel.hpp"

namespace kummer {

namespace {

double sup_norm(const VecX& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }

}  // namespace

SmallnessReport smallness(const BanachProblem& p) {
  auto norm = p.codomain_norm ? p.codomain_norm : sup_norm;
  SmallnessReport rep;
  rep.phi0_norm = norm(p.phi0);
  rep.r = 2 * p.L * rep.phi0_norm;
  rep.bound = std::min(p.r0, 1.0 / (2 * p.N * p.L));
  rep.ok = rep.r < rep.bound;
  return rep;
}

BanachResult banach_iterate(const BanachProblem& p, double tol, int max_iter, const VecX& x0) {
  auto dnorm = p.domain_norm ? p.domain_norm : sup_norm;
  BanachResult res;
  res.smallness = smallness(p);
  if (!res.smallness.ok) {
    std::ostringstream msg;
    msg << "smallness test failed: 2L|Phi(0)| = " << res.smallness.r << " is not below min(r0, 1/(2NL)) = "
        << res.smallness.bound;
    throw SmallnessError(msg.str(), res.smallness);
  }
  res.predicted_contraction = 4 * p.N * p.L * p.L * res.smallness.phi0_norm;
  const double r = res.smallness.r;
  const double slack = 1e-9 * std::max(r, 1e-300);
  VecX x = x0.size() ? x0 : VecX::Zero(p.phi0.size());
  if (x0.size() && dnorm(x0) > r + slack) throw ConfigError("starting point lies outside the ball of radius 2L|Phi(0)|");
  for (int it = 0; it < max_iter; ++it) {
    VecX next = -p.apply_R(p.phi0 + p.nonlinearity(x));
    double step = dnorm(next - x);
    x = std::move(next);
    res.steps.push_back(step);
    res.iterations = it + 1;
    if (dnorm(x) > r + slack) throw ConvergenceError("iterate left the ball of radius 2L|Phi(0)|", res.steps);
    std::size_t n = res.steps.size();
    // ratios of round-off sized steps carry no information
    if (n >= 2 && res.steps[n - 2] > 1e3 * tol) res.contraction = std::max(res.contraction, step / res.steps[n - 2]);
    if (step < tol) {
      res.x = x;
      return res;
    }
  }
  throw ConvergenceError("fixed point iteration did not converge", res.steps);
}

Mat3 trace_free(const Mat3& m) { return m - (m.trace() / 3.0) * Mat3::Identity(); }

Mat3 matrix_F_lhs(const Mat3& Q, const Mat3& A) {
  return trace_free(Q * A.transpose() + A * Q + A * Q * A.transpose());
}

namespace {

// Orthonormal basis of symmetric trace-free 3x3 matrices.
std::array<Mat3, 5> sym0_basis() {
  std::array<Mat3, 5> E;
  for (auto& e : E) e.setZero();
  E[0].diagonal() << 1, -1, 0;
  E[0] /= std::sqrt(2.0);
  E[1].diagonal() << 1, 1, -2;
  E[1] /= std::sqrt(6.0);
  const int off[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  for (int k = 0; k < 3; ++k) E[2 + k](off[k][0], off[k][1]) = E[2 + k](off[k][1], off[k][0]) = 1 / std::sqrt(2.0);
  return E;
}

Eigen::Matrix<double, 5, 1> sym0_coords(const Mat3& m, const std::array<Mat3, 5>& E) {
  Eigen::Matrix<double, 5, 1> c;
  for (int k = 0; k < 5; ++k) c(k) = (m.array() * E[k].array()).sum();
  return c;
}

}  // namespace

Mat3 matrix_F_solve(const Mat3& Q, const Mat3& S, const MatrixFOptions& opt) {
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1 + Q.norm())) throw DomainError("matrix map: Q is not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat3> es(Q, Eigen::EigenvaluesOnly);
  double dev = (es.eigenvalues().array() - 1.0).abs().maxCoeff();
  if (!(dev < opt.sigma)) throw DomainError("matrix map: |Q - id| = " + std::to_string(dev) + " exceeds the admissible radius");
  if ((S - S.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1 + S.norm()) || std::abs(S.trace()) > 1e-12 * (1 + S.norm()))
    throw DomainError("matrix map: S must be symmetric and trace-free");

  static const std::array<Mat3, 5> E = sym0_basis();
  Mat3 A = Mat3::Zero();
  Mat3 G = matrix_F_lhs(Q, A) - S;
  double res = G.norm();
  for (int it = 0; it < opt.max_iter && res > 1e-15 * (1 + S.norm()); ++it) {
    Eigen::Matrix<double, 5, 5> J;
    for (int k = 0; k < 5; ++k) {
      // derivative of the left side in direction E_k (A symmetric)
      Mat3 d = Q * E[k] + E[k] * Q + E[k] * Q * A + A * Q * E[k];
      J.col(k) = sym0_coords(trace_free(d), E);
    }
    Eigen::Matrix<double, 5, 1> delta = J.partialPivLu().solve(-sym0_coords(G, E));
    Mat3 step = Mat3::Zero();
    for (int k = 0; k < 5; ++k) step += delta(k) * E[k];
    // step halving until the residual drops
    double t = 1.0;
    Mat3 trial;
    double trial_res = INFINITY;
    for (int h = 0; h < 30; ++h, t *= 0.5) {
      trial = A + t * step;
      trial_res = (matrix_F_lhs(Q, trial) - S).norm();
      if (trial_res < res) break;
    }
    if (!(trial_res < res)) break;
    A = trial;
    res = trial_res;
    G = matrix_F_lhs(Q, A) - S;
    if (A.norm() > opt.trust) throw ConvergenceError("matrix map: Newton left the trust region");
  }
  if (!(res <= opt.tol)) throw ConvergenceError("matrix map: Newton stalled at residual " + std::to_string(res));
  return A;
}

// ---------------------------------------------------------------------------

KahlerBackground KahlerBackground::flat(const Grid& grid, const GridField& phi) {
  KahlerBackground bg;
  bg.grid = grid;
  bg.phi = phi;
  return bg;
}

GridMetric KahlerBackground::metric() const {
  if (h.empty()) {
    if ((h0 - Mat2c::Identity() * 0.5).norm() == 0) return GridMetric{};
    GridMetric m;
    m.g.assign(grid.sites(), hermitian_metric(h0));
    return m;
  }
  GridMetric m;
  m.g.resize(grid.sites());
  parallel_for(grid.sites(), [&](std::size_t s) { m.g[s] = hermitian_metric(h[s]); });
  return m;
}

namespace {

Mat2c complex_from_real(double H11, double H22, double H33, double H44, double H13, double H24, double H14,
                        double H23) {
  Mat2c F;
  F(0, 0) = 0.25 * (H11 + H22);
  F(1, 1) = 0.25 * (H33 + H44);
  F(0, 1) = 0.25 * Complex(H13 + H24, H14 - H23);
  F(1, 0) = std::conj(F(0, 1));
  return F;
}

}  // namespace

std::vector<Mat2c> complex_hessian(const Grid& grid, const GridField& f) {
  GridField d11 = second_diff(grid, f, 0, 0), d22 = second_diff(grid, f, 1, 1);
  GridField d33 = second_diff(grid, f, 2, 2), d44 = second_diff(grid, f, 3, 3);
  GridField d13 = second_diff(grid, f, 0, 2), d24 = second_diff(grid, f, 1, 3);
  GridField d14 = second_diff(grid, f, 0, 3), d23 = second_diff(grid, f, 1, 2);
  std::vector<Mat2c> F(grid.sites());
  parallel_for(grid.sites(), [&](std::size_t s) {
    F[s] = complex_from_real(d11(s, 0), d22(s, 0), d33(s, 0), d44(s, 0), d13(s, 0), d24(s, 0), d14(s, 0), d23(s, 0));
  });
  return F;
}

GridField kahler_laplacian(const KahlerBackground& bg, const GridField& f) {
  auto F = complex_hessian(bg.grid, f);
  GridField out(bg.grid.sites(), 1);
  parallel_for(bg.grid.sites(), [&](std::size_t s) { out(s, 0) = -2.0 * (bg.at(s).inverse() * F[s]).trace().real(); });
  return out;
}

GridField ma_residual(const KahlerBackground& bg, const GridField& f) {
  auto F = complex_hessian(bg.grid, f);
  GridField out(bg.grid.sites(), 1);
  std::vector<char> bad(bg.grid.sites(), 0);
  parallel_for(bg.grid.sites(), [&](std::size_t s) {
    Mat2c m = bg.at(s) + F[s];
    double tr = m.trace().real(), det = m.determinant().real();
    if (!(tr > 0 && det > 0)) bad[s] = 1;
    out(s, 0) = det / bg.at(s).determinant().real() - std::exp(bg.phi(s, 0));
  });
  for (std::size_t s = 0; s < bad.size(); ++s) {
    if (bad[s]) {
      Vec4 x = bg.grid.point(s);
      std::ostringstream msg;
      msg << "Monge-Ampere: omega + i ddbar f is not positive at site " << s << " (x = " << x.transpose() << ")";
      throw DefinitenessError(msg.str());
    }
  }
  return out;
}

MADecomposition ma_decomposition(const KahlerBackground& bg, const GridField& f) {
  auto F = complex_hessian(bg.grid, f);
  MADecomposition d;
  const std::size_t n = bg.grid.sites();
  d.f0.resize(n, 1);
  d.laplacian.resize(n, 1);
  d.quadratic.resize(n, 1);
  parallel_for(n, [&](std::size_t s) {
    const Mat2c& h = bg.at(s);
    d.f0(s, 0) = 1.0 - std::exp(bg.phi(s, 0));
    d.laplacian(s, 0) = -2.0 * (h.inverse() * F[s]).trace().real();
    d.quadratic(s, 0) = F[s].determinant().real() / h.determinant().real();
  });
  return d;
}

namespace {

struct DivergenceForm {
  std::array<VecX, 16> M;  // sqrt(g) g^{ij}, per site
  VecX vol;
  Mat4 mean = Mat4::Identity();
  bool flat = true;
};

DivergenceForm divergence_form(const Grid& grid, const GridMetric& g) {
  DivergenceForm d;
  const std::size_t n = grid.sites();
  d.vol = VecX::Ones(n);
  d.flat = g.is_flat();
  if (d.flat) return d;
  for (auto& m : d.M) m.resize(n);
  parallel_for(n, [&](std::size_t s) {
    Mat4 gi = g.g[s].inverse();
    d.vol(s) = std::sqrt(g.g[s].determinant());
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) d.M[4 * i + j](s) = d.vol(s) * gi(i, j);
  });
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) d.mean(i, j) = d.M[4 * i + j].mean();
  return d;
}

// sum_ij (F_i^T M_ij F_j + B_i^T M_ij B_j) / 2
VecX divergence_apply(const Grid& grid, const DivergenceForm& d, const VecX& u) {
  const std::size_t n = grid.sites();
  const double ih = 1.0 / grid.spacing();
  std::array<VecX, 4> fw, bw;
  for (int j = 0; j < 4; ++j) {
    fw[j].resize(n);
    bw[j].resize(n);
    parallel_for(n, [&](std::size_t s) {
      fw[j](s) = (u(grid.shift(s, j, 1)) - u(s)) * ih;
      bw[j](s) = (u(s) - u(grid.shift(s, j, -1))) * ih;
    });
  }
  VecX out = VecX::Zero(n);
  for (int i = 0; i < 4; ++i) {
    VecX vf, vb;
    if (d.flat) {
      vf = fw[i];
      vb = bw[i];
    } else {
      vf = VecX::Zero(n);
      vb = VecX::Zero(n);
      for (int j = 0; j < 4; ++j) {
        vf += d.M[4 * i + j].cwiseProduct(fw[j]);
        vb += d.M[4 * i + j].cwiseProduct(bw[j]);
      }
    }
    parallel_for(n, [&](std::size_t s) {
      double ft = (vf(grid.shift(s, i, -1)) - vf(s)) * ih;
      double bt = (vb(s) - vb(grid.shift(s, i, 1))) * ih;
      out(s) += 0.5 * (ft + bt);
    });
  }
  return out;
}

double divergence_symbol(const Grid& grid, const Mat4& M, const std::array<int, 4>& k) {
  const double h = grid.spacing();
  std::array<Complex, 4> fw, bw;
  for (int a = 0; a < 4; ++a) {
    Complex e = std::polar(1.0, 2 * M_PI * k[a] / grid.n);
    fw[a] = (e - 1.0) / h;
    bw[a] = (1.0 - 1.0 / e) / h;
  }
  double s = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) s += 0.5 * M(i, j) * (std::conj(fw[i]) * fw[j] + std::conj(bw[i]) * bw[j]).real();
  return s;
}

double weighted_mean(const VecX& f, const VecX& vol) { return f.dot(vol) / vol.sum(); }

}  // namespace

GridField apply_laplacian(const Grid& grid, const GridMetric& g, const GridField& f) {
  DivergenceForm d = divergence_form(grid, g);
  return GridField(divergence_apply(grid, d, f.col(0)).cwiseQuotient(d.vol));
}

LinearSolveReport ma_linear_solve(const Grid& grid, const GridMetric& g, const GridField& rhs, double tol,
                                  int max_iter) {
  DivergenceForm d = divergence_form(grid, g);
  VecX b0 = rhs.col(0);
  double mean = weighted_mean(b0, d.vol);
  if (std::abs(mean) > 1e-8 * (1.0 + b0.cwiseAbs().maxCoeff()))
    throw ConfigError("Laplace solve: right-hand side does not have integral zero (mean " + std::to_string(mean) + ")");
  VecX b = (b0.array() - mean).matrix().cwiseProduct(d.vol);
  LinearSolveReport rep;
  const double bnorm = b.norm();
  VecX x = VecX::Zero(grid.sites());
  if (bnorm == 0) {
    rep.f = x;
    return rep;
  }
  auto precondition = [&](const VecX& r) -> VecX {
    return spectral_multiply(grid, r, [&](const std::array<int, 4>& k) {
      if (k[0] == 0 && k[1] == 0 && k[2] == 0 && k[3] == 0) return 0.0;
      return 1.0 / divergence_symbol(grid, d.mean, k);
    });
  };
  VecX r = b, z = precondition(r), p = z;
  double rz = r.dot(z);
  for (int it = 0; it < max_iter; ++it) {
    VecX Ap = divergence_apply(grid, d, p);
    double alpha = rz / p.dot(Ap);
    x += alpha * p;
    r -= alpha * Ap;
    double rel = r.norm() / bnorm;
    rep.history.push_back(rel);
    rep.iterations = it + 1;
    if (rel < tol) {
      x.array() -= weighted_mean(x, d.vol);
      rep.f = x;
      return rep;
    }
    z = precondition(r);
    double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  throw ConvergenceError("Laplace solve: conjugate gradients stagnated", rep.history);
}

// ---------------------------------------------------------------------------

namespace {

constexpr int kHessPairs[10][2] = {{0, 0}, {1, 1}, {2, 2}, {3, 3}, {0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};

double c2_norm(const Grid& grid, const VecX& f) {
  double m = f.lpNorm<Eigen::Infinity>();
  GridField F = f;
  for (const auto& ij : kHessPairs) m = std::max(m, second_diff(grid, F, ij[0], ij[1]).lpNorm<Eigen::Infinity>());
  return m;
}

// Symbol of f -> tr(h^{-1} F(f)) for constant h.
double linearization_symbol(const Grid& grid, const Mat2c& hinv, const std::array<int, 4>& k) {
  const double h = grid.spacing();
  std::array<double, 4> pure, s;
  for (int a = 0; a < 4; ++a) {
    double th = 2 * M_PI * k[a] / grid.n;
    pure[a] = -4 * std::pow(std::sin(th / 2) / h, 2);
    s[a] = std::sin(th) / h;
  }
  Mat2c F = complex_from_real(pure[0], pure[1], pure[2], pure[3], -s[0] * s[2], -s[1] * s[3], -s[0] * s[3], -s[1] * s[2]);
  return (hinv * F).trace().real();
}

}  // namespace

MASolveReport ma_solve(const KahlerBackground& bg, const MASolveOptions& opt) {
  if (!bg.h.empty()) throw ConfigError("ma_solve needs a constant background Hermitian form");
  const Grid& grid = bg.grid;
  if (static_cast<std::size_t>(bg.phi.rows()) != grid.sites()) throw ConfigError("Ricci potential does not match the grid");
  MASolveReport rep;
  if (opt.even) {
    double v = (z2_project(grid, bg.phi, 0, Parity::Odd)).cwiseAbs().maxCoeff();
    if (v > 1e-12 * (1 + bg.phi.cwiseAbs().maxCoeff())) throw ConfigError("Ricci potential is not Z2-even");
  }
  const Mat2c hinv = bg.h0.inverse();
  const double det_h = bg.h0.determinant().real();
  auto inverse_symbol = [&](const std::array<int, 4>& k) {
    if (k[0] == 0 && k[1] == 0 && k[2] == 0 && k[3] == 0) return 0.0;
    return 1.0 / linearization_symbol(grid, hinv, k);
  };

  // Green's kernel of R and the l1 sums of its second differences
  GridField delta = GridField::Zero(grid.sites(), 1);
  delta(0, 0) = 1.0;
  GridField G = spectral_multiply(grid, delta, inverse_symbol);
  double L = G.cwiseAbs().sum();
  for (const auto& ij : kHessPairs) L = std::max(L, second_diff(grid, G, ij[0], ij[1]).cwiseAbs().sum());

  Eigen::SelfAdjointEigenSolver<Mat2c> es(bg.h0, Eigen::EigenvaluesOnly);
  BanachProblem p;
  p.L = L;
  p.N = 0.75 / det_h;
  p.r0 = es.eigenvalues().minCoeff() / (0.5 + 1.0 / std::sqrt(2.0));
  p.phi0 = (1.0 - bg.phi.col(0).array().exp()).matrix();
  p.apply_R = [&](const VecX& u) -> VecX { return spectral_multiply(grid, u, inverse_symbol); };
  p.nonlinearity = [&](const VecX& f) -> VecX {
    auto F = complex_hessian(grid, f);
    VecX out(grid.sites());
    for (std::size_t s = 0; s < grid.sites(); ++s) out(s) = F[s].determinant().real() / det_h;
    return out;
  };
  p.domain_norm = [&](const VecX& f) { return c2_norm(grid, f); };

  BanachResult br = banach_iterate(p, opt.tol, opt.max_iter);
  rep.f = br.x;
  GridField res = ma_residual(bg, rep.f);
  rep.normalization = res.mean();
  rep.residual = (res.array() - rep.normalization).abs().maxCoeff();
  rep.L = p.L;
  rep.N = p.N;
  rep.r0 = p.r0;
  rep.r = br.smallness.r;
  rep.C7 = p.N;
  rep.C8 = br.smallness.phi0_norm;
  rep.C9 = br.smallness.r;
  rep.contraction = br.contraction;
  rep.predicted_contraction = br.predicted_contraction;
  rep.trace = br.steps;
  rep.iterations = br.iterations;
  rep.parity_violation = z2_project(grid, rep.f, 0, Parity::Odd).cwiseAbs().maxCoeff();
  return rep;
}

double manufactured_potential(double a, const Vec4& x) {
  const double t = 2 * M_PI;
  return a * (std::cos(t * x(0)) * std::cos(t * x(2)) + 0.5 * std::sin(t * x(1)) * std::sin(t * x(3)) +
              0.25 * std::cos(t * (x(0) + x(1))));
}

Mat2c manufactured_hessian(double a, const Vec4& x) {
  const double t = 2 * M_PI, t2 = t * t;
  const double c1 = std::cos(t * x(0)), s1 = std::sin(t * x(0)), c2 = std::cos(t * x(1)), s2 = std::sin(t * x(1));
  const double c3 = std::cos(t * x(2)), s3 = std::sin(t * x(2)), c4 = std::cos(t * x(3)), s4 = std::sin(t * x(3));
  const double cc = std::cos(t * (x(0) + x(1)));
  Mat4 H = Mat4::Zero();
  H(0, 0) = -t2 * c1 * c3 - 0.25 * t2 * cc;
  H(2, 2) = -t2 * c1 * c3;
  H(0, 2) = t2 * s1 * s3;
  H(1, 1) = -0.5 * t2 * s2 * s4 - 0.25 * t2 * cc;
  H(3, 3) = -0.5 * t2 * s2 * s4;
  H(1, 3) = 0.5 * t2 * c2 * c4;
  H(0, 1) = -0.25 * t2 * cc;
  H *= a;
  return complex_from_real(H(0, 0), H(1, 1), H(2, 2), H(3, 3), H(0, 2), H(1, 3), H(0, 3), H(1, 2));
}

ManufacturedMA manufactured_ma(const Grid& grid, double amplitude) {
  ManufacturedMA m;
  m.f_star = sample_field(grid, 1, [&](const Vec4& x) { return VecX::Constant(1, manufactured_potential(amplitude, x)); });
  const Mat2c h0 = Mat2c::Identity() * 0.5;
  GridField phi = sample_field(grid, 1, [&](const Vec4& x) {
    Mat2c F = manufactured_hessian(amplitude, x);
    return VecX::Constant(1, std::log((h0 + F).determinant().real() / h0.determinant().real()));
  });
  m.background = KahlerBackground::flat(grid, phi);
  return m;
}

}  // namespace kummer
