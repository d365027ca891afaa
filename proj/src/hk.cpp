#include "kummer/hk.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <cmath>
#include <exception>
#include <random>
#include <sstream>

#include "kummer/errors.hpp"
#include "kummer/flat_geometry.hpp"
#include "kummer/parallel.hpp"
#include "kummer/perturbation.hpp"
#include "kummer/triple.hpp"

namespace kummer {

namespace {

constexpr double kTau = 2 * M_PI;

double field_sup(const GridField& f) { return f.size() ? f.cwiseAbs().maxCoeff() : 0.0; }

GridField d_of_triple(const Grid& grid, const GridField& a) {
  GridField out(a.rows(), 18);
  for (int i = 0; i < 3; ++i) out.middleCols(6 * i, 6) = grid_d1(grid, a.middleCols(4 * i, 4));
  return out;
}

// Flat self-dual projection of each 6-column block.
GridField flat_sd(const GridField& eta) {
  const Mat6 W = wedge_matrix<double>();
  GridField out(eta.rows(), eta.cols());
  for (int b = 0; b < eta.cols(); b += 6) out.middleCols(b, 6) = 0.5 * (eta.middleCols(b, 6) + eta.middleCols(b, 6) * W.transpose());
  return out;
}

template <typename Ex>
[[noreturn]] void rethrow_at(const Ex& e, std::size_t site, const Vec4& x) {
  std::ostringstream msg;
  msg << e.what() << " (site " << site << ", x = " << x.transpose() << ")";
  throw Ex(msg.str());
}

}  // namespace

HKBackground HKBackground::flat(const Grid& grid) {
  HKBackground bg;
  bg.grid = grid;
  bg.omega = triple_field(grid, flat_triple());
  return bg;
}

HKBackground HKBackground::perturbed(const Grid& grid, double amplitude) {
  HKBackground bg = flat(grid);
  GridField b = sample_field(grid, 12, [&](const Vec4& x) {
    VecX v(12);
    for (int i = 0; i < 3; ++i)
      for (int c = 0; c < 4; ++c)
        v(4 * i + c) = amplitude * std::sin(kTau * x((c + 1) % 4)) * std::cos(kTau * x((c + i + 2) % 4)) / (1 + i + c);
    return v;
  });
  bg.omega += d_of_triple(grid, b);
  return bg;
}

Triple HKBackground::at(std::size_t site) const {
  Triple t;
  for (int i = 0; i < 3; ++i) t.col(i) = omega.row(site).segment<6>(6 * i).transpose();
  return t;
}

GridField triple_field(const Grid& grid, const Triple& t) {
  GridField out(grid.sites(), 18);
  for (int i = 0; i < 3; ++i) out.middleCols(6 * i, 6).rowwise() = t.col(i).transpose();
  return out;
}

Triple hk_initial_residual(const Triple& t) {
  Mat3 Q = associated_volume(t).Q;
  Mat3 A = matrix_F_solve(Q, trace_free(-Q));
  return -t * A.transpose();
}

GridField hk_residual(const HKBackground& bg, const HKState& x) {
  const Grid& grid = bg.grid;
  const std::size_t n = grid.sites();
  GridField da = x.a.size() ? d_of_triple(grid, x.a) : GridField::Zero(n, 18);
  GridField out(n, 18);
  std::vector<std::exception_ptr> errors(n);
  parallel_for(n, [&](std::size_t s) {
    try {
      Triple t = bg.at(s);
      Mat6 star = hodge_star(triple_to_metric(t));
      AssociatedVolume av = associated_volume(t);
      Triple dp, dm;
      for (int i = 0; i < 3; ++i) {
        Form2 e = da.row(s).segment<6>(6 * i).transpose();
        Form2 se = star * e;
        dp.col(i) = 0.5 * (e + se);
        dm.col(i) = 0.5 * (e - se);
      }
      Mat3 M = (0.5 / av.mu) * dm.transpose() * wedge_matrix<double>() * dm;
      Mat3 A = matrix_F_solve(av.Q, trace_free(-av.Q - M));
      Triple phi = dp + t * x.Z.transpose() - t * A.transpose();
      for (int i = 0; i < 3; ++i) out.row(s).segment<6>(6 * i) = phi.col(i).transpose();
    } catch (...) {
      errors[s] = std::current_exception();
    }
  });
  for (std::size_t s = 0; s < n; ++s) {
    if (!errors[s]) continue;
    try {
      std::rethrow_exception(errors[s]);
    } catch (const DomainError& e) {
      rethrow_at(e, s, grid.point(s));
    } catch (const DefinitenessError& e) {
      rethrow_at(e, s, grid.point(s));
    } catch (const ConvergenceError& e) {
      rethrow_at(e, s, grid.point(s));
    }
  }
  return out;
}

HKLinearReport hk_linear_solve(const Grid& grid, const GridField& rhs, bool even, double tol, int max_iter) {
  if (rhs.cols() != 18 || static_cast<std::size_t>(rhs.rows()) != grid.sites())
    throw ConfigError("hk_linear_solve expects an 18-column triple field on the grid");
  HKLinearReport rep;
  GridField src = even ? z2_project(grid, rhs, 2, Parity::Even) : rhs;
  GridField bl = band_limit(grid, src);
  rep.dropped = field_sup(src - bl);

  // harmonic part: L2 projection onto the constant flat triple
  const Triple t0 = flat_triple();
  const Mat3 gram = t0.transpose() * t0;
  GridField zeta(grid.sites(), 18);
  for (int i = 0; i < 3; ++i) {
    Form2 mean = bl.middleCols(6 * i, 6).colwise().mean().transpose();
    rep.Z.row(i) = gram.ldlt().solve(t0.transpose() * mean).transpose();
    zeta.middleCols(6 * i, 6).rowwise() = (t0 * rep.Z.row(i).transpose()).transpose();
  }
  GridField target = flat_sd(bl);
  GridField rho = target - zeta;

  auto restrict = [&](GridField v) {
    v = band_limit(grid, v);
    if (even) return z2_project(grid, v, 1, Parity::Even);
    v.rowwise() -= v.colwise().mean();
    return v;
  };
  // exact inverse of the flat symbol (|s|^2 I + s s^T) / 2
  auto precondition = [&](const GridField& r) -> GridField {
    Eigen::MatrixXcd X = fft4(grid, r.cast<Complex>());
    const double h = grid.spacing();
    for (std::size_t q = 0; q < grid.sites(); ++q) {
      auto idx = grid.index(q);
      Vec4 s;
      bool drop = false;
      for (int a = 0; a < 4; ++a) {
        drop = drop || grid.nyquist(idx[a]);
        s(a) = std::sin(kTau * grid.wavenumber(idx[a]) / grid.n) / h;
      }
      double s2 = s.squaredNorm();
      if (drop || s2 < 1e-300) {
        X.row(q).setZero();
        continue;
      }
      Mat4 P = (2.0 / s2) * (Mat4::Identity() - s * s.transpose() / (2 * s2));
      X.row(q) = (P.cast<Complex>() * X.row(q).transpose()).transpose();
    }
    return fft4(grid, X, true).real();
  };

  rep.a = GridField::Zero(grid.sites(), 12);
  const GridMetric flat_g;
  for (int i = 0; i < 3; ++i) {
    GridField b = restrict(grid_codiff2(grid, flat_g, rho.middleCols(6 * i, 6)));
    double bnorm = b.norm();
    if (bnorm == 0) continue;
    GridField x = GridField::Zero(grid.sites(), 4);
    GridField r = b, z = restrict(precondition(r)), p = z;
    double rz = (r.array() * z.array()).sum();
    std::vector<double> history;
    bool done = false;
    for (int it = 0; it < max_iter; ++it) {
      GridField Ap = restrict(dirac_normal(grid, p));
      double alpha = rz / (p.array() * Ap.array()).sum();
      x += alpha * p;
      r -= alpha * Ap;
      history.push_back(r.norm() / bnorm);
      rep.iterations = std::max(rep.iterations, it + 1);
      if (history.back() < tol) {
        done = true;
        break;
      }
      z = restrict(precondition(r));
      double rz_new = (r.array() * z.array()).sum();
      p = z + (rz_new / rz) * p;
      rz = rz_new;
    }
    if (!done) throw ConvergenceError("hk_linear_solve: conjugate gradients stagnated", history);
    rep.a.middleCols(4 * i, 4) = x;
  }

  GridField dplus = flat_sd(d_of_triple(grid, rep.a));
  rep.residual = field_sup(dplus + zeta - target) / std::max(field_sup(target), 1e-300);
  for (int i = 0; i < 3; ++i) {
    rep.gauge = std::max(rep.gauge, field_sup(grid_codiff1(grid, flat_g, rep.a.middleCols(4 * i, 4))));
    for (int j = 0; j < 3; ++j) {
      GridField w(grid.sites(), 6);
      w.rowwise() = t0.col(j).transpose();
      rep.orthogonality = std::max(rep.orthogonality, std::abs(l2_inner(grid, dplus.middleCols(6 * i, 6), w)));
    }
  }
  return rep;
}

double hk_domain_norm(const Grid& grid, const HKState& x) {
  double m = x.Z.cwiseAbs().maxCoeff();
  if (x.a.size()) m = std::max({m, field_sup(x.a), field_sup(d_of_triple(grid, x.a))});
  return m;
}

namespace {

VecX pack(const HKState& x) {
  VecX v(x.a.size() + 9);
  v.head(x.a.size()) = Eigen::Map<const VecX>(x.a.data(), x.a.size());
  for (int i = 0; i < 9; ++i) v(x.a.size() + i) = x.Z(i / 3, i % 3);
  return v;
}

HKState unpack(const Grid& grid, const VecX& v) {
  HKState x;
  const Eigen::Index m = static_cast<Eigen::Index>(grid.sites()) * 12;
  x.a = Eigen::Map<const MatX>(v.data(), grid.sites(), 12);
  for (int i = 0; i < 9; ++i) x.Z(i / 3, i % 3) = v(m + i);
  return x;
}

VecX flatten(const GridField& f) { return Eigen::Map<const VecX>(f.data(), f.size()); }

GridField unflatten(const Grid& grid, const VecX& v) { return Eigen::Map<const MatX>(v.data(), grid.sites(), 18); }

// The flat linearization (a, Z) -> d+a + Z omega0.
GridField flat_linearization(const Grid& grid, const HKState& x) {
  return flat_sd(d_of_triple(grid, x.a)) + triple_field(grid, flat_triple() * x.Z.transpose());
}

}  // namespace

HKSolveReport hk_solve(const HKBackground& bg, const HKSolveOptions& opt) {
  const Grid& grid = bg.grid;
  HKSolveReport rep;
  HKState zero;
  zero.a = GridField::Zero(grid.sites(), 12);
  const GridField phi0 = hk_residual(bg, zero);

  auto apply_R = [&](const VecX& y, bool even) {
    HKLinearReport lr = hk_linear_solve(grid, unflatten(grid, y), even);
    HKState x;
    x.a = lr.a;
    x.Z = lr.Z;
    return pack(x);
  };
  auto nonlinearity = [&](const VecX& v) -> VecX {
    HKState x = unpack(grid, v);
    return flatten(hk_residual(bg, x) - phi0 - flat_linearization(grid, x));
  };
  auto dnorm = [&](const VecX& v) { return hk_domain_norm(grid, unpack(grid, v)); };

  // Sup-to-domain bound of R from its response to point sources: R is
  // translation invariant apart from the constant part.
  double L = 0;
  {
    std::vector<double> rows(12 + 18 + 9, 0.0);
    for (int c = 0; c < 18; ++c) {
      GridField delta = GridField::Zero(grid.sites(), 18);
      delta(0, c) = 1.0;
      HKState k = unpack(grid, apply_R(flatten(delta), false));
      GridField dk = d_of_triple(grid, k.a);
      for (int o = 0; o < 12; ++o) rows[o] += k.a.col(o).cwiseAbs().sum();
      for (int o = 0; o < 18; ++o) rows[12 + o] += dk.col(o).cwiseAbs().sum();
      for (int o = 0; o < 9; ++o) rows[30 + o] += std::abs(k.Z(o / 3, o % 3)) * grid.sites();
    }
    for (double r : rows) L = std::max(L, r);
  }

  BanachProblem p;
  p.phi0 = flatten(phi0);
  p.apply_R = [&](const VecX& y) { return apply_R(y, opt.even); };
  p.nonlinearity = nonlinearity;
  p.domain_norm = dnorm;
  p.L = L;
  p.r0 = opt.r0;
  const double phi0_norm = field_sup(phi0);
  const double radius = std::max(2 * L * phi0_norm, 1e-300);

  // Lipschitz constant of the nonlinearity sampled on the ball of radius 2L|Phi(0)|
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal;
  auto random_point = [&](double scale) {
    VecX y(grid.sites() * 18);
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = normal(rng);
    VecX x = apply_R(y, opt.even);
    return VecX(x * (scale / std::max(dnorm(x), 1e-300)));
  };
  double N = 0;
  for (int k = 0; k < opt.lipschitz_samples; ++k) {
    VecX x = random_point(radius), y = random_point(0.5 * radius);
    double ratio = field_sup(unflatten(grid, nonlinearity(x) - nonlinearity(y))) / (dnorm(x - y) * (dnorm(x) + dnorm(y)));
    N = std::max(N, ratio);
  }
  p.N = N;

  BanachResult br = banach_iterate(p, opt.tol, opt.max_iter);
  rep.state = unpack(grid, br.x);
  rep.L = L;
  rep.C18 = N;
  rep.C19 = phi0_norm;
  rep.C20 = br.smallness.r;
  rep.r0 = opt.r0;
  rep.norm = dnorm(br.x);
  rep.contraction = br.contraction;
  rep.predicted_contraction = br.predicted_contraction;
  rep.trace = br.steps;
  rep.iterations = br.iterations;
  rep.final_residual = field_sup(hk_residual(bg, rep.state));

  GridField da = d_of_triple(grid, rep.state.a);
  double dev = 0;
  for (std::size_t s = 0; s < grid.sites(); ++s) {
    Triple t = bg.at(s);
    Triple next = t + t * rep.state.Z.transpose();
    for (int i = 0; i < 3; ++i) next.col(i) += da.row(s).segment<6>(6 * i).transpose();
    dev = std::max(dev, su2_deviation(next));
  }
  rep.su2_deviation = dev;
  for (int i = 0; i < 3; ++i)
    rep.gauge = std::max(rep.gauge, field_sup(grid_codiff1(grid, GridMetric{}, rep.state.a.middleCols(4 * i, 4))));
  return rep;
}

}  // namespace kummer
