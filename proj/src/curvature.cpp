#include "kummer/curvature.hpp"

#include <Eigen/LU>
#include <cmath>

#include "kummer/errors.hpp"

namespace kummer {

namespace {

inline int idx(int a, int b, int c, int d) { return ((a * 4 + b) * 4 + c) * 4 + d; }

double riemann_norm(const Riemann& R, const Mat4& gi) {
  // |R|^2 = R_abcd R^abcd; raise one index at a time.
  Riemann t = R;
  for (int slot = 0; slot < 4; ++slot) {
    Riemann u{};
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int c = 0; c < 4; ++c)
          for (int d = 0; d < 4; ++d) {
            int i[4] = {a, b, c, d};
            double v = 0;
            for (int e = 0; e < 4; ++e) {
              int j[4] = {a, b, c, d};
              j[slot] = e;
              v += gi(i[slot], e) * t[idx(j[0], j[1], j[2], j[3])];
            }
            u[idx(a, b, c, d)] = v;
          }
    t = u;
  }
  double s = 0;
  for (int k = 0; k < 256; ++k) s += t[k] * R[k];
  return std::sqrt(std::max(0.0, s));
}

Curvature assemble(const Mat4& g, const std::array<Mat4, 4>& dg, const std::array<std::array<Mat4, 4>, 4>& ddg) {
  Curvature out;
  out.g = g;
  Mat4 gi = g.inverse();
  // Gamma_{e,bc} and Gamma^e_{bc}
  double G1[4][4][4], G2[4][4][4];
  for (int e = 0; e < 4; ++e)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c) G1[e][b][c] = 0.5 * (dg[b](e, c) + dg[c](e, b) - dg[e](b, c));
  for (int e = 0; e < 4; ++e)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c) {
        double v = 0;
        for (int f = 0; f < 4; ++f) v += gi(e, f) * G1[f][b][c];
        G2[e][b][c] = v;
      }
  // R_iklm = 1/2 (g_im,kl + g_kl,im - g_il,km - g_km,il)
  //        + g_np (G^n_kl G^p_im - G^n_km G^p_il)
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 4; ++k)
      for (int l = 0; l < 4; ++l)
        for (int m = 0; m < 4; ++m) {
          double v = 0.5 * (ddg[k][l](i, m) + ddg[i][m](k, l) - ddg[k][m](i, l) - ddg[i][l](k, m));
          for (int n = 0; n < 4; ++n) v += G1[n][i][m] * G2[n][k][l] - G1[n][i][l] * G2[n][k][m];
          out.riem[idx(i, k, l, m)] = v;
        }
  for (int k = 0; k < 4; ++k)
    for (int m = 0; m < 4; ++m) {
      double v = 0;
      for (int i = 0; i < 4; ++i)
        for (int l = 0; l < 4; ++l) v += gi(i, l) * out.riem[idx(i, k, l, m)];
      out.ricci(k, m) = v;
    }
  out.riemann_norm = riemann_norm(out.riem, gi);
  Mat4 up = gi * out.ricci * gi;
  out.ricci_norm = std::sqrt(std::max(0.0, (up.cwiseProduct(out.ricci)).sum()));
  return out;
}

Curvature combine(const Curvature& fine, const Curvature& coarse, const Mat4& g) {
  Curvature out;
  out.g = g;
  for (int k = 0; k < 256; ++k) out.riem[k] = (4.0 * fine.riem[k] - coarse.riem[k]) / 3.0;
  out.ricci = (4.0 * fine.ricci - coarse.ricci) / 3.0;
  Mat4 gi = g.inverse();
  out.riemann_norm = riemann_norm(out.riem, gi);
  Mat4 up = gi * out.ricci * gi;
  out.ricci_norm = std::sqrt(std::max(0.0, (up.cwiseProduct(out.ricci)).sum()));
  return out;
}

}  // namespace

Curvature fd_curvature(const MetricField& g, const Vec4& x, double h) {
  Mat4 g0 = g(x);
  std::array<Mat4, 4> gp, gm, dg;
  for (int c = 0; c < 4; ++c) {
    Vec4 e = Vec4::Unit(c) * h;
    gp[c] = g(x + e);
    gm[c] = g(x - e);
    dg[c] = (gp[c] - gm[c]) / (2 * h);
  }
  std::array<std::array<Mat4, 4>, 4> ddg;
  for (int c = 0; c < 4; ++c) {
    ddg[c][c] = (gp[c] - 2 * g0 + gm[c]) / (h * h);
    for (int d = c + 1; d < 4; ++d) {
      Vec4 ec = Vec4::Unit(c) * h, ed = Vec4::Unit(d) * h;
      ddg[c][d] = (g(x + ec + ed) - g(x + ec - ed) - g(x - ec + ed) + g(x - ec - ed)) / (4 * h * h);
      ddg[d][c] = ddg[c][d];
    }
  }
  return assemble(g0, dg, ddg);
}

Curvature richardson_curvature(const MetricField& g, const Vec4& x, double h, double tol, double floor) {
  Curvature c1 = fd_curvature(g, x, h);
  Curvature c2 = fd_curvature(g, x, h / 2);
  Curvature c4 = fd_curvature(g, x, h / 4);
  Curvature coarse = combine(c2, c1, c1.g);
  Curvature fine = combine(c4, c2, c1.g);
  double diff = 0;
  for (int k = 0; k < 256; ++k) diff = std::max(diff, std::abs(fine.riem[k] - coarse.riem[k]));
  double scale = 0;
  for (int k = 0; k < 256; ++k) scale = std::max(scale, std::abs(fine.riem[k]));
  if (diff > tol * std::max(scale, floor))
    throw ConvergenceError("curvature: Richardson cascade did not settle", {diff, scale});
  return fine;
}

}  // namespace kummer
