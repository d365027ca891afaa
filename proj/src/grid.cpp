#include "kummer/grid.hpp"

#include <unsupported/Eigen/FFT>

#include <Eigen/LU>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <random>

#include "kummer/errors.hpp"
#include "kummer/parallel.hpp"
#include "kummer/triple.hpp"

namespace kummer {

Grid::Grid(int n_) : n(n_) {
  if (n < 8) throw ConfigError("grid too coarse: need at least 8 points per axis, got " + std::to_string(n));
}

std::size_t Grid::sites() const {
  std::size_t m = static_cast<std::size_t>(n);
  return m * m * m * m;
}

double Grid::cell_volume() const { return std::pow(spacing(), 4); }

std::array<int, 4> Grid::index(std::size_t s) const {
  std::array<int, 4> idx;
  for (int a = 3; a >= 0; --a) {
    idx[a] = static_cast<int>(s % n);
    s /= n;
  }
  return idx;
}

std::size_t Grid::site(const std::array<int, 4>& idx) const {
  std::size_t s = 0;
  for (int a = 0; a < 4; ++a) s = s * n + static_cast<std::size_t>(((idx[a] % n) + n) % n);
  return s;
}

Vec4 Grid::point(std::size_t s) const {
  auto idx = index(s);
  return Vec4((idx[0] + 0.5) / n, (idx[1] + 0.5) / n, (idx[2] + 0.5) / n, (idx[3] + 0.5) / n);
}

std::size_t Grid::shift(std::size_t s, int axis, int step) const {
  auto idx = index(s);
  idx[axis] += step;
  return site(idx);
}

std::size_t Grid::mirror(std::size_t s) const {
  auto idx = index(s);
  for (int& i : idx) i = n - 1 - i;
  return site(idx);
}

int Grid::wavenumber(int i) const { return i <= n / 2 ? i : i - n; }

GridField sample_field(const Grid& grid, int comps, const std::function<VecX(const Vec4&)>& f) {
  GridField out(grid.sites(), comps);
  parallel_for(grid.sites(), [&](std::size_t s) { out.row(s) = f(grid.point(s)).transpose(); });
  return out;
}

GridMetric sample_metric(const Grid& grid, const std::function<Mat4(const Vec4&)>& g) {
  GridMetric m;
  m.g.resize(grid.sites());
  parallel_for(grid.sites(), [&](std::size_t s) { m.g[s] = g(grid.point(s)); });
  return m;
}

GridField central_diff(const Grid& grid, const GridField& f, int axis) {
  GridField out(f.rows(), f.cols());
  const double c = 0.5 / grid.spacing();
  parallel_for(grid.sites(), [&](std::size_t s) {
    out.row(s) = c * (f.row(grid.shift(s, axis, 1)) - f.row(grid.shift(s, axis, -1)));
  });
  return out;
}

GridField second_diff(const Grid& grid, const GridField& f, int i, int j) {
  if (i != j) return central_diff(grid, central_diff(grid, f, i), j);
  GridField out(f.rows(), f.cols());
  const double c = 1.0 / (grid.spacing() * grid.spacing());
  parallel_for(grid.sites(), [&](std::size_t s) {
    out.row(s) = c * (f.row(grid.shift(s, i, 1)) - 2.0 * f.row(s) + f.row(grid.shift(s, i, -1)));
  });
  return out;
}

namespace {

void fft_axis(const Grid& grid, Eigen::MatrixXcd& data, int axis, bool inverse) {
  const int n = grid.n;
  std::size_t stride = 1;
  for (int a = 3; a > axis; --a) stride *= n;
  const std::size_t lines = grid.sites() / n;
  const std::size_t cols = data.cols();
  parallel_for(
      lines * cols,
      [&](std::size_t job) {
        thread_local Eigen::FFT<double> fft;
        thread_local std::vector<std::complex<double>> in, out;
        in.resize(n);
        std::size_t col = job / lines, line = job % lines;
        // base site: line enumerates every index with axis coordinate zero
        std::size_t hi = line / stride, lo = line % stride;
        std::size_t base = hi * stride * n + lo;
        for (int i = 0; i < n; ++i) in[i] = data(base + i * stride, col);
        if (inverse)
          fft.inv(out, in);
        else
          fft.fwd(out, in);
        for (int i = 0; i < n; ++i) data(base + i * stride, col) = out[i];
      },
      64);
}

}  // namespace

Eigen::MatrixXcd fft4(const Grid& grid, const Eigen::MatrixXcd& f, bool inverse) {
  Eigen::MatrixXcd data = f;
  for (int a = 0; a < 4; ++a) fft_axis(grid, data, a, inverse);
  return data;
}

GridField spectral_multiply(const Grid& grid, const GridField& f,
                            const std::function<double(const std::array<int, 4>&)>& symbol) {
  Eigen::MatrixXcd F = fft4(grid, f.cast<std::complex<double>>());
  parallel_for(grid.sites(), [&](std::size_t s) {
    auto idx = grid.index(s);
    std::array<int, 4> k;
    for (int a = 0; a < 4; ++a) k[a] = grid.wavenumber(idx[a]);
    F.row(s) *= symbol(k);
  });
  return fft4(grid, F, true).real();
}

GridField band_limit(const Grid& grid, const GridField& f) {
  if (grid.n % 2 != 0) return f;
  const int half = grid.n / 2;
  return spectral_multiply(grid, f, [half](const std::array<int, 4>& k) {
    for (int a : k)
      if (a == half) return 0.0;
    return 1.0;
  });
}

GridField grid_d1(const Grid& grid, const GridField& a) {
  if (a.cols() != 4) throw ConfigError("grid_d1 expects a 1-form field with 4 columns");
  std::array<GridField, 4> D;
  for (int i = 0; i < 4; ++i) D[i] = central_diff(grid, a, i);
  GridField out(a.rows(), 6);
  for (int p = 0; p < 6; ++p) {
    int i = kPair[p][0], j = kPair[p][1];
    out.col(p) = D[i].col(j) - D[j].col(i);
  }
  return out;
}

GridField grid_d2(const Grid& grid, const GridField& eta) {
  if (eta.cols() != 6) throw ConfigError("grid_d2 expects a 2-form field with 6 columns");
  std::array<GridField, 4> D;
  for (int i = 0; i < 4; ++i) D[i] = central_diff(grid, eta, i);
  auto col = [](int i, int j) {
    for (int p = 0; p < 6; ++p)
      if (kPair[p][0] == i && kPair[p][1] == j) return p;
    return -1;
  };
  static constexpr int kTriple[4][3] = {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}};
  GridField out(eta.rows(), 4);
  for (int t = 0; t < 4; ++t) {
    int i = kTriple[t][0], j = kTriple[t][1], k = kTriple[t][2];
    out.col(t) = D[i].col(col(j, k)) - D[j].col(col(i, k)) + D[k].col(col(i, j));
  }
  return out;
}

GridField grid_codiff1(const Grid& grid, const GridMetric& g, const GridField& a) {
  if (a.cols() != 4) throw ConfigError("grid_codiff1 expects a 1-form field with 4 columns");
  GridField V = a;
  VecX vol = VecX::Ones(grid.sites());
  if (!g.is_flat()) {
    parallel_for(grid.sites(), [&](std::size_t s) {
      Mat4 gi = g.g[s].inverse();
      vol(s) = std::sqrt(g.g[s].determinant());
      V.row(s) = vol(s) * (gi * a.row(s).transpose()).transpose();
    });
  }
  VecX div = VecX::Zero(grid.sites());
  for (int i = 0; i < 4; ++i) div += central_diff(grid, V.col(i), i);
  return GridField(-div.cwiseQuotient(vol));
}

GridField grid_codiff2(const Grid& grid, const GridMetric& g, const GridField& eta) {
  if (eta.cols() != 6) throw ConfigError("grid_codiff2 expects a 2-form field with 6 columns");
  // raised components sqrt(g) eta^{ij}, stored per basis pair
  GridField up = eta;
  VecX vol = VecX::Ones(grid.sites());
  if (!g.is_flat()) {
    parallel_for(grid.sites(), [&](std::size_t s) {
      Mat4 gi = g.g[s].inverse();
      vol(s) = std::sqrt(g.g[s].determinant());
      Mat4 m = gi * form_to_matrix<double>(eta.row(s).transpose()) * gi;
      up.row(s) = vol(s) * matrix_to_form<double>(m).transpose();
    });
  }
  GridField out = GridField::Zero(grid.sites(), 4);
  for (int p = 0; p < 6; ++p) {
    int i = kPair[p][0], j = kPair[p][1];
    // -d_i(eta^{ij}) lands in slot j; eta^{ji} = -eta^{ij}
    out.col(j) -= central_diff(grid, up.col(p), i);
    out.col(i) += central_diff(grid, up.col(p), j);
  }
  if (!g.is_flat()) {
    parallel_for(grid.sites(), [&](std::size_t s) { out.row(s) = (g.g[s] * out.row(s).transpose()).transpose() / vol(s); });
  }
  return out;
}

GridField grid_star(const GridMetric& g, const GridField& eta) {
  if (eta.cols() % 6 != 0) throw ConfigError("grid_star expects blocks of 6 columns");
  GridField out(eta.rows(), eta.cols());
  const Mat6 W = wedge_matrix<double>();
  parallel_for(static_cast<std::size_t>(eta.rows()), [&](std::size_t s) {
    Mat6 star = g.is_flat() ? W : hodge_star(g.g[s]);
    for (int b = 0; b < eta.cols(); b += 6) out.row(s).segment<6>(b) = (star * eta.row(s).segment<6>(b).transpose()).transpose();
  });
  return out;
}

ExteriorOps grid_exterior_ops(const Grid& grid, const GridMetric& g, const GridField& a) {
  ExteriorOps ops;
  ops.codiff = grid_codiff1(grid, g, a);
  GridField da = grid_d1(grid, a);
  GridField sda = grid_star(g, da);
  ops.d_plus = 0.5 * (da + sda);
  ops.d_minus = 0.5 * (da - sda);
  ops.dirac.resize(a.rows(), 7);
  ops.dirac.col(0) = ops.codiff.col(0);
  ops.dirac.rightCols(6) = ops.d_plus;
  return ops;
}

GridField z2_project(const Grid& grid, const GridField& f, int degree, Parity kind) {
  const double sign = ((kind == Parity::Even) ? 1.0 : -1.0) * ((degree % 2 == 0) ? 1.0 : -1.0);
  GridField out(f.rows(), f.cols());
  parallel_for(grid.sites(), [&](std::size_t s) { out.row(s) = 0.5 * (f.row(s) + sign * f.row(grid.mirror(s))); });
  return out;
}

double l2_inner(const Grid& grid, const GridField& u, const GridField& v) {
  return grid.cell_volume() * u.cwiseProduct(v).sum();
}

double l2_inner(const Grid& grid, const GridMetric& g, const GridField& u, const GridField& v, int degree) {
  if (g.is_flat()) return l2_inner(grid, u, v);
  const int block = degree == 0 ? 1 : degree == 1 ? 4 : degree == 2 ? 6 : 0;
  if (block == 0 || u.cols() % block != 0) throw ConfigError("l2_inner: unsupported degree or column count");
  std::vector<double> part(grid.sites());
  parallel_for(grid.sites(), [&](std::size_t s) {
    const Mat4& m = g.g[s];
    Mat4 gi = m.inverse();
    double vol = std::sqrt(m.determinant()), acc = 0;
    for (int b = 0; b < u.cols(); b += block) {
      if (degree == 0) {
        acc += u(s, b) * v(s, b);
      } else if (degree == 1) {
        acc += u.row(s).segment<4>(b) * gi * v.row(s).segment<4>(b).transpose();
      } else {
        Mat4 U = form_to_matrix<double>(u.row(s).segment<6>(b).transpose());
        Mat4 V = form_to_matrix<double>(v.row(s).segment<6>(b).transpose());
        acc += 0.5 * (gi * U * gi * V.transpose()).trace();
      }
    }
    part[s] = vol * acc;
  });
  double sum = 0;
  for (double p : part) sum += p;
  return grid.cell_volume() * sum;
}

Eigen::Matrix<std::complex<double>, 7, 4> dirac_symbol(const Grid& grid, const std::array<int, 4>& k) {
  using C = std::complex<double>;
  const C I(0, 1);
  Vec4 s;
  for (int a = 0; a < 4; ++a) s(a) = std::sin(2 * M_PI * k[a] / grid.n) / grid.spacing();
  Eigen::Matrix<C, 6, 4> d = Eigen::Matrix<C, 6, 4>::Zero();
  for (int p = 0; p < 6; ++p) {
    int i = kPair[p][0], j = kPair[p][1];
    d(p, j) += I * s(i);
    d(p, i) -= I * s(j);
  }
  Eigen::Matrix<C, 7, 4> sigma;
  sigma.row(0) = -I * s.cast<C>().transpose();
  Mat6 plus = 0.5 * (Mat6::Identity() + wedge_matrix<double>());
  sigma.bottomRows(6) = plus.cast<C>() * d;
  return sigma;
}

KernelReport dirac_kernel(const Grid& grid, bool even, double tol) {
  KernelReport rep;
  rep.smallest_nonzero = INFINITY;
  const double cut = tol / grid.spacing();
  auto nullity = [&](const Eigen::MatrixXcd& m, bool track) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
    const auto& sv = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i) {
      if (sv(i) > cut) {
        ++rank;
        if (track) rep.smallest_nonzero = std::min(rep.smallest_nonzero, sv(i));
      }
    }
    return 4 - rank;
  };
  for (std::size_t s = 0; s < grid.sites(); ++s) {
    auto idx = grid.index(s);
    std::array<int, 4> k, mk, midx;
    bool nyq = false;
    for (int a = 0; a < 4; ++a) {
      k[a] = grid.wavenumber(idx[a]);
      mk[a] = -k[a];
      midx[a] = (grid.n - idx[a]) % grid.n;
      nyq = nyq || grid.nyquist(idx[a]);
    }
    std::size_t ms = grid.site(midx);
    int contribution = 0;
    if (!even) {
      contribution = nullity(dirac_symbol(grid, k), !nyq);
    } else {
      // even fields tie mode -k to mode k; count each pair once
      if (ms < s) continue;
      if (ms == s) {
        // self-paired: the constraint reads c = -(-1)^m c with m Nyquist axes
        int m = 0;
        for (int a = 0; a < 4; ++a) m += grid.nyquist(idx[a]) ? 1 : 0;
        contribution = (m % 2 == 1) ? nullity(dirac_symbol(grid, k), !nyq) : 0;
      } else {
        Eigen::MatrixXcd stack(14, 4);
        stack << dirac_symbol(grid, k), dirac_symbol(grid, mk);
        contribution = nullity(stack, !nyq);
      }
    }
    if (nyq) {
      ++rep.nyquist_excluded;
      rep.nyquist_kernel += contribution;
    } else {
      ++rep.modes;
      rep.dimension += contribution;
    }
  }
  return rep;
}

GridField dirac_normal(const Grid& grid, const GridField& a) {
  ExteriorOps ops = grid_exterior_ops(grid, GridMetric{}, a);
  GridField out = grid_codiff2(grid, GridMetric{}, ops.d_plus);
  for (int i = 0; i < 4; ++i) out.col(i) += central_diff(grid, ops.codiff, i);
  return band_limit(grid, out);
}

SpectrumCheck dirac_spectrum_check(const Grid& grid, bool even, int iterations, unsigned seed) {
  auto restrict = [&](GridField v) {
    v = band_limit(grid, v);
    if (even) return z2_project(grid, v, 1, Parity::Even);
    v.rowwise() -= v.colwise().mean();
    return v;
  };
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  GridField v(grid.sites(), 4);
  for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = normal(rng);
  v = restrict(v);
  v /= v.norm();
  std::vector<GridField> basis{v};
  std::vector<double> alpha, beta;
  for (int it = 0; it < iterations; ++it) {
    GridField w = restrict(dirac_normal(grid, basis.back()));
    alpha.push_back((w.array() * basis.back().array()).sum());
    // full reorthogonalization, twice
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) w -= (w.array() * b.array()).sum() * b;
    // cancellation leaves round-off outside the subspace; project it away
    w = restrict(w);
    double nb = w.norm();
    if (nb < 1e-12 || it + 1 == iterations) break;
    beta.push_back(nb);
    basis.push_back(w / nb);
  }
  const int m = static_cast<int>(alpha.size());
  MatX T = MatX::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    T(i, i) = alpha[i];
    if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[i];
  }
  SpectrumCheck rep;
  rep.iterations = m;
  rep.ritz_min = Eigen::SelfAdjointEigenSolver<MatX>(T).eigenvalues().minCoeff();
  rep.predicted_min = INFINITY;
  for (std::size_t s = 0; s < grid.sites(); ++s) {
    auto idx = grid.index(s);
    std::array<int, 4> k;
    bool nyq = false, zero = true;
    for (int a = 0; a < 4; ++a) {
      k[a] = grid.wavenumber(idx[a]);
      nyq = nyq || grid.nyquist(idx[a]);
      zero = zero && k[a] == 0;
    }
    if (nyq || zero) continue;
    auto sig = dirac_symbol(grid, k);
    double lo = Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd>(sig.adjoint() * sig).eigenvalues().minCoeff();
    rep.predicted_min = std::min(rep.predicted_min, lo);
  }
  return rep;
}

namespace {

constexpr char kMagic[8] = {'K', 'M', 'G', 'R', 'I', 'D', '0', '1'};

template <typename T>
void put_le(std::ostream& out, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  out.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  unsigned char b[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(b), sizeof(T))) throw ConfigError("grid file truncated");
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

}  // namespace

void write_grid_field(std::ostream& out, const Grid& grid, const GridField& f) {
  if (static_cast<std::size_t>(f.rows()) != grid.sites()) throw ConfigError("field does not match grid");
  out.write(kMagic, 8);
  put_le<std::uint64_t>(out, grid.n);
  put_le<std::uint64_t>(out, f.cols());
  for (Eigen::Index s = 0; s < f.rows(); ++s)
    for (Eigen::Index c = 0; c < f.cols(); ++c) put_le<double>(out, f(s, c));
}

std::pair<Grid, GridField> read_grid_field(std::istream& in) {
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) throw ConfigError("not a grid field file");
  auto n = get_le<std::uint64_t>(in);
  auto comps = get_le<std::uint64_t>(in);
  if (n > 4096 || comps > 4096) throw ConfigError("grid header out of range");
  Grid grid(static_cast<int>(n));
  GridField f(grid.sites(), comps);
  for (Eigen::Index s = 0; s < f.rows(); ++s)
    for (Eigen::Index c = 0; c < f.cols(); ++c) f(s, c) = get_le<double>(in);
  return {grid, f};
}

}  // namespace kummer
