#pragma once
#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <vector>

#include "kummer/flat_geometry.hpp"
#include "kummer/types.hpp"

namespace kummer {

// Periodic cell-centred grid on R^4 / Z^4: site (i0..i3) sits at (i + 1/2)/n.
// Axis 0 varies slowest. The centring makes x -> -x a permutation of sites.
struct Grid {
  int n = 8;

  explicit Grid(int n);  // ConfigError when n < 8
  std::size_t sites() const;
  double spacing() const { return 1.0 / n; }
  double cell_volume() const;
  Vec4 point(std::size_t site) const;
  std::array<int, 4> index(std::size_t site) const;
  std::size_t site(const std::array<int, 4>& idx) const;  // wraps
  std::size_t shift(std::size_t site, int axis, int step) const;
  std::size_t mirror(std::size_t site) const;
  // Signed wavenumber of DFT index i, in (-n/2, n/2].
  int wavenumber(int i) const;
  bool nyquist(int i) const { return n % 2 == 0 && i == n / 2; }
};

// One row per site, one column per component.
using GridField = MatX;

// Metric coefficients per site; empty means the flat identity.
struct GridMetric {
  std::vector<Mat4> g;

  bool is_flat() const { return g.empty(); }
  Mat4 at(std::size_t site) const { return g.empty() ? Mat4(Mat4::Identity()) : g[site]; }
};

GridField sample_field(const Grid& grid, int comps, const std::function<VecX(const Vec4&)>& f);
GridMetric sample_metric(const Grid& grid, const std::function<Mat4(const Vec4&)>& g);

// Second-order central differences with periodic wraparound.
GridField central_diff(const Grid& grid, const GridField& f, int axis);
// Three-point stencil for i == j, product of central differences otherwise.
GridField second_diff(const Grid& grid, const GridField& f, int i, int j);

// 4-d DFT over sites, one transform per column. Unnormalized forward,
// inverse scaled by 1/sites.
Eigen::MatrixXcd fft4(const Grid& grid, const Eigen::MatrixXcd& f, bool inverse = false);
// Multiplies each Fourier mode by symbol(k) with signed wavenumbers k.
GridField spectral_multiply(const Grid& grid, const GridField& f,
                            const std::function<double(const std::array<int, 4>&)>& symbol);
// Removes modes with a Nyquist wavenumber on any axis (even n only). Central
// differences cannot see these modes, so they carry a spurious kernel.
GridField band_limit(const Grid& grid, const GridField& f);

// d on 1-forms (4 cols -> 6) and on 2-forms (6 cols -> 4, basis 123,124,134,234).
GridField grid_d1(const Grid& grid, const GridField& a);
GridField grid_d2(const Grid& grid, const GridField& eta);
// Codifferentials for the metric field.
GridField grid_codiff1(const Grid& grid, const GridMetric& g, const GridField& a);
GridField grid_codiff2(const Grid& grid, const GridMetric& g, const GridField& eta);
// Pointwise Hodge star of each 6-column block.
GridField grid_star(const GridMetric& g, const GridField& eta);

struct ExteriorOps {
  GridField codiff;   // d*a
  GridField d_plus;   // self-dual part of da
  GridField d_minus;  // anti-self-dual part of da
  GridField dirac;    // (d*a, d+a), 7 columns
};

ExteriorOps grid_exterior_ops(const Grid& grid, const GridMetric& g, const GridField& a);

// (v +- iota^* v)/2 with iota^* v(x) = (-1)^degree v(-x).
GridField z2_project(const Grid& grid, const GridField& f, int degree, Parity kind);

// Flat L2 pairing: sum of componentwise products times the cell volume.
double l2_inner(const Grid& grid, const GridField& u, const GridField& v);
// Same, weighted by sqrt(det g) and contracted with g for degree 0, 1 or 2.
double l2_inner(const Grid& grid, const GridMetric& g, const GridField& u, const GridField& v, int degree);

// 7x4 symbol of the flat Dirac operator at wavenumber k.
Eigen::Matrix<std::complex<double>, 7, 4> dirac_symbol(const Grid& grid, const std::array<int, 4>& k);

struct KernelReport {
  int dimension = 0;
  int modes = 0;               // Fourier modes examined
  int nyquist_excluded = 0;    // modes dropped by band limiting
  int nyquist_kernel = 0;      // kernel dimension those modes would add
  double smallest_nonzero = 0; // smallest singular value counted as nonzero
};

// Kernel of the flat Dirac operator on band-limited 1-forms, counted mode by
// mode. With even = true, restricted to Z2-even 1-forms.
KernelReport dirac_kernel(const Grid& grid, bool even, double tol = 1e-8);

// D*D applied in real space: d(d*a) + d*(d+a), band limited.
GridField dirac_normal(const Grid& grid, const GridField& a);

struct SpectrumCheck {
  double ritz_min = 0;       // smallest Lanczos Ritz value of D*D
  double predicted_min = 0;  // smallest nonzero symbol eigenvalue
  int iterations = 0;
};

// Lanczos on D*D over band-limited 1-forms orthogonal to the constant
// coframe (or over even 1-forms). A missed kernel vector would pull the
// smallest Ritz value towards zero.
SpectrumCheck dirac_spectrum_check(const Grid& grid, bool even, int iterations = 60, unsigned seed = 1);

// Binary: "KMGRID01", u64 n, u64 comps, then n^4 * comps little-endian
// doubles, site-major.
void write_grid_field(std::ostream& out, const Grid& grid, const GridField& f);
std::pair<Grid, GridField> read_grid_field(std::istream& in);

}  // namespace kummer
