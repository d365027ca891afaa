#pragma once
#include <algorithm>
#include <array>
#include <map>
#include <string>
#include <vector>

#include "kummer/eguchi_hanson.hpp"
#include "kummer/flat_geometry.hpp"
#include "kummer/jet.hpp"
#include "kummer/types.hpp"

namespace kummer {

enum class CutoffKind { Quintic, Septic };

// chi = 1 on [0,1], 0 on [2,inf), chi(x) = 1 - S(x - 1) with S a smoothstep.
// Evaluated as S(2 - x), which is the same polynomial and stays inside [0,1].
struct CutoffProfile {
  CutoffKind kind = CutoffKind::Quintic;
  std::array<double, 4> c{};  // sup |chi^(k)|, k = 0..3

  static CutoffProfile quintic();
  static CutoffProfile septic();

  template <int N>
  Jet<N> operator()(const Jet<N>& x) const {
    double x0 = x.value();
    if (x0 <= 1.0) return Jet<N>(1.0);
    if (x0 >= 2.0) return Jet<N>(0.0);
    Jet<N> t = 2.0 - x;
    Jet<N> t2 = t * t;
    Jet<N> s = kind == CutoffKind::Quintic ? t2 * t * (10.0 + t * (-15.0 + 6.0 * t))
                                           : t2 * t2 * (35.0 + t * (-84.0 + t * (70.0 - 20.0 * t)));
    s.c[0] = std::min(1.0, std::max(0.0, s.c[0]));
    return s;
  }

  double eval(double x, int k) const;
};

// Gradient bound of the default cutoff.
inline constexpr double kCutoffC1 = 15.0 / 8.0;

// d^k/dx^k chi(sigma x), k <= 3.
double cutoff_eval(const CutoffProfile& chi, double sigma, double x, int k);

enum class PregluePotential { Hat, Tilde };
enum class Region { Inner, Annulus, Outer };

// Interpolated potentials around a single bubble, k <= 4.
//   tilde: r^2/2 + chi(r / sqrt(eps)) (phi_EH,eps^2 - r^2/2)
//   hat:   r^2/2 + chi(sqrt(eps) r) (phi_EH,1 - r^2/2)
double preglue_potential(double eps, double r, PregluePotential variant, int k,
                         const CutoffProfile& chi = CutoffProfile::quintic());

Region chart_region(double eps, double r);

// u-derivatives of the tilde potential; dispatches to the exact EH or flat
// data off the annulus.
RadialKahler grafted_radial(double eps, double r, const CutoffProfile& chi = CutoffProfile::quintic());
// Same, but always through the interpolation formula (used at seams).
RadialKahler interpolated_radial(double eps, double r, const CutoffProfile& chi = CutoffProfile::quintic());

Form2 grafted_form(double eps, const C2& z, const CutoffProfile& chi = CutoffProfile::quintic());
Mat4 grafted_metric(double eps, const Vec4& y, const CutoffProfile& chi = CutoffProfile::quintic());

// R in SO(4) with R^* w0 = (A^e)^T w0 (component action); R = id for e = e1.
Mat4 bubble_frame_rotation(const Vec3& e);
// A^e (R^* (omega_eps, Re Omega, Im Omega)) in Euclidean chart coordinates.
// Equal to the flat triple outside 2 sqrt(eps).
Triple grafted_chart_triple(double eps, const Vec3& e, const Vec4& y,
                            const CutoffProfile& chi = CutoffProfile::quintic());

// log(Omega ^ conj(Omega) / (2 omega_eps^2)); vanishes off the annulus.
double ricci_potential(double eps, const Vec4& y, const CutoffProfile& chi = CutoffProfile::quintic());

// max |Ric| of the grafted chart metric over the samples.
double grafted_ricci_check(double eps, const std::vector<Vec4>& samples,
                           const CutoffProfile& chi = CutoffProfile::quintic());

struct PartialSmoothingConfig {
  FlatMetricSpec flat;
  std::vector<int> I;           // resolved singular points, 1..16
  std::map<int, double> eps;    // scale per resolved point
  std::map<int, Vec3> e;        // bubble direction per resolved point

  void validate() const;  // throws ConfigError
  int parameter_count() const { return flat_moduli_dim() + 3 * static_cast<int>(I.size()); }
  bool resolves(int index) const;

  std::string to_json() const;
  static PartialSmoothingConfig from_json(const std::string& text);
};

// Upper bound on eps from the stacked smallness conditions.
double max_config_eps();

struct GraftedFieldPoint {
  Region region = Region::Outer;
  OrbifoldPoint base;
  int nearest_singular_index = 0;
  bool resolved = false;
  Vec4 chart = Vec4::Zero();  // Euclidean coordinates centred at the singular point
  double radius = 0;
  double eps = 0;
};

GraftedFieldPoint classify(const PartialSmoothingConfig& config, const Vec4& x);

// Triple and metric on the torus, in lattice coordinates.
Triple grafted_triple(const PartialSmoothingConfig& config, const Vec4& x,
                      const CutoffProfile& chi = CutoffProfile::quintic());
Mat4 grafted_torus_metric(const PartialSmoothingConfig& config, const Vec4& x,
                          const CutoffProfile& chi = CutoffProfile::quintic());

inline double bubble_volume(double eps) { return M_PI * (eps * eps); }
inline double bubble_diameter(double eps) { return eps / 2.0; }

struct BubbleReport {
  int index;
  double eps;
  double volume;             // pi eps^2
  double diameter;           // eps / 2
  double volume_quadrature;  // bolt area by quadrature
};

struct StageReport {
  int stage;
  int resolved;
  int parameter_count;
  std::vector<BubbleReport> bubbles;
  double q_deviation;    // sup |Q - id| over annulus samples
  double gh_distortion;  // sup |g_stage - g_last| over shared samples
};

// Stages must be strictly nested and share the flat data.
std::vector<StageReport> degeneration_schedule(const std::vector<PartialSmoothingConfig>& stages,
                                               int samples = 2000, unsigned seed = 1);

}  // namespace kummer

namespace kummer {

// Sup-norm sizes of the gluing error over the annulus of one bubble.
struct AnnulusEstimates {
  double eps = 0;
  double form_deviation = 0;    // sup |omega_eps - omega_0| (max coefficient)
  double ricci_potential = 0;   // sup |phi_eps|
  double ricci = 0;             // max |Ric|, seams excluded
  double q_deviation = 0;       // sup |Q - id| of the grafted triple
  double volume_deviation = 0;  // sup |dV_eps / dV_0 - 1|
};

AnnulusEstimates annulus_estimates(double eps, int radial = 48, int ricci_radial = 12,
                                   const CutoffProfile& chi = CutoffProfile::quintic());

}  // namespace kummer
