#pragma once
#include <array>
#include <functional>

#include "kummer/types.hpp"

namespace kummer {

using MetricField = std::function<Mat4(const Vec4&)>;

// Fully covariant Riemann tensor R_{abcd}, flattened as ((a*4+b)*4+c)*4+d.
using Riemann = std::array<double, 256>;

struct Curvature {
  Mat4 g;
  Riemann riem{};
  Mat4 ricci = Mat4::Zero();
  double riemann_norm = 0;  // |Rm|_g
  double ricci_norm = 0;    // |Ric|_g
};

// Curvature from central differences of g at step h (second order).
Curvature fd_curvature(const MetricField& g, const Vec4& x, double h);

// Richardson combination of steps h and h/2, repeated at h/2 and h/4 as a
// convergence check. Throws ConvergenceError when the two estimates of Rm
// disagree by more than tol relative to max(|Rm|, floor).
Curvature richardson_curvature(const MetricField& g, const Vec4& x, double h, double tol = 1e-4,
                               double floor = 1e-12);

}  // namespace kummer
