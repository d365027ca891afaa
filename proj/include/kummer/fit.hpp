#pragma once
#include <vector>

namespace kummer {

// Least-squares line through (x, y); for power laws feed log-log data.
struct SlopeFit {
  std::vector<double> x, y;
  double slope = 0;
  double intercept = 0;
  double residual = 0;  // root mean square of the fit residuals
};

SlopeFit fit_line(const std::vector<double>& x, const std::vector<double>& y);
// Fits log(value) against log(scale). Requires at least 3 positive points.
SlopeFit fit_power_law(const std::vector<double>& scale, const std::vector<double>& value);

}  // namespace kummer
