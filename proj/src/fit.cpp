#include "kummer/fit.hpp"

#include <cmath>

#include "kummer/errors.hpp"

namespace kummer {

SlopeFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ConfigError("fit: need matching samples, at least 2");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0) throw ConfigError("fit: abscissae are all equal");
  SlopeFit f;
  f.x = x;
  f.y = y;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double r = y[i] - (f.intercept + f.slope * x[i]);
    ss += r * r;
  }
  f.residual = std::sqrt(ss / n);
  return f;
}

SlopeFit fit_power_law(const std::vector<double>& scale, const std::vector<double>& value) {
  if (scale.size() < 3) throw ConfigError("fit: need at least 3 points");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < scale.size(); ++i) {
    if (!(scale[i] > 0) || !(value[i] > 0)) throw ConfigError("fit: power-law data must be positive");
    lx.push_back(std::log(scale[i]));
    ly.push_back(std::log(value[i]));
  }
  return fit_line(lx, ly);
}

}  // namespace kummer
