#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "bornopp/core.hpp"

namespace bornopp {

struct SlopeFit {
  double slope = std::numeric_limits<double>::quiet_NaN();
  double intercept = std::numeric_limits<double>::quiet_NaN();
  double residual = std::numeric_limits<double>::quiet_NaN();  // RMS of log residuals
  bool dropped_largest = false;  // largest epsilon excluded as preasymptotic
  bool reported = false;         // residual within threshold
  std::size_t points = 0;
};

// Least squares of log(err) against log(eps). Non-positive or non-finite
// errors are skipped.
inline SlopeFit least_squares_slope(const std::vector<double>& eps, const std::vector<double>& err) {
  SlopeFit f;
  std::vector<double> x, y;
  for (std::size_t i = 0; i < eps.size() && i < err.size(); ++i)
    if (eps[i] > 0 && err[i] > 0 && std::isfinite(err[i])) {
      x.push_back(std::log(eps[i]));
      y.push_back(std::log(err[i]));
    }
  f.points = x.size();
  if (x.size() < 2) return f;
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) return f;
  f.slope = (n * sxy - sx * sy) / den;
  f.intercept = (sy - f.slope * sx) / n;
  double ss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss += r * r;
  }
  f.residual = std::sqrt(ss / n);
  return f;
}

// Fit with the preasymptotic rule: when the residual exceeds the threshold
// and at least three points remain, the largest epsilon is dropped once and
// flagged. The slope is reported only if the final residual is acceptable.
inline SlopeFit fit_slope(std::vector<double> eps, std::vector<double> err, double threshold = 0.15) {
  SlopeFit f = least_squares_slope(eps, err);
  if (f.points >= 4 && !(f.residual <= threshold)) {
    auto it = std::max_element(eps.begin(), eps.end());
    const auto k = static_cast<std::size_t>(it - eps.begin());
    eps.erase(eps.begin() + static_cast<long>(k));
    err.erase(err.begin() + static_cast<long>(k));
    f = least_squares_slope(eps, err);
    f.dropped_largest = true;
  }
  f.reported = f.points >= 2 && f.residual <= threshold;
  return f;
}

}  // namespace bornopp
