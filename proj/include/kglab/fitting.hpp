#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "kglab/errors.hpp"

namespace kglab {

struct linear_fit_result {
  double intercept = 0.0;
  double slope = 0.0;
  double rms_residual = 0.0;
};

// Ordinary least squares y = intercept + slope * x.
inline linear_fit_result linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = x.size();
  if (n != y.size() || n < 2) throw config_error("linear_fit: need at least two paired samples");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double det = n * sxx - sx * sx;
  if (std::abs(det) < 1e-14 * (n * sxx + sx * sx + 1e-300))
    throw config_error("linear_fit: degenerate abscissae");
  linear_fit_result r;
  r.slope = (n * sxy - sx * sy) / det;
  r.intercept = (sy - r.slope * sx) / n;
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double e = y[i] - (r.intercept + r.slope * x[i]);
    acc += e * e;
  }
  r.rms_residual = std::sqrt(acc / n);
  return r;
}

// Fits y ~ C t^p on log-log axes; returns (C, p, rms residual in log space).
struct power_law_fit {
  double amplitude = 0.0;
  double exponent = 0.0;
  double rms_residual = 0.0;
};

inline power_law_fit fit_power_law(const std::vector<double>& t, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  lx.reserve(t.size());
  ly.reserve(t.size());
  for (size_t i = 0; i < t.size(); ++i) {
    if (t[i] > 0.0 && y[i] > 0.0) {
      lx.push_back(std::log(t[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  if (lx.size() < 2) throw config_error("fit_power_law: need at least two positive samples");
  const linear_fit_result r = linear_fit(lx, ly);
  return {std::exp(r.intercept), r.slope, r.rms_residual};
}

}  // namespace kglab
