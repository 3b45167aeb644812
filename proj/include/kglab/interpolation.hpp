#pragma once

#include <cmath>
#include <vector>

#include "kglab/field.hpp"

namespace kglab {

// 4-point Lagrange interpolation of grid samples at an arbitrary position.
// Clamps the stencil at the boundary; O(dx^4) accurate for smooth data.
inline complexd interpolate_cubic(const Field& f, double x) {
  const Grid& g = f.grid;
  const double u = (x + g.half_length) / g.dx();
  int j1 = static_cast<int>(std::floor(u));
  int j0 = j1 - 1;
  if (j0 < 0) j0 = 0;
  if (j0 > g.n_points - 4) j0 = g.n_points - 4;
  const double s = u - j0;
  complexd acc = 0.0;
  for (int m = 0; m < 4; ++m) {
    double w = 1.0;
    for (int l = 0; l < 4; ++l)
      if (l != m) w *= (s - l) / (m - l);
    acc += w * f.values[j0 + m];
  }
  return acc;
}

// Lagrange interpolation through arbitrary nodes (used for the guard-band
// evaluation of quotients whose numerator vanishes at the singularity).
inline complexd lagrange_interpolate(const std::vector<double>& xs, const std::vector<complexd>& ys, double x) {
  complexd acc = 0.0;
  for (size_t m = 0; m < xs.size(); ++m) {
    double w = 1.0;
    for (size_t l = 0; l < xs.size(); ++l)
      if (l != m) w *= (x - xs[l]) / (xs[m] - xs[l]);
    acc += w * ys[m];
  }
  return acc;
}

}  // namespace kglab
