#pragma once

#include <cmath>
#include <string>

#include "kglab/errors.hpp"

namespace kglab {

// Periodic discretization of [-L, L) with N nodes and the dual frequency
// lattice xi_k = pi*k/L, k = -N/2 .. N/2-1.  The Nyquist frequency must
// resolve the resonant frequencies +-sqrt(3) and the cubic output band
// 3*sqrt(3) ~ 5.2 with margin, hence the xi_max >= 8 requirement.
struct Grid {
  double half_length = 0.0;  // L
  int n_points = 0;          // N, a power of two, N >= 256

  double dx() const { return 2.0 * half_length / n_points; }
  double dxi() const { return M_PI / half_length; }
  double node(int j) const { return -half_length + j * dx(); }
  // FFT bin -> signed lattice index in {-N/2, ..., N/2-1}.
  int signed_index(int bin) const { return bin < n_points / 2 ? bin : bin - n_points; }
  double freq(int bin) const { return signed_index(bin) * dxi(); }
  double nyquist() const { return M_PI * n_points / (2.0 * half_length); }
  // Node index of x = 0 (exact node since N is even).
  int origin_index() const { return n_points / 2; }

  bool operator==(const Grid&) const = default;
};

inline Grid make_grid(double half_length, int n_points) {
  if (!(half_length > 0.0))
    throw config_error("make_grid: half length must be positive, got " + std::to_string(half_length));
  if (n_points < 2 || (n_points & 1))
    throw config_error("make_grid: N must be even, got " + std::to_string(n_points));
  if ((n_points & (n_points - 1)) != 0)
    throw config_error("make_grid: N must be a power of two, got " + std::to_string(n_points));
  if (n_points < 256)
    throw config_error("make_grid: N must be at least 256, got " + std::to_string(n_points));
  Grid g{half_length, n_points};
  if (g.nyquist() < 8.0)
    throw config_error("make_grid: Nyquist frequency " + std::to_string(g.nyquist()) +
                       " < 8 under-resolves the +-sqrt(3) resonance");
  return g;
}

inline void require_same_grid(const Grid& a, const Grid& b, const char* where) {
  if (!(a == b)) throw config_error(std::string(where) + ": operands live on different grids");
}

}  // namespace kglab
