#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "kglab/fft.hpp"
#include "kglab/grid.hpp"

namespace kglab {

using complexd = std::complex<double>;

// Complex samples f(x_j) on a grid.
struct Field {
  Grid grid;
  std::vector<complexd> values;
};

// Fourier coefficients in the continuous normalization
//   fhat(xi_k) = (dx / sqrt(2 pi)) sum_j exp(-i x_j xi_k) f(x_j),
// stored in FFT bin order (k = 0..N/2-1, -N/2..-1).
struct Spectrum {
  Grid grid;
  std::vector<complexd> coeffs;
};

inline Field make_field(const Grid& g) { return Field{g, std::vector<complexd>(g.n_points)}; }
inline Spectrum make_spectrum(const Grid& g) { return Spectrum{g, std::vector<complexd>(g.n_points)}; }

template <typename F>
Field sample_field(const Grid& g, F&& f) {
  Field out = make_field(g);
  for (int j = 0; j < g.n_points; ++j) out.values[j] = f(g.node(j));
  return out;
}

// x_j = -L + j dx makes exp(-i x_j xi_k) = (-1)^k exp(-2 pi i jk / N), so the
// continuous-normalized coefficients are (-1)^k (dx/sqrt(2 pi)) DFT_k.
inline Spectrum to_spectrum(const Field& f) {
  Spectrum out{f.grid, f.values};
  const int n = f.grid.n_points;
  detail::fft_forward(out.coeffs.data(), n);
  const double scale = f.grid.dx() / std::sqrt(2.0 * M_PI);
  for (int k = 0; k < n; ++k) out.coeffs[k] *= (k & 1) ? -scale : scale;
  return out;
}

inline Field from_spectrum(const Spectrum& s) {
  Field out{s.grid, s.coeffs};
  const int n = s.grid.n_points;
  const double scale = s.grid.dxi() / std::sqrt(2.0 * M_PI);
  for (int k = 0; k < n; ++k) out.values[k] *= (k & 1) ? -scale : scale;
  detail::fft_backward(out.values.data(), n);
  return out;
}

// Trapezoidal evaluation of the continuous transform at an arbitrary
// frequency, the authority for off-lattice values such as alphahat(+-sqrt 3).
inline complexd ft_at(const Field& f, double xi0) {
  const int n = f.grid.n_points;
  const double dx = f.grid.dx();
  complexd acc = 0.0;
  for (int j = 0; j < n; ++j) {
    const double phase = -xi0 * f.grid.node(j);
    double w = (j == 0 || j == n - 1) ? 0.5 : 1.0;
    acc += w * f.values[j] * complexd(std::cos(phase), std::sin(phase));
  }
  return acc * dx / std::sqrt(2.0 * M_PI);
}

inline double sup_norm(const Field& f) {
  double m = 0.0;
  for (const auto& v : f.values) m = std::max(m, std::abs(v));
  return m;
}

inline double l2_norm(const Field& f) {
  double s = 0.0;
  for (const auto& v : f.values) s += std::norm(v);
  return std::sqrt(s * f.grid.dx());
}

inline double l2_norm(const Spectrum& s) {
  double acc = 0.0;
  for (const auto& c : s.coeffs) acc += std::norm(c);
  return std::sqrt(acc * s.grid.dxi());
}

inline double max_abs(const Spectrum& s) {
  double m = 0.0;
  for (const auto& c : s.coeffs) m = std::max(m, std::abs(c));
  return m;
}

// Largest boundary modulus relative to the overall maximum; callers report a
// warning when this exceeds 1e-10 (the transform then sees the truncation).
inline double boundary_decay(const Field& f) {
  const double m = sup_norm(f);
  if (m == 0.0) return 0.0;
  return std::max(std::abs(f.values.front()), std::abs(f.values.back())) / m;
}

inline bool effectively_real(const Field& f, double rel_tol = 1e-12) {
  const double m = sup_norm(f);
  if (m == 0.0) return true;
  double worst = 0.0;
  for (const auto& v : f.values) worst = std::max(worst, std::abs(v.imag()));
  return worst <= rel_tol * m;
}

inline Field real_part(const Field& f) {
  Field out{f.grid, f.values};
  for (auto& v : out.values) v = v.real();
  return out;
}

// Pointwise helpers used throughout; all enforce matching grids.
inline Field operator+(const Field& a, const Field& b) {
  require_same_grid(a.grid, b.grid, "Field::operator+");
  Field out = a;
  for (size_t j = 0; j < out.values.size(); ++j) out.values[j] += b.values[j];
  return out;
}

inline Field operator-(const Field& a, const Field& b) {
  require_same_grid(a.grid, b.grid, "Field::operator-");
  Field out = a;
  for (size_t j = 0; j < out.values.size(); ++j) out.values[j] -= b.values[j];
  return out;
}

inline Field operator*(complexd c, const Field& f) {
  Field out = f;
  for (auto& v : out.values) v *= c;
  return out;
}

inline Spectrum operator-(const Spectrum& a, const Spectrum& b) {
  require_same_grid(a.grid, b.grid, "Spectrum::operator-");
  Spectrum out = a;
  for (size_t k = 0; k < out.coeffs.size(); ++k) out.coeffs[k] -= b.coeffs[k];
  return out;
}

}  // namespace kglab
