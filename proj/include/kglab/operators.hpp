#pragma once

#include <cmath>

#include "kglab/multipliers.hpp"

namespace kglab {

// L = <nabla> x - i t d/dx, the weighted operator conjugate to <xi> i d/dxi
// under the free flow; ||<nabla> L v|| is the slow-growth diagnostic norm.
inline Field l_operator(const Field& v, double t) {
  Field xv = v;
  for (int j = 0; j < v.grid.n_points; ++j) xv.values[j] *= v.grid.node(j);
  Spectrum s1 = apply_multiplier(to_spectrum(xv), Symbol::bracket_power(1.0));
  Spectrum s2 = apply_multiplier(to_spectrum(v), Symbol::derivative());
  Field out = from_spectrum(s1);
  const Field dv = from_spectrum(s2);
  const complexd it(0.0, t);
  for (size_t j = 0; j < out.values.size(); ++j) out.values[j] -= it * dv.values[j];
  return out;
}

inline double bracket_l_norm(const Field& v, double t) {
  // ||<nabla> L v||_{L^2} evaluated by Parseval, no inverse transforms.
  Field xv = v;
  for (int j = 0; j < v.grid.n_points; ++j) xv.values[j] *= v.grid.node(j);
  const Spectrum sxv = to_spectrum(xv);
  const Spectrum sv = to_spectrum(v);
  double acc = 0.0;
  for (int k = 0; k < v.grid.n_points; ++k) {
    const double xi = v.grid.freq(k);
    const double b = bracket(xi);
    const complexd lhat = b * sxv.coeffs[k] - complexd(0.0, t) * complexd(0.0, xi) * sv.coeffs[k];
    acc += std::norm(b * lhat);
  }
  return std::sqrt(acc * v.grid.dxi());
}

// ||<x>^-a f||_{L^2}, the local decay norms of the bootstrap diagnostics.
inline double weighted_l2_norm(const Field& f, double a) {
  double acc = 0.0;
  for (int j = 0; j < f.grid.n_points; ++j) {
    const double w = std::pow(bracket(f.grid.node(j)), -a);
    acc += w * w * std::norm(f.values[j]);
  }
  return std::sqrt(acc * f.grid.dx());
}

// Leading term of the linear Klein-Gordon asymptotics
//   (e^{it<nabla>} f)(x) ~ t^{-1/2} e^{i pi/4} e^{i rho} <x/rho>^{3/2}
//                          fhat(-x/rho) theta(x/t),
// with rho = (t^2-x^2)^{1/2} and a sharp light-cone cut-off.  fhat at the
// off-lattice frequency -x/rho is evaluated by quadrature.
inline complexd free_wave_asymptotic(const Field& f0, double t, double x) {
  if (std::abs(x) >= t) return 0.0;
  const double rho = std::sqrt(t * t - x * x);
  const double z = x / rho;
  const complexd fhat = ft_at(f0, -z);
  const double amp = std::pow(bracket(z), 1.5) / std::sqrt(t);
  return amp * std::polar(1.0, M_PI / 4.0 + rho) * fhat;
}

}  // namespace kglab
