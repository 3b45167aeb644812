#pragma once

#include <cmath>
#include <complex>
#include <string>

#include "kglab/field.hpp"

namespace kglab {

// Klein-Gordon bracket <xi> = (1+xi^2)^(1/2).
inline double bracket(double xi) { return std::sqrt(1.0 + xi * xi); }

// Half-width of the guarded band around the resonance 2 - <xi> = 0 and the
// relative coefficient size below which division inside the band is allowed
// (see the normal-form construction for how in-band modes are handled).
inline constexpr double resonance_guard_band = 1e-3;
inline constexpr double resonance_cancellation_tol = 1e-8;

// Fourier multiplier descriptors.  half_wave carries the time t in param;
// bracket_power carries the exponent s.
struct Symbol {
  enum class kind_t {
    bracket_power,                   // <xi>^s
    i_xi,                            // i xi        (d/dx)
    half_wave,                       // exp(i t <xi>)
    inv_two_minus_bracket,           // (2 - <xi>)^(-1), guarded
    inv_two_plus_bracket,            // (2 + <xi>)^(-1)
    bracket_minus_one_over_bracket,  // (<xi> - 1)/<xi>
    xi_over_bracket,                 // xi/<xi>
  };

  kind_t kind;
  double param = 0.0;

  static Symbol bracket_power(double s) { return {kind_t::bracket_power, s}; }
  static Symbol derivative() { return {kind_t::i_xi, 0.0}; }
  static Symbol half_wave(double t) { return {kind_t::half_wave, t}; }
  static Symbol inv_two_minus_bracket() { return {kind_t::inv_two_minus_bracket, 0.0}; }
  static Symbol inv_two_plus_bracket() { return {kind_t::inv_two_plus_bracket, 0.0}; }
  static Symbol bracket_minus_one_over_bracket() { return {kind_t::bracket_minus_one_over_bracket, 0.0}; }
  static Symbol xi_over_bracket() { return {kind_t::xi_over_bracket, 0.0}; }

  complexd eval(double xi) const {
    const double b = bracket(xi);
    switch (kind) {
      case kind_t::bracket_power: return std::pow(b, param);
      case kind_t::i_xi: return complexd(0.0, xi);
      case kind_t::half_wave: return std::polar(1.0, param * b);
      case kind_t::inv_two_minus_bracket: return 1.0 / (2.0 - b);
      case kind_t::inv_two_plus_bracket: return 1.0 / (2.0 + b);
      case kind_t::bracket_minus_one_over_bracket: return (b - 1.0) / b;
      case kind_t::xi_over_bracket: return xi / b;
    }
    return 0.0;
  }
};

// Pointwise multiplication of the coefficients by m(xi_k).  The guarded
// symbol (2-<xi>)^(-1) refuses to divide when a lattice frequency sits inside
// the guard band while the coefficient there is not negligibly small: that is
// an unremoved resonance, not a rounding issue.
inline Spectrum apply_multiplier(const Spectrum& s, const Symbol& m) {
  Spectrum out = s;
  const int n = s.grid.n_points;
  if (m.kind == Symbol::kind_t::inv_two_minus_bracket) {
    const double tol = resonance_cancellation_tol * max_abs(s);
    for (int k = 0; k < n; ++k) {
      const double gap = 2.0 - bracket(s.grid.freq(k));
      if (std::abs(gap) < resonance_guard_band && std::abs(s.coeffs[k]) > tol)
        throw numerical_guard_error(
            "apply_multiplier: (2-<xi>)^(-1) hit an unremoved resonance at xi = " +
            std::to_string(s.grid.freq(k)) + " (|coef| = " + std::to_string(std::abs(s.coeffs[k])) + ")");
    }
  }
  for (int k = 0; k < n; ++k) out.coeffs[k] *= m.eval(s.grid.freq(k));
  return out;
}

// exp(i t <nabla>) f, the free Klein-Gordon half-wave flow.
inline Spectrum propagate(const Spectrum& s, double t) { return apply_multiplier(s, Symbol::half_wave(t)); }

inline Field propagate(const Field& f, double t) { return from_spectrum(propagate(to_spectrum(f), t)); }

inline Field derivative(const Field& f) { return from_spectrum(apply_multiplier(to_spectrum(f), Symbol::derivative())); }

// Zero every mode with |k| > N/3 (the 2/3 rule for cubic products).
inline void dealias(Spectrum& s) {
  const int n = s.grid.n_points;
  const int cut = n / 3;
  for (int k = 0; k < n; ++k)
    if (std::abs(s.grid.signed_index(k)) > cut) s.coeffs[k] = 0.0;
}

}  // namespace kglab
