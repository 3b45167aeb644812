#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "kglab/field.hpp"
#include "kglab/multipliers.hpp"

namespace kglab {

struct SobolevRecord {
  int weightedge = 0;  // j in <x>^j
  int order = 0;       // m in H^m
  double value = 0.0;
};

// A spatially localized real coefficient together with its resonance data
// alphahat(+-sqrt 3) and the weighted Sobolev norms the decay hypotheses ask
// for.  The resonant flag separates the two regimes of the dynamics.
struct Coefficient {
  Field values;
  complexd r_plus{};   // alphahat(+sqrt 3)
  complexd r_minus{};  // alphahat(-sqrt 3)
  double resonance_tolerance = 0.0;
  bool resonant = false;
  std::vector<SobolevRecord> sobolev_norms;
};

// ||<x>^j f||_{H^m} with spectral derivatives, m <= 4.
inline double weighted_sobolev(const Field& f, int weight, int order) {
  if (weight < 0 || order < 0) throw config_error("weighted_sobolev: orders must be non-negative");
  if (order > 4) throw config_error("weighted_sobolev: derivative order must be <= 4");
  Field w = f;
  for (int j = 0; j < f.grid.n_points; ++j) w.values[j] *= std::pow(bracket(f.grid.node(j)), weight);
  const Spectrum s = to_spectrum(w);
  double acc = 0.0;
  for (int k = 0; k < f.grid.n_points; ++k) {
    const double xi2 = f.grid.freq(k) * f.grid.freq(k);
    double weight_sum = 1.0, p = 1.0;
    for (int m = 1; m <= order; ++m) {
      p *= xi2;
      weight_sum += p;
    }
    acc += weight_sum * std::norm(s.coeffs[k]);
  }
  return std::sqrt(acc * f.grid.dxi());
}

// Fraction of the ||<x>^j f||_{H^m}^2 integrand carried by nodes |x| > 0.9 L;
// the decay hypotheses require this to be negligible.
inline double sobolev_boundary_fraction(const Field& f, int weight, int order) {
  Field w = f;
  for (int j = 0; j < f.grid.n_points; ++j) w.values[j] *= std::pow(bracket(f.grid.node(j)), weight);
  std::vector<double> density(f.grid.n_points, 0.0);
  Spectrum s = to_spectrum(w);
  for (int m = 0; m <= order; ++m) {
    const Field dm = from_spectrum(s);
    for (int j = 0; j < f.grid.n_points; ++j) density[j] += std::norm(dm.values[j]);
    s = apply_multiplier(s, Symbol::derivative());
  }
  double total = 0.0, boundary = 0.0;
  for (int j = 0; j < f.grid.n_points; ++j) {
    total += density[j];
    if (std::abs(f.grid.node(j)) > 0.9 * f.grid.half_length) boundary += density[j];
  }
  return total > 0.0 ? boundary / total : 0.0;
}

inline Coefficient make_coefficient(Field values) {
  if (!effectively_real(values)) throw config_error("make_coefficient: coefficient must be real");
  values = real_part(values);
  Coefficient c;
  c.r_plus = ft_at(values, std::sqrt(3.0));
  c.r_minus = ft_at(values, -std::sqrt(3.0));
  c.resonance_tolerance = 1e-8 * l2_norm(values);
  c.resonant = std::max(std::abs(c.r_plus), std::abs(c.r_minus)) > c.resonance_tolerance;
  c.sobolev_norms = {
      {8, 3, weighted_sobolev(values, 8, 3)},
      {4, 2, weighted_sobolev(values, 4, 2)},
      {3, 1, weighted_sobolev(values, 3, 1)},
  };
  c.values = std::move(values);
  return c;
}

enum class ProfileKind { gaussian, sech2, sech_tanh, cosine_gaussian };

struct ProfileParams {
  double amplitude = 1.0;
  double sigma = 1.0;  // gaussian / cosine_gaussian width
  double center = 0.0;
  double width = 1.0;  // sech2 width
  double omega = 0.0;  // cosine_gaussian carrier frequency
};

inline ProfileKind profile_kind_from_name(const std::string& name) {
  if (name == "gaussian") return ProfileKind::gaussian;
  if (name == "sech2") return ProfileKind::sech2;
  if (name == "sech_tanh") return ProfileKind::sech_tanh;
  if (name == "cosine_gaussian") return ProfileKind::cosine_gaussian;
  throw config_error("unknown coefficient profile kind '" + name + "'");
}

inline Field sample_profile(const Grid& g, ProfileKind kind, const ProfileParams& p) {
  switch (kind) {
    case ProfileKind::gaussian:
      return sample_field(g, [&](double x) {
        const double z = x - p.center;
        return p.amplitude * std::exp(-z * z / (2.0 * p.sigma * p.sigma));
      });
    case ProfileKind::sech2:
      return sample_field(g, [&](double x) {
        const double c = std::cosh(x / p.width);
        return p.amplitude / (c * c);
      });
    case ProfileKind::sech_tanh:
      // Mirrors the quadratic coefficient arising around the sine-Gordon kink.
      return sample_field(g, [&](double x) { return -p.amplitude * std::tanh(x) / std::cosh(x); });
    case ProfileKind::cosine_gaussian:
      return sample_field(g, [&](double x) {
        return p.amplitude * std::cos(p.omega * x) * std::exp(-x * x / (2.0 * p.sigma * p.sigma));
      });
  }
  throw config_error("sample_profile: unreachable");
}

inline Coefficient make_profile(const Grid& g, ProfileKind kind, const ProfileParams& p) {
  Field f = sample_profile(g, kind, p);
  if (boundary_decay(f) > 1e-10)
    throw config_error("make_profile: coefficient does not decay below 1e-10 at the grid boundary");
  return make_coefficient(std::move(f));
}

inline std::pair<complexd, complexd> resonance_values(const Coefficient& c) { return {c.r_plus, c.r_minus}; }

struct DeresonateResult {
  Coefficient coefficient;
  double c1 = 0.0;  // cos(sqrt 3 x) g(x) weight
  double c2 = 0.0;  // sin(sqrt 3 x) g(x) weight
};

// Removes the resonant Fourier content: alpha' = alpha - c1 cos(sqrt3 x) g -
// c2 sin(sqrt3 x) g, with (c1, c2) solving the 2x2 real system that zeroes
// alphahat'(+sqrt 3).  Conjugate symmetry of real fields then kills
// alphahat'(-sqrt 3) as well.
inline DeresonateResult deresonate(const Coefficient& c, const Field& window) {
  require_same_grid(c.values.grid, window.grid, "deresonate");
  const double s3 = std::sqrt(3.0);
  const Grid& g = c.values.grid;
  Field carrier_cos = window, carrier_sin = window;
  for (int j = 0; j < g.n_points; ++j) {
    carrier_cos.values[j] *= std::cos(s3 * g.node(j));
    carrier_sin.values[j] *= std::sin(s3 * g.node(j));
  }
  const complexd a = ft_at(carrier_cos, s3);
  const complexd b = ft_at(carrier_sin, s3);
  const complexd r = ft_at(c.values, s3);
  const double det = a.real() * b.imag() - b.real() * a.imag();
  const double scale = std::abs(a) * std::abs(b) + std::norm(a) + std::norm(b);
  if (std::abs(det) < 1e-12 * (scale + 1e-300))
    throw config_error("deresonate: window is degenerate at the resonant frequency");
  DeresonateResult out;
  out.c1 = (r.real() * b.imag() - b.real() * r.imag()) / det;
  out.c2 = (a.real() * r.imag() - r.real() * a.imag()) / det;
  Field adjusted = c.values;
  for (int j = 0; j < g.n_points; ++j)
    adjusted.values[j] -= out.c1 * carrier_cos.values[j] + out.c2 * carrier_sin.values[j];
  out.coefficient = make_coefficient(std::move(adjusted));
  return out;
}

inline Field default_deresonate_window(const Grid& g) {
  // sigma = 2 keeps ghat(0) >> ghat(2 sqrt 3), so the 2x2 system is
  // well-conditioned.
  return sample_profile(g, ProfileKind::gaussian, {.amplitude = 1.0, .sigma = 2.0});
}

}  // namespace kglab
