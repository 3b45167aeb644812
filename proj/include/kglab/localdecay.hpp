#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "kglab/fitting.hpp"
#include "kglab/multipliers.hpp"

namespace kglab {

// Variants of the weighted propagator <x>^-a S(nabla) e^{it<nabla>} <x>^-a:
// S = <nabla>^-b, d_x/<nabla>, or (<nabla>-1)/<nabla>.  The two vanishing
// symbols buy the faster t^{-3/2} and t^{-2} decay rates.
enum class PropagatorVariant { plain, px_over_bracket, bracket_minus_one };

inline const char* variant_name(PropagatorVariant v) {
  switch (v) {
    case PropagatorVariant::plain: return "plain";
    case PropagatorVariant::px_over_bracket: return "px_over_bracket";
    case PropagatorVariant::bracket_minus_one: return "bracket_minus_one";
  }
  return "?";
}

struct WeightedPropagatorSpec {
  double weight_power = 2.0;     // a >= 1
  double smoothing_power = 0.0;  // b >= 0 (plain variant only)
  PropagatorVariant variant = PropagatorVariant::plain;
  double time = 0.0;
  double window = 50.0;  // restrict the matrix to |x| <= window
  // Smooth UV roll-off exp(-(xi/(uv_cut*xi_max))^24), 0 disables.  The sharp
  // Nyquist truncation of a symbol that does not vanish at infinity leaves a
  // band-edge contribution ~1/t on the lattice that masks the low-frequency
  // decay rates; the mollifier restores the continuum behavior.
  double uv_cut = 0.0;
};

// Dense matrix of the operator restricted to the window: column j is the
// operator applied to the indicator of node j (spectral calculus on the full
// grid), sampled back on the window nodes and weight-multiplied.
inline Eigen::MatrixXcd build_matrix(const WeightedPropagatorSpec& spec, const Grid& g) {
  if (spec.weight_power < 1.0) throw config_error("build_matrix: weight power a must be >= 1");
  if (spec.smoothing_power < 0.0) throw config_error("build_matrix: smoothing power b must be >= 0");
  if (spec.window > g.half_length / 2.0)
    throw config_error("build_matrix: window must satisfy W <= L/2");

  std::vector<int> nodes;
  for (int j = 0; j < g.n_points; ++j)
    if (std::abs(g.node(j)) <= spec.window) nodes.push_back(j);
  if (nodes.size() > 2048)
    throw config_error("build_matrix: window holds " + std::to_string(nodes.size()) +
                       " nodes, dense limit is 2048");

  const int w = static_cast<int>(nodes.size());
  std::vector<double> weight(w);
  for (int c = 0; c < w; ++c) weight[c] = std::pow(bracket(g.node(nodes[c])), -spec.weight_power);

  // Symbol values on the lattice.
  std::vector<complexd> symbol(g.n_points);
  for (int k = 0; k < g.n_points; ++k) {
    const double xi = g.freq(k);
    const double b = bracket(xi);
    complexd s = std::polar(1.0, spec.time * b);
    switch (spec.variant) {
      case PropagatorVariant::plain: s *= std::pow(b, -spec.smoothing_power); break;
      case PropagatorVariant::px_over_bracket: s *= complexd(0.0, xi / b); break;
      case PropagatorVariant::bracket_minus_one: s *= (b - 1.0) / b; break;
    }
    if (spec.uv_cut > 0.0) s *= std::exp(-std::pow(std::abs(xi) / (spec.uv_cut * g.nyquist()), 24.0));
    symbol[k] = s;
  }

  Eigen::MatrixXcd m(w, w);
  Field col = make_field(g);
  for (int c = 0; c < w; ++c) {
    std::fill(col.values.begin(), col.values.end(), complexd(0.0));
    col.values[nodes[c]] = weight[c];
    Spectrum s = to_spectrum(col);
    for (int k = 0; k < g.n_points; ++k) s.coeffs[k] *= symbol[k];
    const Field out = from_spectrum(s);
    for (int r = 0; r < w; ++r) m(r, c) = weight[r] * out.values[nodes[r]];
  }
  return m;
}

// Largest singular value by power iteration on M^dagger M, relative
// tolerance 1e-8 on the Rayleigh quotient.
inline double operator_norm(const Eigen::MatrixXcd& m) {
  const int n = static_cast<int>(m.cols());
  if (n == 0) return 0.0;
  Eigen::VectorXcd x(n);
  for (int i = 0; i < n; ++i) x(i) = complexd(1.0 + 0.5 * std::sin(3.7 * (i + 1)), 0.0);
  x.normalize();
  double lambda = 0.0;
  for (int it = 0; it < 10000; ++it) {
    Eigen::VectorXcd y = m.adjoint() * (m * x);
    const double next = std::real(x.dot(y));
    const double ynorm = y.norm();
    if (ynorm == 0.0) return 0.0;
    x = y / ynorm;
    if (it > 2 && std::abs(next - lambda) <= 1e-8 * std::abs(next)) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return std::sqrt(std::max(0.0, lambda));
}

struct DecayScan {
  PropagatorVariant variant;
  std::vector<double> times;
  std::vector<double> norms;
  double exponent = 0.0;
  double rms_residual = 0.0;
};

inline DecayScan decay_scan(PropagatorVariant variant, double a, double b, const Grid& g,
                            const std::vector<double>& times, double window) {
  DecayScan scan;
  scan.variant = variant;
  scan.times = times;
  for (double t : times) {
    WeightedPropagatorSpec spec{a, b, variant, t, window, 0.75};
    scan.norms.push_back(operator_norm(build_matrix(spec, g)));
  }
  const power_law_fit fit = fit_power_law(scan.times, scan.norms);
  scan.exponent = fit.exponent;
  scan.rms_residual = fit.rms_residual;
  return scan;
}

inline std::vector<double> geometric_times(double t0, double t1, int count) {
  std::vector<double> ts;
  for (int i = 0; i < count; ++i) ts.push_back(t0 * std::pow(t1 / t0, double(i) / (count - 1)));
  return ts;
}

}  // namespace kglab
