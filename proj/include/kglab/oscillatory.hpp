#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <string>

#include "kglab/errors.hpp"
#include "kglab/multipliers.hpp"

namespace kglab {

// A smooth 2D phase with analytic gradient and Hessian.  Derivatives are
// cross-checked against finite differences before Newton runs on any phase.
struct Phase2D {
  std::function<double(double, double)> value;
  std::function<std::array<double, 2>(double, double)> gradient;
  std::function<std::array<double, 3>(double, double)> hessian;  // (xx, xy, yy)
};

// Compactly supported cutoff on the square |x-cx|, |y-cy| <= half_width.
struct Cutoff2D {
  std::function<double(double, double)> value;
  double center_x = 0.0, center_y = 0.0;
  double half_width = 2.0;
};

// The standard C^inf bump, scaled to 1 at the center and vanishing on the
// boundary of the square of half-width r.
inline Cutoff2D bump_cutoff(double r = 2.0) {
  Cutoff2D c;
  c.half_width = r;
  c.value = [r](double x, double y) {
    const double s = (x * x + y * y) / (r * r);
    if (s >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - s));
  };
  return c;
}

struct PhaseAnalysis2D {
  double eta0 = 0.0, sigma0 = 0.0;  // stationary point
  double value = 0.0;               // psi(eta0, sigma0)
  double det = 0.0;                 // det Hess (signed)
  int signature = 0;                // sign Hess in {-2, 0, 2}
  int iterations = 0;
};

namespace detail {

inline void check_phase_derivatives(const Phase2D& psi, double x, double y) {
  const double h = 1e-5;
  const auto g = psi.gradient(x, y);
  const double gx_fd = (psi.value(x + h, y) - psi.value(x - h, y)) / (2 * h);
  const double gy_fd = (psi.value(x, y + h) - psi.value(x, y - h)) / (2 * h);
  const auto hs = psi.hessian(x, y);
  const double hxx_fd = (psi.gradient(x + h, y)[0] - psi.gradient(x - h, y)[0]) / (2 * h);
  const double hxy_fd = (psi.gradient(x, y + h)[0] - psi.gradient(x, y - h)[0]) / (2 * h);
  const double hyy_fd = (psi.gradient(x, y + h)[1] - psi.gradient(x, y - h)[1]) / (2 * h);
  const double scale = 1.0 + std::abs(g[0]) + std::abs(g[1]) + std::abs(hs[0]) + std::abs(hs[2]);
  if (std::abs(g[0] - gx_fd) + std::abs(g[1] - gy_fd) > 1e-4 * scale ||
      std::abs(hs[0] - hxx_fd) + std::abs(hs[1] - hxy_fd) + std::abs(hs[2] - hyy_fd) > 1e-3 * scale)
    throw config_error("Phase2D: analytic derivatives disagree with finite differences");
}

}  // namespace detail

// Damped Newton iteration on grad psi = 0 from the given start.
inline PhaseAnalysis2D find_stationary_point(const Phase2D& psi, double x0, double y0) {
  detail::check_phase_derivatives(psi, x0, y0);
  double x = x0, y = y0;
  auto g = psi.gradient(x, y);
  auto gnorm = [](const std::array<double, 2>& v) { return std::hypot(v[0], v[1]); };
  PhaseAnalysis2D out;
  // Iterate well below the 1e-10 contract so the position itself is accurate
  // even when the Hessian is small.
  for (out.iterations = 0; out.iterations < 50 && gnorm(g) > 1e-13; ++out.iterations) {
    const auto h = psi.hessian(x, y);
    const double det = h[0] * h[2] - h[1] * h[1];
    if (std::abs(det) < 1e-12)
      throw numerical_guard_error("find_stationary_point: singular Hessian during Newton");
    double dx = -(h[2] * g[0] - h[1] * g[1]) / det;
    double dy = -(-h[1] * g[0] + h[0] * g[1]) / det;
    double lambda = 1.0;
    for (int halvings = 0; halvings < 25; ++halvings) {
      const auto gn = psi.gradient(x + lambda * dx, y + lambda * dy);
      if (gnorm(gn) < gnorm(g)) break;
      lambda *= 0.5;
    }
    x += lambda * dx;
    y += lambda * dy;
    g = psi.gradient(x, y);
  }
  if (gnorm(g) > 1e-10)
    throw numerical_guard_error("find_stationary_point: Newton failed to converge in 50 iterations");
  out.eta0 = x;
  out.sigma0 = y;
  out.value = psi.value(x, y);
  const auto h = psi.hessian(x, y);
  out.det = h[0] * h[2] - h[1] * h[1];
  if (std::abs(out.det) < 1e-8)
    throw numerical_guard_error("find_stationary_point: degenerate Hessian (|det| < 1e-8)");
  out.signature = out.det < 0.0 ? 0 : (h[0] + h[2] > 0.0 ? 2 : -2);
  return out;
}

// Leading stationary-phase term
//   I ~ 2 pi e^{i pi s/4} / sqrt(|det|) * e^{i lambda psi0} / lambda * F0 chi0.
template <typename Amplitude>
complexd stationary_phase_2d(const Phase2D& psi, Amplitude&& amp, const Cutoff2D& chi, double lambda) {
  if (!(lambda > 0.0)) throw config_error("stationary_phase_2d: lambda must be positive");
  const PhaseAnalysis2D a = find_stationary_point(psi, chi.center_x, chi.center_y);
  const double f0 = amp(a.eta0, a.sigma0) * chi.value(a.eta0, a.sigma0);
  return 2.0 * M_PI / std::sqrt(std::abs(a.det)) / lambda *
         std::polar(1.0, M_PI / 4.0 * a.signature + lambda * a.value) * f0;
}

// Single tensor-grid trapezoid evaluation on an (m+1)^2 lattice over the
// cutoff support square.  The cutoff vanishes on the boundary, so the plain
// weight is already the trapezoid rule.
template <typename Amplitude>
complexd brute_force_2d_fixed(const Phase2D& psi, Amplitude&& amp, const Cutoff2D& chi, double lambda,
                              long m) {
  if (m > 131072) throw numerical_guard_error("brute_force_2d: grid size exceeds memory guard");
  const double r = chi.half_width;
  const double step = 2.0 * r / m;
  complexd acc = 0.0;
  for (long iy = 0; iy <= m; ++iy) {
    const double y = chi.center_y - r + step * iy;
    complexd row = 0.0;
    for (long ix = 0; ix <= m; ++ix) {
      const double x = chi.center_x - r + step * ix;
      const double w = amp(x, y) * chi.value(x, y);
      if (w != 0.0) row += w * std::polar(1.0, lambda * psi.value(x, y));
    }
    acc += row;
  }
  return acc * (step * step);
}

// Quadrature oracle: at least min_points_per_wavelength sample points per
// local oscillation, then self-converged to 1e-6 by grid doubling.
template <typename Amplitude>
complexd brute_force_2d(const Phase2D& psi, Amplitude&& amp, const Cutoff2D& chi, double lambda,
                        int min_points_per_wavelength = 40) {
  const double r = chi.half_width;
  // Probe the maximal gradient over the support box.
  double gmax = 0.0;
  for (int i = 0; i <= 32; ++i)
    for (int j = 0; j <= 32; ++j) {
      const double x = chi.center_x + r * (2.0 * i / 32.0 - 1.0);
      const double y = chi.center_y + r * (2.0 * j / 32.0 - 1.0);
      const auto g = psi.gradient(x, y);
      gmax = std::max(gmax, std::hypot(g[0], g[1]));
    }
  double h = 2.0 * r / 64.0;
  if (lambda * gmax > 0.0)
    h = std::min(h, 2.0 * M_PI / (lambda * gmax) / min_points_per_wavelength);
  long m = std::lround(std::ceil(2.0 * r / h));

  complexd prev = brute_force_2d_fixed(psi, amp, chi, lambda, m);
  for (int doublings = 0; doublings < 3; ++doublings) {
    m *= 2;
    const complexd next = brute_force_2d_fixed(psi, amp, chi, lambda, m);
    const double diff = std::abs(next - prev);
    prev = next;
    if (diff <= 1e-6 * (std::abs(next) + 1e-30)) break;
  }
  return prev;
}

// Phase data of the four cubic interaction phases
//   phi_j = -<xi> + e0 <xi-eta-sigma> + e1 <eta> + e2 <sigma>
// with sign patterns (+,+,+), (+,-,+), (+,-,-), (-,-,-).
struct CubicPhaseData {
  int index = 0;
  double xi = 0.0;
  double eta = 0.0, sigma = 0.0;  // stationary point
  double value = 0.0;
  double det = 0.0;
  int signature = 0;
};

namespace detail {
inline std::array<int, 3> cubic_phase_signs(int j) {
  switch (j) {
    case 1: return {+1, +1, +1};
    case 2: return {+1, -1, +1};
    case 3: return {+1, -1, -1};
    case 4: return {-1, -1, -1};
  }
  throw config_error("cubic phase index must be in {1,2,3,4}");
}
}  // namespace detail

inline Phase2D cubic_phase(int j, double xi) {
  const auto s = detail::cubic_phase_signs(j);
  Phase2D p;
  p.value = [s, xi](double eta, double sigma) {
    return -bracket(xi) + s[0] * bracket(xi - eta - sigma) + s[1] * bracket(eta) + s[2] * bracket(sigma);
  };
  p.gradient = [s, xi](double eta, double sigma) -> std::array<double, 2> {
    const double z = xi - eta - sigma;
    const double gz = z / bracket(z);
    return {-s[0] * gz + s[1] * eta / bracket(eta), -s[0] * gz + s[2] * sigma / bracket(sigma)};
  };
  p.hessian = [s, xi](double eta, double sigma) -> std::array<double, 3> {
    const double z = xi - eta - sigma;
    const double hz = s[0] * std::pow(bracket(z), -3.0);
    return {hz + s[1] * std::pow(bracket(eta), -3.0), hz, hz + s[2] * std::pow(bracket(sigma), -3.0)};
  };
  return p;
}

// Closed forms from the stationary-point computation for the cubic phases.
inline CubicPhaseData cubic_phase_data(int j, double xi) {
  detail::cubic_phase_signs(j);  // validates j
  CubicPhaseData d;
  d.index = j;
  d.xi = xi;
  const double b = bracket(xi);
  const double b3 = bracket(xi / 3.0);
  switch (j) {
    case 1:
      d.eta = d.sigma = xi / 3.0;
      d.value = -b + 3.0 * b3;
      d.det = 3.0 * std::pow(b3, -6.0);
      d.signature = 2;
      break;
    case 2:
      d.eta = -xi;
      d.sigma = xi;
      d.value = 0.0;
      d.det = -std::pow(b, -6.0);
      d.signature = 0;
      break;
    case 3:
      d.eta = d.sigma = xi;
      d.value = -2.0 * b;
      d.det = -std::pow(b, -6.0);
      d.signature = 0;
      break;
    case 4:
      d.eta = d.sigma = xi / 3.0;
      d.value = -b - 3.0 * b3;
      d.det = 3.0 * std::pow(b3, -6.0);
      d.signature = -2;
      break;
  }
  return d;
}

// Phase of the v_mod oscillatory integral, psi = x xi + (t-s)<xi> + 2s.
struct VmodPhase {
  double value = 0.0;
  double d_xi = 0.0;
  double d2_xi = 0.0;
};

inline VmodPhase vmod_phase(double s, double xi, double t, double x) {
  const double b = bracket(xi);
  return {x * xi + (t - s) * b + 2.0 * s, x + (t - s) * xi / b, (t - s) / (b * b * b)};
}

// Along x = (sqrt 3/2) t the phase phi(s;t) = rho(t-s) + 2s with
// rho = ((t-s)^2 - (3/4) t^2)^{1/2} is stationary at s = 0 where phi = t/2.
struct RayPhase {
  double value = 0.0;
  double deviation = 0.0;  // |phi - t/2|
};

inline RayPhase ray_phase_taylor(double t, double s) {
  if (!(t > 0.0) || s < 0.0 || s >= t * (1.0 - std::sqrt(3.0) / 2.0))
    throw config_error("ray_phase_taylor: need 0 <= s < t (1 - sqrt(3)/2)");
  const double rho = std::sqrt((t - s) * (t - s) - 0.75 * t * t);
  const double phi = rho + 2.0 * s;
  return {phi, std::abs(phi - 0.5 * t)};
}

}  // namespace kglab
