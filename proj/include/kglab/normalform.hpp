#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "kglab/coefficients.hpp"
#include "kglab/evolution.hpp"
#include "kglab/interpolation.hpp"

namespace kglab {

// Coefficients of the variable-coefficient quadratic normal form
//   Q = alpha1 v(t,0)^2 + alpha2 |v(t,0)|^2 + alpha3 vbar(t,0)^2,
// defined through their transforms
//   alpha1hat =  (1/2) (2-<xi>)^{-1} <xi>^{-1} alphahat,
//   alpha2hat = -<xi>^{-2} alphahat,
//   alpha3hat = -(1/2) (2+<xi>)^{-1} <xi>^{-1} alphahat.
// alpha1hat is guarded near <xi> = 2: inside |2-<xi>| < 1e-3 the quotient is
// filled in by degree-3 interpolation of alphahat/(2-<xi>) from outside the
// band, which is smooth because alphahat vanishes at +-sqrt 3.
struct GuardDiagnostics {
  int band_modes = 0;          // lattice frequencies inside either guard band
  double max_band_value = 0.0; // max |alpha1hat| over the band
  double edge_value = 0.0;     // |alpha1hat| at the nearest outside frequency
};

struct NormalFormCoeffs {
  Field alpha1, alpha2, alpha3;
  Spectrum alpha1_hat, alpha2_hat, alpha3_hat;
  complexd source_r_plus{}, source_r_minus{};
  GuardDiagnostics guard;
};

inline NormalFormCoeffs normal_form_coefficients(const Coefficient& alpha) {
  if (alpha.resonant)
    throw config_error("normal_form_coefficients: alpha is resonant, |alphahat(+sqrt3)| = " +
                       std::to_string(std::abs(alpha.r_plus)) + ", |alphahat(-sqrt3)| = " +
                       std::to_string(std::abs(alpha.r_minus)) +
                       " exceed tolerance " + std::to_string(alpha.resonance_tolerance));
  const Grid& g = alpha.values.grid;
  const int n = g.n_points;
  const Spectrum ahat = to_spectrum(alpha.values);

  NormalFormCoeffs nf;
  nf.source_r_plus = alpha.r_plus;
  nf.source_r_minus = alpha.r_minus;
  nf.alpha2_hat = make_spectrum(g);
  nf.alpha3_hat = make_spectrum(g);
  nf.alpha1_hat = make_spectrum(g);

  std::vector<int> band_bins;
  for (int k = 0; k < n; ++k) {
    const double b = bracket(g.freq(k));
    nf.alpha2_hat.coeffs[k] = -ahat.coeffs[k] / (b * b);
    nf.alpha3_hat.coeffs[k] = -0.5 * ahat.coeffs[k] / ((2.0 + b) * b);
    if (std::abs(2.0 - b) < resonance_guard_band)
      band_bins.push_back(k);
    else
      nf.alpha1_hat.coeffs[k] = 0.5 * ahat.coeffs[k] / ((2.0 - b) * b);
  }

  // Lattice order is monotone in |xi|, so in-band bins are contiguous per
  // sign; interpolate the quotient from the 4 nearest out-of-band bins.
  for (int k : band_bins) {
    const double xi = g.freq(k);
    std::vector<double> xs;
    std::vector<complexd> qs;
    for (int off = 1; static_cast<int>(xs.size()) < 4 && off <= n / 2; ++off) {
      for (int sgn : {-1, 1}) {
        if (static_cast<int>(xs.size()) >= 4) break;
        const int kk = g.signed_index(k) + sgn * off;
        if (kk < -n / 2 || kk >= n / 2) continue;
        const int bin = kk >= 0 ? kk : kk + n;
        const double b2 = bracket(g.freq(bin));
        if (std::abs(2.0 - b2) < resonance_guard_band) continue;
        xs.push_back(g.freq(bin));
        qs.push_back(ahat.coeffs[bin] / (2.0 - b2));
      }
    }
    const complexd q = lagrange_interpolate(xs, qs, xi);
    nf.alpha1_hat.coeffs[k] = 0.5 * q / bracket(xi);
    nf.guard.band_modes++;
    nf.guard.max_band_value = std::max(nf.guard.max_band_value, std::abs(nf.alpha1_hat.coeffs[k]));
    double best = 1e300;
    for (size_t m = 0; m < xs.size(); ++m) {
      const double dist = std::abs(xs[m] - xi);
      if (dist < best) {
        best = dist;
        nf.guard.edge_value = std::abs(0.5 * qs[m] / bracket(xs[m]));
      }
    }
  }

  nf.alpha1 = from_spectrum(nf.alpha1_hat);
  nf.alpha2 = from_spectrum(nf.alpha2_hat);
  nf.alpha3 = from_spectrum(nf.alpha3_hat);
  return nf;
}

// Q evaluated for a given origin value v(t,0).
inline Field q_field(const NormalFormCoeffs& nf, complexd v_origin) {
  Field out = make_field(nf.alpha1.grid);
  const complexd z2 = v_origin * v_origin;
  const double m2 = std::norm(v_origin);
  const complexd zb2 = std::conj(v_origin) * std::conj(v_origin);
  for (size_t j = 0; j < out.values.size(); ++j)
    out.values[j] = nf.alpha1.values[j] * z2 + nf.alpha2.values[j] * m2 + nf.alpha3.values[j] * zb2;
  return out;
}

struct ResidualReport {
  std::vector<double> times;
  std::vector<double> residuals;  // ||(d/dt - i<nabla>)(v+Q) - RHS||_{L^2}
  double max_residual = 0.0;
  double max_state_l2 = 0.0;
};

// Verifies the transformed equation as a numerical identity on stored
// checkpoints.  All time derivatives are evaluated through the equation, so
// up to guard-band interpolation and roundoff the residual vanishes for any
// state, independent of amplitude.
inline ResidualReport residual_check(const Trajectory& traj, const NormalFormCoeffs& nf,
                                     const Field& alpha, const Field& beta, double beta0) {
  const SimConfig& cfg = traj.config;
  const Grid& g = cfg.grid;
  require_same_grid(g, nf.alpha1.grid, "residual_check");
  const int n = g.n_points;
  const Spectrum ahat_run = to_spectrum(alpha);

  detail::evolution_workspace ws(g, cfg.dt, cfg.dealias);

  ResidualReport rep;
  for (const Checkpoint& cp : traj.checkpoints) {
    const double t = cp.t;
    std::vector<complexd> vhat(n);
    for (int k = 0; k < n; ++k)
      vhat[k] = std::polar(1.0, t * ws.brackets[k]) * cp.profile.coeffs[k];
    Spectrum vs{g, vhat};
    const Field v = from_spectrum(vs);
    const Field u = reconstruct_u(v);
    const complexd z = v.values[g.origin_index()];
    const double u0 = 2.0 * z.real();

    // Pieces of the nonlinearity, assembled exactly as the integrator does.
    Field w_diff = make_field(g);   // alpha (u^2 - u(t,0)^2)
    Field w_cubic = make_field(g);  // (beta0 + beta) u^3
    for (int j = 0; j < n; ++j) {
      const double uj = u.values[j].real();
      w_diff.values[j] = alpha.values[j].real() * (uj * uj - u0 * u0);
      w_cubic.values[j] = (beta0 + beta.values[j].real()) * uj * uj * uj;
    }
    Spectrum s_diff = to_spectrum(w_diff);
    Spectrum s_cubic = to_spectrum(w_cubic);

    std::vector<complexd> n_hat(n);
    for (int k = 0; k < n; ++k) {
      const complexd mult(0.0, -0.5 / ws.brackets[k]);
      complexd total = mult * (ahat_run.coeffs[k] * (u0 * u0) + s_diff.coeffs[k] + s_cubic.coeffs[k]);
      if (!ws.keep[k]) total = 0.0;
      n_hat[k] = total;
      s_diff.coeffs[k] = ws.keep[k] ? mult * s_diff.coeffs[k] : complexd(0.0);
      s_cubic.coeffs[k] = ws.keep[k] ? mult * s_cubic.coeffs[k] : complexd(0.0);
    }

    // zdot = (i <nabla> v + N)(t, 0) through the equation.
    complexd bracket_v0 = 0.0, n_field0 = 0.0;
    {
      Spectrum tmp = make_spectrum(g);
      for (int k = 0; k < n; ++k) tmp.coeffs[k] = ws.brackets[k] * vhat[k] + complexd(0.0, -1.0) * n_hat[k];
      // One inverse transform delivers (<nabla> v - i N) and origin reads.
      const Field both = from_spectrum(tmp);
      const Field nf_field = from_spectrum(Spectrum{g, n_hat});
      n_field0 = nf_field.values[g.origin_index()];
      bracket_v0 = both.values[g.origin_index()] + complexd(0.0, 1.0) * n_field0;
    }
    const complexd zdot = complexd(0.0, 1.0) * bracket_v0 + n_field0;
    const complexd p = std::polar(1.0, -t) * z;
    const complexd d = std::polar(1.0, -t) * (zdot - complexd(0.0, 1.0) * z);

    const complexd z2dot = 2.0 * z * zdot;
    const complexd m2dot = zdot * std::conj(z) + z * std::conj(zdot);
    const complexd zb2dot = 2.0 * std::conj(z) * std::conj(zdot);

    const complexd e2it = std::polar(1.0, 2.0 * t);
    const complexd r1s = 2.0 * e2it * d * p;
    const double r2s = 2.0 * (d * std::conj(p)).real();
    const complexd r3s = 2.0 * std::conj(e2it) * std::conj(d) * std::conj(p);

    double acc = 0.0;
    for (int k = 0; k < n; ++k) {
      const double b = ws.brackets[k];
      const complexd qk = nf.alpha1_hat.coeffs[k] * z * z + nf.alpha2_hat.coeffs[k] * std::norm(z) +
                          nf.alpha3_hat.coeffs[k] * std::conj(z) * std::conj(z);
      const complexd qdotk = nf.alpha1_hat.coeffs[k] * z2dot + nf.alpha2_hat.coeffs[k] * m2dot +
                             nf.alpha3_hat.coeffs[k] * zb2dot;
      const complexd lhs = n_hat[k] + qdotk - complexd(0.0, b) * qk;
      const complexd rhs = nf.alpha1_hat.coeffs[k] * r1s + nf.alpha2_hat.coeffs[k] * r2s +
                           nf.alpha3_hat.coeffs[k] * r3s + s_diff.coeffs[k] + s_cubic.coeffs[k];
      acc += std::norm(lhs - rhs);
    }
    rep.times.push_back(t);
    rep.residuals.push_back(std::sqrt(acc * g.dxi()));
    rep.max_residual = std::max(rep.max_residual, rep.residuals.back());
    rep.max_state_l2 = std::max(rep.max_state_l2, l2_norm(v));
  }
  return rep;
}

}  // namespace kglab
