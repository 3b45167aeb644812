#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "kglab/coefficients.hpp"
#include "kglab/evolution.hpp"
#include "kglab/fitting.hpp"
#include "kglab/interpolation.hpp"

namespace kglab {

// ---------------------------------------------------------------------------
// Decay-law fitting
// ---------------------------------------------------------------------------

enum class DecayModel { power, logpower };

// power:    y ~ C t^{-p}            (amplitude C, exponent p)
// logpower: y ~ (A + B log t) / sqrt(t)   (amplitude A, log_coeff B)
struct DecayFit {
  DecayModel model = DecayModel::power;
  double amplitude = 0.0;
  double exponent = 0.0;
  double log_coeff = 0.0;
  double t1 = 0.0, t2 = 0.0;
  int n_samples = 0;
  double rms_log_residual = 0.0;
};

inline DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& y, DecayModel model,
                          double t1, double t2) {
  if (t.size() != y.size()) throw config_error("fit_decay: mismatched series lengths");
  if (t1 < 1.0) throw config_error("fit_decay: window must start at t >= 1");
  std::vector<double> ts, ys;
  for (size_t i = 0; i < t.size(); ++i)
    if (t[i] >= t1 && t[i] <= t2 && y[i] > 0.0) {
      ts.push_back(t[i]);
      ys.push_back(y[i]);
    }
  if (ts.size() < 12)
    throw config_error("fit_decay: window [" + std::to_string(t1) + ", " + std::to_string(t2) +
                       "] holds only " + std::to_string(ts.size()) + " samples, need >= 12");
  DecayFit fit;
  fit.model = model;
  fit.t1 = t1;
  fit.t2 = t2;
  fit.n_samples = static_cast<int>(ts.size());
  if (model == DecayModel::power) {
    const power_law_fit p = fit_power_law(ts, ys);
    fit.amplitude = p.amplitude;
    fit.exponent = -p.exponent;  // stored as y ~ C t^{-p}
    fit.rms_log_residual = p.rms_residual;
  } else {
    std::vector<double> lx(ts.size()), z(ts.size());
    for (size_t i = 0; i < ts.size(); ++i) {
      lx[i] = std::log(ts[i]);
      z[i] = ys[i] * std::sqrt(ts[i]);
    }
    const linear_fit_result r = linear_fit(lx, z);
    fit.amplitude = r.intercept;
    fit.log_coeff = r.slope;
    fit.exponent = 0.5;
    double acc = 0.0;
    bool positive = true;
    for (size_t i = 0; i < ts.size(); ++i) {
      const double m = (r.intercept + r.slope * lx[i]) / std::sqrt(ts[i]);
      if (m <= 0.0) {
        positive = false;
        break;
      }
      const double e = std::log(ys[i]) - std::log(m);
      acc += e * e;
    }
    fit.rms_log_residual =
        positive ? std::sqrt(acc / ts.size()) : std::numeric_limits<double>::infinity();
  }
  return fit;
}

// ---------------------------------------------------------------------------
// Ray sampling
// ---------------------------------------------------------------------------

struct RaySamples {
  double speed = 0.0;
  std::vector<double> t;
  std::vector<complexd> v;
  bool truncated = false;  // the ray left the resolved region |x| <= 0.9 L
};

inline RaySamples sample_ray(const Trajectory& traj, double speed) {
  if (std::abs(speed) >= 1.0) throw config_error("sample_ray: need |c| < 1");
  RaySamples out;
  out.speed = speed;
  for (const Checkpoint& cp : traj.checkpoints) {
    const double x = speed * cp.t;
    if (std::abs(x) > 0.9 * traj.config.grid.half_length) {
      out.truncated = true;
      break;
    }
    Spectrum s = propagate(cp.profile, cp.t);
    if (traj.config.dealias) dealias(s);  // match the recorded solution
    const Field v = from_spectrum(s);
    out.t.push_back(cp.t);
    out.v.push_back(interpolate_cubic(v, x));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Amplitude a0 at the origin
// ---------------------------------------------------------------------------

// a0 = vhat0(0)
//      + (2 pi)^{-1/2} ( 1/2 int alpha v0^2 - int alpha |v0|^2 - 1/6 int alpha vbar0^2 )
//      + (2 pi)^{-1/2} ( int_0^inf e^{+is} J1 - int_0^inf e^{-is} J2
//                        - 1/3 int_0^inf e^{-3is} conj(J1) ) ds,
// where J1 = int alpha q p dx, J2 = int alpha d/ds|p|^2 dx with p = e^{-is} v
// and q = dp/ds, both recorded densely during the run.
struct AmplitudeA0 {
  complexd value{};
  double t_int = 0.0;          // truncation time of the s-integrals
  double tail_estimate = 0.0;  // bound on the dropped tails
  bool unreliable = false;     // tail exceeds 20% of |value|
  // vhat0(0), the three data integrals, the three time integrals
  // (prefactors included so that value = sum of parts).
  std::array<complexd, 7> parts{};
};

inline AmplitudeA0 compute_a0(const Trajectory& traj) {
  if (traj.a0_j1.empty())
    throw config_error("compute_a0: trajectory was run without a0 integrand recording");
  const Field& alpha = traj.config.alpha;
  const Field& v0 = traj.config.v0;
  const Grid& g = traj.config.grid;
  const double inv_s2pi = 1.0 / std::sqrt(2.0 * M_PI);

  AmplitudeA0 out;
  out.parts[0] = ft_at(v0, 0.0);

  complexd ia = 0.0, ib = 0.0, ic = 0.0;
  for (int j = 0; j < g.n_points; ++j) {
    const double a = alpha.values[j].real();
    const complexd z = v0.values[j];
    ia += a * z * z;
    ib += a * std::norm(z);
    ic += a * std::conj(z) * std::conj(z);
  }
  out.parts[1] = inv_s2pi * 0.5 * ia * g.dx();
  out.parts[2] = -inv_s2pi * ib * g.dx();
  out.parts[3] = -inv_s2pi / 6.0 * ic * g.dx();

  const double t_end = traj.times.back();
  out.t_int = 0.8 * t_end;
  size_t last = 0;
  while (last + 1 < traj.times.size() && traj.times[last + 1] <= out.t_int) ++last;
  out.t_int = traj.times[last];

  complexd t1 = 0.0, t2 = 0.0, t3 = 0.0;
  for (size_t i = 0; i + 1 <= last; ++i) {
    const double dt = traj.times[i + 1] - traj.times[i];
    auto term = [&](size_t idx, double omega, bool conj_j1) {
      const complexd jv = conj_j1 ? std::conj(traj.a0_j1[idx]) : traj.a0_j1[idx];
      return std::polar(1.0, omega * traj.times[idx]) * jv;
    };
    t1 += 0.5 * dt * (term(i, +1.0, false) + term(i + 1, +1.0, false));
    t3 += 0.5 * dt * (term(i, -3.0, true) + term(i + 1, -3.0, true));
    t2 += 0.5 * dt *
          (std::polar(1.0, -traj.times[i]) * traj.a0_j2[i] +
           std::polar(1.0, -traj.times[i + 1]) * traj.a0_j2[i + 1]);
  }
  out.parts[4] = inv_s2pi * t1;
  out.parts[5] = -inv_s2pi * t2;
  out.parts[6] = -inv_s2pi / 3.0 * t3;

  out.value = 0.0;
  for (const complexd& p : out.parts) out.value += p;

  // The integrands decay like s^{-3/2}; fit the constant over the last decade
  // and bound each dropped tail by 2 C T_int^{-1/2}.
  double c1 = 0.0, c2 = 0.0;
  int count = 0;
  for (size_t i = 0; i <= last; ++i) {
    if (traj.times[i] < out.t_int / 10.0) continue;
    const double s32 = std::pow(std::max(traj.times[i], 1e-12), 1.5);
    c1 += std::abs(traj.a0_j1[i]) * s32;
    c2 += std::abs(traj.a0_j2[i]) * s32;
    ++count;
  }
  if (count > 0 && out.t_int > 0.0) {
    c1 /= count;
    c2 /= count;
    out.tail_estimate = inv_s2pi * 2.0 / std::sqrt(out.t_int) * (c1 + c2 + c1 / 3.0);
  }
  out.unreliable = out.tail_estimate > 0.2 * std::abs(out.value);
  return out;
}

// Pointwise error of v(t,0) against t^{-1/2} e^{i pi/4} e^{it} a0.
struct OriginCheck {
  std::vector<double> t;
  std::vector<double> error;
  double fitted_exponent = 0.0;  // of the error series over [T/16, T/2]
};

inline OriginCheck check_origin(const Trajectory& traj, complexd a0) {
  OriginCheck out;
  for (size_t i = 0; i < traj.times.size(); ++i) {
    const double t = traj.times[i];
    if (t < 1.0) continue;
    const complexd model = std::polar(1.0, M_PI / 4.0 + t) / std::sqrt(t) * a0;
    out.t.push_back(t);
    out.error.push_back(std::abs(traj.origin[i] - model));
  }
  const double t_end = traj.times.back();
  try {
    std::vector<double> ts, ys;
    for (size_t i = 0; i < out.t.size(); ++i)
      if (out.t[i] >= t_end / 16.0 && out.t[i] <= t_end / 2.0 && out.error[i] > 0.0) {
        ts.push_back(out.t[i]);
        ys.push_back(out.error[i]);
      }
    out.fitted_exponent = fit_power_law(ts, ys).exponent;
  } catch (const config_error&) {
    // An identically vanishing error series leaves no exponent to fit.
    out.fitted_exponent = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

// ---------------------------------------------------------------------------
// v_mod: oscillatory-integral quadrature, ray formula, limit profiles
// ---------------------------------------------------------------------------

namespace detail {

// Pruned spectral data for (e^{i tau <nabla>} <nabla>^{-1} alpha)(x).
struct vmod_data {
  std::vector<double> xi, br;
  std::vector<complexd> c;  // <xi>^{-1} alphahat(xi) dxi / sqrt(2 pi)

  explicit vmod_data(const Field& alpha) {
    const Spectrum ahat = to_spectrum(alpha);
    const Grid& g = alpha.grid;
    const double cut = 1e-18 * max_abs(ahat);
    const double scale = g.dxi() / std::sqrt(2.0 * M_PI);
    for (int k = 0; k < g.n_points; ++k) {
      if (std::abs(ahat.coeffs[k]) <= cut) continue;
      const double f = g.freq(k);
      xi.push_back(f);
      br.push_back(bracket(f));
      c.push_back(scale * ahat.coeffs[k] / bracket(f));
    }
  }

  complexd propagator_at(double tau, double x) const {
    complexd acc = 0.0;
    for (size_t k = 0; k < xi.size(); ++k) acc += c[k] * std::polar(1.0, tau * br[k] + x * xi[k]);
    return acc;
  }
};

// Composite quadrature nodes on [1, t]: step <= min(0.2, s/50), and <= 0.05
// within 5 of the upper endpoint; `refine` scales all steps for Richardson.
inline std::vector<double> vmod_nodes(double t, double refine) {
  std::vector<double> nodes{1.0};
  double s = 1.0;
  while (s < t) {
    double h = std::min(0.2, s / 50.0);
    if (t - s <= 5.0) h = std::min(h, 0.05);
    h = std::max(h * refine, 1e-6);
    s = std::min(s + h, t);
    nodes.push_back(s);
  }
  return nodes;
}

}  // namespace detail

// v_mod(t,x) = (a0^2/2) int_1^t (e^{i(t-s)<nabla>} <nabla>^{-1} alpha)(x) e^{2is}/s ds
inline complexd vmod_quadrature(complexd a0, const Coefficient& alpha, double t, double x,
                                double refine = 1.0) {
  if (t <= 1.0) return 0.0;
  const detail::vmod_data data(alpha.values);
  const std::vector<double> nodes = detail::vmod_nodes(t, refine);
  auto f = [&](double s) {
    return data.propagator_at(t - s, x) * std::polar(1.0, 2.0 * s) / s;
  };
  complexd acc = 0.0;
  complexd prev = f(nodes[0]);
  for (size_t i = 1; i < nodes.size(); ++i) {
    const complexd cur = f(nodes[i]);
    acc += 0.5 * (nodes[i] - nodes[i - 1]) * (prev + cur);
    prev = cur;
  }
  return 0.5 * a0 * a0 * acc;
}

// Leading ray asymptotics: v_mod(t, +-(sqrt3/2) t) =
//   (a0^2/sqrt 8) e^{i pi/4} e^{it/2} alphahat(-+sqrt 3) log(t)/sqrt(t).
inline complexd vmod_ray_formula(complexd a0, const Coefficient& alpha, double t, int ray_sign) {
  if (!(t > 1.0)) throw config_error("vmod_ray_formula: need t > 1");
  if (ray_sign != 1 && ray_sign != -1) throw config_error("vmod_ray_formula: ray_sign must be +-1");
  const complexd ahat = ray_sign > 0 ? alpha.r_minus : alpha.r_plus;
  return a0 * a0 / std::sqrt(8.0) * std::polar(1.0, M_PI / 4.0 + 0.5 * t) * ahat * std::log(t) /
         std::sqrt(t);
}

// Scaled off-ray modulus |v_mod(t, ct)| sqrt(t); bounded in t away from the
// resonant speeds.
inline double vmod_off_ray_bound(complexd a0, const Coefficient& alpha, double t, double speed,
                                 double delta) {
  const double s = std::sqrt(3.0) / 2.0;
  if (std::abs(speed - s) < delta || std::abs(speed + s) < delta)
    throw config_error("vmod_off_ray_bound: speed is within delta of a resonant ray");
  return std::abs(vmod_quadrature(a0, alpha, t, speed * t)) * std::sqrt(t);
}

// ---------------------------------------------------------------------------
// Limit profiles
// ---------------------------------------------------------------------------

struct LimitProfile {
  std::vector<double> freqs;     // ascending lattice frequencies
  std::vector<complexd> values;  // <xi>^{3/2} (profile)(last checkpoint)
  std::vector<std::pair<double, double>> cauchy;  // (t, sup-difference to ~2t)
};

namespace detail {

// Pairs of checkpoint indices (i, j) with t_j ~ 2 t_i, t_i >= 2.
inline std::vector<std::pair<size_t, size_t>> dyadic_pairs(const std::vector<Checkpoint>& cps) {
  std::vector<std::pair<size_t, size_t>> pairs;
  for (size_t i = 0; i < cps.size(); ++i) {
    if (cps[i].t < 2.0) continue;
    for (size_t j = i + 1; j < cps.size(); ++j) {
      const double r = cps[j].t / cps[i].t;
      if (std::abs(r - 2.0) < 0.06) {
        pairs.emplace_back(i, j);
        break;
      }
      if (r > 2.1) break;
    }
  }
  return pairs;
}

inline std::vector<int> ascending_bins(const Grid& g) {
  std::vector<int> bins(g.n_points);
  for (int i = 0; i < g.n_points; ++i) bins[i] = (g.n_points / 2 + i) % g.n_points;
  return bins;
}

}  // namespace detail

// Limit profile of v_free = v - v_mod in the resonant case:
// P(t,xi) = <xi>^{3/2} (fhat(t,xi) - (a0^2/2) <xi>^{-1} alphahat(xi) E(t,xi)),
// E(t,xi) = int_1^t e^{is(2-<xi>)} / s ds.
inline LimitProfile extract_V(const Trajectory& traj, complexd a0, const Coefficient& alpha) {
  const Grid& g = traj.config.grid;
  require_same_grid(g, alpha.values.grid, "extract_V");
  const Spectrum ahat = to_spectrum(alpha.values);
  const int n = g.n_points;

  // Cumulative E(t, xi) on the lattice across checkpoint times.
  std::vector<complexd> e_acc(n, 0.0);
  std::vector<std::vector<complexd>> profiles;  // P rows per checkpoint
  double s_pos = 1.0;
  for (const Checkpoint& cp : traj.checkpoints) {
    if (cp.t > s_pos) {
      const std::vector<double> nodes = [&] {
        std::vector<double> ns{s_pos};
        double s = s_pos;
        while (s < cp.t) {
          const double h = std::min(0.2, std::max(s / 50.0, 0.02));
          s = std::min(s + h, cp.t);
          ns.push_back(s);
        }
        return ns;
      }();
      for (int k = 0; k < n; ++k) {
        const double w = 2.0 - bracket(g.freq(k));
        complexd acc = 0.0;
        complexd prev = std::polar(1.0, nodes[0] * w) / nodes[0];
        for (size_t i = 1; i < nodes.size(); ++i) {
          const complexd cur = std::polar(1.0, nodes[i] * w) / nodes[i];
          acc += 0.5 * (nodes[i] - nodes[i - 1]) * (prev + cur);
          prev = cur;
        }
        e_acc[k] += acc;
      }
      s_pos = cp.t;
    }
    std::vector<complexd> row(n);
    for (int k = 0; k < n; ++k) {
      const double b = bracket(g.freq(k));
      complexd ghat = cp.profile.coeffs[k];
      if (cp.t >= 1.0) ghat -= 0.5 * a0 * a0 / b * ahat.coeffs[k] * e_acc[k];
      row[k] = std::pow(b, 1.5) * ghat;
    }
    profiles.push_back(std::move(row));
  }

  LimitProfile out;
  const std::vector<int> order = detail::ascending_bins(g);
  out.freqs.reserve(n);
  out.values.reserve(n);
  for (int bin : order) {
    out.freqs.push_back(g.freq(bin));
    out.values.push_back(profiles.back()[bin]);
  }
  for (auto [i, j] : detail::dyadic_pairs(traj.checkpoints)) {
    double d = 0.0;
    for (int k = 0; k < n; ++k) d = std::max(d, std::abs(profiles[j][k] - profiles[i][k]));
    out.cauchy.emplace_back(traj.checkpoints[i].t, d);
  }
  return out;
}

// Cumulative integrating-factor phase at a recorded probe frequency:
// B(t) = (3 beta0/2) <xi>^{-1} int_1^t |<xi>^{3/2} fhat(s,xi)|^2 / s ds.
inline std::vector<std::pair<double, double>> integrating_phase_B(const Trajectory& traj, double beta0,
                                                                  double xi) {
  size_t probe = traj.probe_freqs.size();
  for (size_t p = 0; p < traj.probe_freqs.size(); ++p)
    if (std::abs(traj.probe_freqs[p] - xi) <= 0.51 * traj.config.grid.dxi()) {
      probe = p;
      break;
    }
  if (probe == traj.probe_freqs.size())
    throw config_error("integrating_phase_B: frequency " + std::to_string(xi) +
                       " was not recorded as a probe");
  const double b = bracket(traj.probe_freqs[probe]);
  const double pref = 1.5 * beta0 / b;
  const double w3 = std::pow(b, 3.0);
  std::vector<std::pair<double, double>> out;
  double acc = 0.0;
  double prev_t = 0.0, prev_int = 0.0;
  bool started = false;
  for (size_t i = 0; i < traj.times.size(); ++i) {
    const double t = traj.times[i];
    if (t < 1.0) continue;
    const double integrand = w3 * std::norm(traj.probe_series[probe][i]) / t;
    if (started) acc += 0.5 * (t - prev_t) * (integrand + prev_int);
    started = true;
    prev_t = t;
    prev_int = integrand;
    out.emplace_back(t, pref * acc);
  }
  return out;
}

// Final state of the non-resonant dynamics: W(xi) = lim <xi>^{3/2} fhat e^{iB}.
inline LimitProfile extract_W(const Trajectory& traj, double beta0) {
  const Grid& g = traj.config.grid;
  const int n = g.n_points;
  std::vector<std::vector<complexd>> corrected;
  std::vector<double> b_acc(n, 0.0);
  double prev_t = 0.0;
  std::vector<double> prev_int(n, 0.0);
  bool started = false;
  for (const Checkpoint& cp : traj.checkpoints) {
    if (cp.t >= 1.0) {
      std::vector<double> cur(n);
      for (int k = 0; k < n; ++k) {
        const double b = bracket(g.freq(k));
        cur[k] = std::pow(b, 3.0) * std::norm(cp.profile.coeffs[k]) / cp.t;
      }
      if (started)
        for (int k = 0; k < n; ++k) b_acc[k] += 0.5 * (cp.t - prev_t) * (cur[k] + prev_int[k]);
      started = true;
      prev_t = cp.t;
      prev_int = std::move(cur);
    }
    std::vector<complexd> row(n);
    for (int k = 0; k < n; ++k) {
      const double b = bracket(g.freq(k));
      row[k] = std::pow(b, 1.5) * cp.profile.coeffs[k] * std::polar(1.0, 1.5 * beta0 / b * b_acc[k]);
    }
    corrected.push_back(std::move(row));
  }

  LimitProfile out;
  const std::vector<int> order = detail::ascending_bins(g);
  for (int bin : order) {
    out.freqs.push_back(g.freq(bin));
    out.values.push_back(corrected.back()[bin]);
  }
  for (auto [i, j] : detail::dyadic_pairs(traj.checkpoints)) {
    double d = 0.0;
    for (int k = 0; k < n; ++k) d = std::max(d, std::abs(corrected[j][k] - corrected[i][k]));
    out.cauchy.emplace_back(traj.checkpoints[i].t, d);
  }
  return out;
}

// Pointwise prediction from the final state,
//   v(t,x) ~ t^{-1/2} e^{i pi/4} e^{i rho}
//            e^{-i (3 beta0/2) <xs>^{-1} |W(xs)|^2 log t} W(xs),  xs = -x/rho.
inline complexd predict_pointwise(const LimitProfile& w, double beta0, double t, double x) {
  if (std::abs(x) >= t) return 0.0;
  const double rho = std::sqrt(t * t - x * x);
  const double xs = -x / rho;
  if (w.freqs.empty() || xs < w.freqs.front() || xs > w.freqs.back()) return 0.0;
  const auto it = std::lower_bound(w.freqs.begin(), w.freqs.end(), xs);
  size_t hi = static_cast<size_t>(it - w.freqs.begin());
  if (hi == 0) hi = 1;
  if (hi >= w.freqs.size()) hi = w.freqs.size() - 1;
  const size_t lo = hi - 1;
  const double lam = (xs - w.freqs[lo]) / (w.freqs[hi] - w.freqs[lo]);
  const complexd wv = (1.0 - lam) * w.values[lo] + lam * w.values[hi];
  const double bb = bracket(xs);
  const double phase_corr = -1.5 * beta0 / bb * std::norm(wv) * std::log(t);
  return std::polar(1.0, M_PI / 4.0 + rho + phase_corr) / std::sqrt(t) * wv;
}

}  // namespace kglab
