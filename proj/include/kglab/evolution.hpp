#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "kglab/coefficients.hpp"
#include "kglab/field.hpp"
#include "kglab/interpolation.hpp"
#include "kglab/multipliers.hpp"
#include "kglab/operators.hpp"

namespace kglab {

// Largest |x| carrying more than 1e-10 of the peak modulus.
inline double support_radius(const Field& f) {
  const double m = sup_norm(f);
  if (m == 0.0) return 0.0;
  double r = 0.0;
  for (int j = 0; j < f.grid.n_points; ++j)
    if (std::abs(f.values[j]) > 1e-10 * m) r = std::max(r, std::abs(f.grid.node(j)));
  return r;
}

struct SimConfig {
  Grid grid;
  Field alpha;   // real quadratic coefficient samples
  Field beta;    // real cubic coefficient samples
  double beta0 = 0.0;
  Field v0;      // initial profile, complex
  double epsilon = 0.0;  // data amplitude, recorded for reports
  double t_end = 100.0;
  double dt = 0.05;
  bool dealias = true;
  double checkpoint_log2_ratio = 0.25;  // geometric schedule 2^(1/4) from t = 1
  std::vector<double> ray_speeds;       // x = c t sample rays
  std::vector<double> profile_probes;   // xi values recorded densely (snapped to lattice)
  bool record_a0_integrands = true;
};

// Default rays: the two resonant rays and two control speeds.
inline std::vector<double> default_ray_speeds() {
  const double s = std::sqrt(3.0) / 2.0;
  return {s, -s, 0.6, 0.95 * s};
}

inline SimConfig make_sim_config(const Grid& g, Field alpha, Field beta, double beta0, Field v0,
                                 double epsilon, double t_end, double dt = 0.05) {
  SimConfig cfg;
  cfg.grid = g;
  cfg.alpha = std::move(alpha);
  cfg.beta = std::move(beta);
  cfg.beta0 = beta0;
  cfg.v0 = std::move(v0);
  cfg.epsilon = epsilon;
  cfg.t_end = t_end;
  cfg.dt = dt;
  cfg.ray_speeds = default_ray_speeds();
  return cfg;
}

inline void validate(const SimConfig& cfg) {
  require_same_grid(cfg.grid, cfg.alpha.grid, "SimConfig alpha");
  require_same_grid(cfg.grid, cfg.beta.grid, "SimConfig beta");
  require_same_grid(cfg.grid, cfg.v0.grid, "SimConfig v0");
  if (!(cfg.dt > 0.0) || cfg.dt > 0.1)
    throw config_error("SimConfig: dt must lie in (0, 0.1], got " + std::to_string(cfg.dt));
  if (cfg.epsilon > 0.5) throw config_error("SimConfig: epsilon must be <= 0.5");
  if (!(cfg.t_end > 0.0)) throw config_error("SimConfig: t_end must be positive");
  const double budget = cfg.grid.half_length - support_radius(cfg.v0) - 10.0;
  if (cfg.t_end > budget)
    throw config_error("SimConfig: t_end " + std::to_string(cfg.t_end) +
                       " exceeds the wrap-around budget L - support - 10 = " + std::to_string(budget));
  for (double c : cfg.ray_speeds)
    if (std::abs(c) >= 1.0) throw config_error("SimConfig: ray speeds must satisfy |c| < 1");
}

// State in the interaction picture: the profile f = e^{-it<nabla>} v.
struct SimState {
  double t = 0.0;
  Spectrum profile;
};

// v0 = (u0 - i <nabla>^{-1} u1) / 2 turns (u0, u1) into first-order data.
inline Field make_initial_data(const Field& u0, const Field& u1) {
  require_same_grid(u0.grid, u1.grid, "make_initial_data");
  if (!effectively_real(u0) || !effectively_real(u1))
    throw config_error("make_initial_data: (u0, u1) must be real");
  const Field h = from_spectrum(apply_multiplier(to_spectrum(u1), Symbol::bracket_power(-1.0)));
  Field v0 = u0;
  for (size_t j = 0; j < v0.values.size(); ++j)
    v0.values[j] = 0.5 * (u0.values[j] - complexd(0.0, 1.0) * h.values[j]);
  return v0;
}

inline Field reconstruct_u(const Field& v) {
  Field u = v;
  for (auto& z : u.values) z = 2.0 * z.real();
  return u;
}

inline Field reconstruct_u_t(const Field& v) {
  // u_t = -2 <nabla> Im v.
  Field im = v;
  for (auto& z : im.values) z = z.imag();
  Field out = from_spectrum(apply_multiplier(to_spectrum(im), Symbol::bracket_power(1.0)));
  for (auto& z : out.values) z *= -2.0;
  return out;
}

namespace detail {

// Per-run caches: bracket values, dealias mask, and the half-step phase
// rotators that advance e^{it<xi>} without per-stage sincos calls.  The phase
// array is keyed by step index and resynchronized against exact sincos every
// 256 steps to keep the rotation recurrence from accumulating roundoff.
struct evolution_workspace {
  double dt;
  std::vector<double> brackets;
  std::vector<char> keep;              // dealias mask (1 = keep)
  std::vector<complexd> phase;         // e^{i t <xi_k>} at the held time
  std::vector<complexd> half_rotator;  // e^{i (dt/2) <xi_k>}
  long phase_step = -1;
  double phase_time = 0.0;
  int steps_since_resync = 0;

  evolution_workspace(const Grid& g, double dt_, bool dealias_on) : dt(dt_) {
    const int n = g.n_points;
    brackets.resize(n);
    keep.assign(n, 1);
    phase.resize(n);
    half_rotator.resize(n);
    for (int k = 0; k < n; ++k) {
      brackets[k] = bracket(g.freq(k));
      if (dealias_on && std::abs(g.signed_index(k)) > n / 3) keep[k] = 0;
      phase[k] = 1.0;
      half_rotator[k] = std::polar(1.0, 0.5 * dt * brackets[k]);
    }
  }

  void seek_step(long idx) {
    if (idx == phase_step && steps_since_resync < 256) return;
    seek_time(idx * dt);
    phase_step = idx;
  }

  void seek_time(double t) {
    for (size_t k = 0; k < phase.size(); ++k) phase[k] = std::polar(1.0, t * brackets[k]);
    phase_time = t;
    steps_since_resync = 0;
  }

  void advance_full_step() {
    for (size_t k = 0; k < phase.size(); ++k) {
      const complexd r = half_rotator[k];
      phase[k] *= r * r;
    }
    ++phase_step;
    ++steps_since_resync;
  }
};

}  // namespace detail

struct StageEval {
  Field v;          // physical solution (dealiased when the flag is on)
  Spectrum v_hat;   // its spectrum e^{it<xi>} fhat
  Spectrum n_hat;   // spectrum of (1/2i) <nabla>^{-1} (alpha u^2 + beta0 u^3 + beta u^3)
};

namespace detail {

// Profile derivative G(t, fhat) = e^{-it<xi>} n_hat; `phases` holds
// e^{i stage_t <xi_k>}.  Returns the stage ingredients so that recorders can
// reuse the physical-space solution.
inline StageEval eval_rhs_impl(const SimConfig& cfg, const std::vector<complexd>& fhat,
                               const std::vector<complexd>& phases, const evolution_workspace& ws,
                               std::vector<complexd>* g_out) {
  const Grid& grid = cfg.grid;
  const int n = grid.n_points;
  StageEval ev{make_field(grid), make_spectrum(grid), make_spectrum(grid)};
  for (int k = 0; k < n; ++k) {
    complexd c = phases[k] * fhat[k];
    if (!ws.keep[k]) c = 0.0;
    ev.v_hat.coeffs[k] = c;
  }
  ev.v = from_spectrum(ev.v_hat);
  double sup = 0.0;
  Field w = make_field(grid);
  for (int j = 0; j < n; ++j) {
    const complexd vj = ev.v.values[j];
    sup = std::max(sup, std::abs(vj));
    const double u = 2.0 * vj.real();
    const double u2 = u * u;
    w.values[j] = cfg.alpha.values[j].real() * u2 + (cfg.beta0 + cfg.beta.values[j].real()) * u2 * u;
  }
  if (sup > 1e3)
    throw numerical_guard_error("evolution: sup-norm exceeded 1e3, likely blow-up");
  ev.n_hat = to_spectrum(w);
  for (int k = 0; k < n; ++k) {
    complexd c = ev.n_hat.coeffs[k];
    if (!ws.keep[k]) c = 0.0;
    // (1/2i) <xi>^{-1} = -i / (2 <xi>)
    c *= complexd(0.0, -0.5 / ws.brackets[k]);
    ev.n_hat.coeffs[k] = c;
    if (g_out) (*g_out)[k] = std::conj(phases[k]) * c;
  }
  return ev;
}

inline std::vector<complexd> phases_at(const Grid& g, double t) {
  std::vector<complexd> p(g.n_points);
  for (int k = 0; k < g.n_points; ++k) p[k] = std::polar(1.0, t * bracket(g.freq(k)));
  return p;
}

// Classical RK4 on d/dt fhat = G(t, fhat); the linear flow is exact in this
// picture so only the non-stiff nonlinearity is integrated.  ws.phase must
// already hold e^{i s.t <xi>}.
inline SimState rk4_step_impl(const SimConfig& cfg, const SimState& s, double dt,
                              evolution_workspace& ws, const std::vector<complexd>* k1_pre) {
  const int n = cfg.grid.n_points;
  std::vector<complexd> k1(n), k2(n), k3(n), k4(n), y(n);
  std::vector<complexd> stage_phase(n);

  if (k1_pre) {
    k1 = *k1_pre;
  } else {
    eval_rhs_impl(cfg, s.profile.coeffs, ws.phase, ws, &k1);
  }

  for (int k = 0; k < n; ++k) stage_phase[k] = ws.phase[k] * ws.half_rotator[k];
  for (int k = 0; k < n; ++k) y[k] = s.profile.coeffs[k] + 0.5 * dt * k1[k];
  eval_rhs_impl(cfg, y, stage_phase, ws, &k2);
  for (int k = 0; k < n; ++k) y[k] = s.profile.coeffs[k] + 0.5 * dt * k2[k];
  eval_rhs_impl(cfg, y, stage_phase, ws, &k3);

  for (int k = 0; k < n; ++k) stage_phase[k] *= ws.half_rotator[k];
  for (int k = 0; k < n; ++k) y[k] = s.profile.coeffs[k] + dt * k3[k];
  eval_rhs_impl(cfg, y, stage_phase, ws, &k4);

  SimState out{s.t + dt, Spectrum{cfg.grid, std::vector<complexd>(n)}};
  const double w = dt / 6.0;
  for (int k = 0; k < n; ++k)
    out.profile.coeffs[k] = s.profile.coeffs[k] + w * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
  return out;
}

}  // namespace detail

// Right-hand side spectrum at the current state (public single-shot form).
inline Spectrum nonlinearity(const SimState& s, const SimConfig& cfg) {
  detail::evolution_workspace ws(cfg.grid, cfg.dt, cfg.dealias);
  const auto phases = detail::phases_at(cfg.grid, s.t);
  return detail::eval_rhs_impl(cfg, s.profile.coeffs, phases, ws, nullptr).n_hat;
}

inline SimState step(const SimState& s, double dt, const SimConfig& cfg) {
  if (!(std::abs(dt) > 0.0) || std::abs(dt) > 0.1)
    throw config_error("step: |dt| must lie in (0, 0.1]");
  SimConfig local = cfg;
  local.dt = dt;
  detail::evolution_workspace ws(cfg.grid, dt, cfg.dealias);
  ws.seek_time(s.t);
  return detail::rk4_step_impl(local, s, dt, ws, nullptr);
}

// d/dt (e^{-it} v) computed through the equation (no time differencing):
//   e^{-it} ( i(<nabla>-1) v + (d/dt - i<nabla>) v ).
inline Field phase_filtered_derivative(const SimState& s, const SimConfig& cfg) {
  const Spectrum n_hat = nonlinearity(s, cfg);
  Spectrum combo = make_spectrum(cfg.grid);
  for (int k = 0; k < cfg.grid.n_points; ++k) {
    const double b = bracket(cfg.grid.freq(k));
    const complexd vk = std::polar(1.0, s.t * b) * s.profile.coeffs[k];
    combo.coeffs[k] = complexd(0.0, b - 1.0) * vk + n_hat.coeffs[k];
  }
  Field out = from_spectrum(combo);
  const complexd rot = std::polar(1.0, -s.t);
  for (auto& z : out.values) z *= rot;
  return out;
}

inline double energy(const SimState& s, const SimConfig& cfg) {
  const Field v = from_spectrum(propagate(s.profile, s.t));
  const Field u = reconstruct_u(v);
  const Field ut = reconstruct_u_t(v);
  const Field ux = derivative(u);
  double acc = 0.0;
  for (int j = 0; j < cfg.grid.n_points; ++j) {
    const double uj = u.values[j].real();
    const double u2 = uj * uj;
    acc += 0.5 * (std::norm(ut.values[j]) + std::norm(ux.values[j]) + u2) -
           cfg.alpha.values[j].real() / 3.0 * u2 * uj -
           (cfg.beta0 + cfg.beta.values[j].real()) / 4.0 * u2 * u2;
  }
  return acc * cfg.grid.dx();
}

struct Checkpoint {
  double t = 0.0;
  Spectrum profile;
};

struct Trajectory {
  SimConfig config;

  // Step-cadence series.
  std::vector<double> times;
  std::vector<double> sup_norms;
  std::vector<complexd> origin;                  // v(t, 0)
  std::vector<complexd> dtphase_origin;          // d/dt(e^{-it} v)(t, 0)
  std::vector<complexd> a0_j1;                   // int alpha q p dx, p = e^{-is} v, q = dp/ds
  std::vector<double> a0_j2;                     // int alpha d/ds |p|^2 dx
  std::vector<double> probe_freqs;               // snapped lattice frequencies
  std::vector<std::vector<complexd>> probe_series;  // [probe][step] fhat(t, xi)

  // Checkpoint cadence.
  std::vector<Checkpoint> checkpoints;
  std::vector<double> cp_energy;
  std::vector<double> cp_sup;
  std::vector<double> cp_ld_v;        // ||<x>^-2 v||
  std::vector<double> cp_ld_dxv;      // ||<x>^-2 dx v||
  std::vector<double> cp_ld_dtphase;  // ||<x>^-2 d/dt(e^{-it}v)||
  std::vector<double> cp_bracket_l;   // ||<nabla> L v||
  std::vector<std::vector<complexd>> ray_series;  // [ray][checkpoint] v(t, c t)
  std::vector<char> ray_truncated;                // ray left the resolved region

  const Checkpoint& last_checkpoint() const { return checkpoints.back(); }
};

namespace detail {

inline std::vector<long> checkpoint_steps(const SimConfig& cfg) {
  const long n_steps = std::lround(cfg.t_end / cfg.dt);
  std::vector<long> steps{0};
  const double ratio = std::pow(2.0, cfg.checkpoint_log2_ratio);
  for (double target = 1.0; target < cfg.t_end * (1.0 + 1e-12); target *= ratio) {
    const long s = std::clamp(std::lround(target / cfg.dt), 0L, n_steps);
    if (s != steps.back()) steps.push_back(s);
  }
  if (steps.back() != n_steps) steps.push_back(n_steps);
  return steps;
}

}  // namespace detail

inline Trajectory run(const SimConfig& cfg) {
  validate(cfg);
  const Grid& grid = cfg.grid;
  const int n = grid.n_points;
  const long n_steps = std::lround(cfg.t_end / cfg.dt);

  Trajectory traj;
  traj.config = cfg;
  traj.ray_series.resize(cfg.ray_speeds.size());
  traj.ray_truncated.assign(cfg.ray_speeds.size(), 0);
  for (double xi : cfg.profile_probes) {
    const long k = std::lround(xi / grid.dxi());
    const int bin = k >= 0 ? static_cast<int>(k) : static_cast<int>(k + n);
    traj.probe_freqs.push_back(grid.freq(bin));
    traj.probe_series.emplace_back();
  }

  detail::evolution_workspace ws(grid, cfg.dt, cfg.dealias);
  SimState state{0.0, to_spectrum(cfg.v0)};

  const std::vector<long> cp_steps = detail::checkpoint_steps(cfg);
  size_t cp_next = 0;

  const double e0 = energy(state, cfg);
  std::vector<complexd> k1(n);

  for (long step_idx = 0; step_idx <= n_steps; ++step_idx) {
    const double t = step_idx * cfg.dt;
    state.t = t;  // keep t exactly on the step lattice
    ws.seek_step(step_idx);
    const StageEval ev = detail::eval_rhs_impl(cfg, state.profile.coeffs, ws.phase, ws, &k1);

    // Dense records.
    traj.times.push_back(t);
    traj.sup_norms.push_back(sup_norm(ev.v));
    traj.origin.push_back(ev.v.values[grid.origin_index()]);

    // q' = i(<xi>-1) vhat + n_hat; then q = e^{-it} F^{-1} q'.
    Spectrum qs = make_spectrum(grid);
    for (int k = 0; k < n; ++k)
      qs.coeffs[k] = complexd(0.0, ws.brackets[k] - 1.0) * ev.v_hat.coeffs[k] + ev.n_hat.coeffs[k];
    const Field q = from_spectrum(qs);
    const complexd rot = std::polar(1.0, -t);
    traj.dtphase_origin.push_back(rot * q.values[grid.origin_index()]);
    if (cfg.record_a0_integrands) {
      complexd j1 = 0.0;
      double j2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double a = cfg.alpha.values[j].real();
        j1 += a * q.values[j] * ev.v.values[j];
        j2 += a * 2.0 * (q.values[j] * std::conj(ev.v.values[j])).real();
      }
      traj.a0_j1.push_back(rot * rot * j1 * grid.dx());
      traj.a0_j2.push_back(j2 * grid.dx());
    }
    for (size_t p = 0; p < traj.probe_freqs.size(); ++p) {
      const long k = std::lround(traj.probe_freqs[p] / grid.dxi());
      const int bin = k >= 0 ? static_cast<int>(k) : static_cast<int>(k + n);
      traj.probe_series[p].push_back(state.profile.coeffs[bin]);
    }

    if (cp_next < cp_steps.size() && cp_steps[cp_next] == step_idx) {
      ++cp_next;
      traj.checkpoints.push_back({t, state.profile});
      traj.cp_sup.push_back(traj.sup_norms.back());
      const double e = energy(state, cfg);
      traj.cp_energy.push_back(e);
      if (std::abs(e - e0) > 1e-4 * std::max(std::abs(e0), 1e-12))
        throw numerical_guard_error("run: relative energy drift exceeded 1e-4 at t = " + std::to_string(t));
      traj.cp_ld_v.push_back(weighted_l2_norm(ev.v, 2.0));
      const Field dxv = from_spectrum(apply_multiplier(ev.v_hat, Symbol::derivative()));
      traj.cp_ld_dxv.push_back(weighted_l2_norm(dxv, 2.0));
      Field dtp = q;
      for (auto& z : dtp.values) z *= rot;
      traj.cp_ld_dtphase.push_back(weighted_l2_norm(dtp, 2.0));
      traj.cp_bracket_l.push_back(bracket_l_norm(ev.v, t));
      for (size_t r = 0; r < cfg.ray_speeds.size(); ++r) {
        const double x = cfg.ray_speeds[r] * t;
        if (std::abs(x) > 0.9 * grid.half_length) {
          traj.ray_truncated[r] = 1;
          continue;
        }
        traj.ray_series[r].push_back(interpolate_cubic(ev.v, x));
      }
    }

    if (step_idx < n_steps) {
      state = detail::rk4_step_impl(cfg, state, cfg.dt, ws, &k1);
      ws.advance_full_step();
    }
  }
  return traj;
}

}  // namespace kglab
