#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <mutex>
#include <thread>

#include "kglab/asymptotics.hpp"
#include "kglab/config.hpp"
#include "kglab/io.hpp"
#include "kglab/localdecay.hpp"
#include "kglab/normalform.hpp"
#include "kglab/oscillatory.hpp"
#include "kglab/version.hpp"

namespace kglab {

namespace fs = std::filesystem;

namespace detail {

inline json report_header(const ExperimentConfig& cfg) {
  json j;
  j["version"] = version_string;
  j["config"] = echo_config(cfg);
  return j;
}

inline json decay_fit_to_json(const DecayFit& f) {
  json j;
  j["model"] = f.model == DecayModel::power ? "power" : "logpower";
  j["amplitude"] = f.amplitude;
  j["exponent"] = f.exponent;
  j["log_coeff"] = f.log_coeff;
  j["window"] = {f.t1, f.t2};
  j["n_samples"] = f.n_samples;
  j["rms_log_residual"] = f.rms_log_residual;
  return j;
}

inline std::vector<double> moduli(const std::vector<complexd>& v) {
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& z : v) out.push_back(std::abs(z));
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

inline Trajectory cmd_simulate(const ExperimentConfig& cfg, const fs::path& out) {
  fs::create_directories(out);
  write_json(out / "config.json", detail::report_header(cfg));
  MaterializedExperiment m = materialize(cfg);
  Trajectory traj = run(m.sim);
  write_trajectory(out, traj);
  return traj;
}

// ---------------------------------------------------------------------------
// resonant: the Theorem-1.1 pipeline
// ---------------------------------------------------------------------------

inline json cmd_resonant(const ExperimentConfig& cfg, const fs::path& out) {
  fs::create_directories(out);
  json report = detail::report_header(cfg);
  MaterializedExperiment m = materialize(cfg);
  write_json(out / "config.json", detail::report_header(cfg));

  report["alpha"] = {{"r_plus", complex_to_json(m.alpha.r_plus)},
                     {"r_minus", complex_to_json(m.alpha.r_minus)},
                     {"resonant", m.alpha.resonant}};

  const Trajectory traj = run(m.sim);
  write_trajectory(out, traj);

  const AmplitudeA0 a0 = compute_a0(traj);
  json a0j;
  a0j["value"] = complex_to_json(a0.value);
  a0j["abs"] = std::abs(a0.value);
  a0j["t_int"] = a0.t_int;
  a0j["tail_estimate"] = a0.tail_estimate;
  a0j["unreliable"] = a0.unreliable;
  a0j["parts"] = json::array();
  for (const auto& p : a0.parts) a0j["parts"].push_back(complex_to_json(p));

  // Cross-validation against the origin-series fit.
  complexd a0_fit = 0.0;
  int count = 0;
  for (size_t i = 0; i < traj.times.size(); ++i) {
    const double t = traj.times[i];
    if (t < cfg.fit_lo() || t > cfg.fit_hi()) continue;
    a0_fit += traj.origin[i] * std::sqrt(t) * std::polar(1.0, -(M_PI / 4.0 + t));
    ++count;
  }
  if (count > 0) a0_fit /= double(count);
  a0j["fit_value"] = complex_to_json(a0_fit);
  a0j["fit_abs"] = std::abs(a0_fit);
  a0j["relative_disagreement"] =
      std::abs(a0.value) > 0.0 ? std::abs(a0_fit - a0.value) / std::abs(a0.value) : 0.0;
  report["a0"] = a0j;

  const OriginCheck oc = check_origin(traj, a0.value);
  report["origin_error_exponent"] = oc.fitted_exponent;

  // Ray fits: both models on every recorded ray.
  json rays = json::array();
  const double s3h = std::sqrt(3.0) / 2.0;
  for (double c : cfg.rays) {
    const RaySamples r = sample_ray(traj, c);
    json jr;
    jr["speed"] = c;
    jr["truncated"] = r.truncated;
    jr["resonant_ray"] = std::abs(std::abs(c) - s3h) < 1e-9;
    try {
      const DecayFit pw = fit_decay(r.t, detail::moduli(r.v), DecayModel::power, cfg.fit_lo(), cfg.fit_hi());
      const DecayFit lp = fit_decay(r.t, detail::moduli(r.v), DecayModel::logpower, cfg.fit_lo(), cfg.fit_hi());
      jr["power"] = detail::decay_fit_to_json(pw);
      jr["logpower"] = detail::decay_fit_to_json(lp);
      jr["residual_ratio_power_over_logpower"] =
          lp.rms_log_residual > 0.0 ? pw.rms_log_residual / lp.rms_log_residual : 0.0;
    } catch (const config_error& e) {
      jr["fit_error"] = e.what();
    }
    rays.push_back(jr);
  }
  report["rays"] = rays;
  {
    std::vector<std::string> header{"t"};
    std::vector<RaySamples> samples;
    for (double c : cfg.rays) {
      samples.push_back(sample_ray(traj, c));
      header.push_back("abs_c_" + format_double(c));
    }
    CsvWriter csv(out / "rays.csv", header);
    for (size_t i = 0; i < traj.checkpoints.size(); ++i) {
      std::vector<double> row{traj.checkpoints[i].t};
      bool complete = true;
      for (const auto& s : samples) {
        if (i >= s.t.size()) complete = false;
        else row.push_back(std::abs(s.v[i]));
      }
      if (complete) csv.row(row);
    }
  }

  // v_mod: quadrature vs. closed-form ray asymptotics, and off-ray bounds.
  json vmod;
  {
    json table = json::array();
    CsvWriter csv(out / "vmod_compare.csv",
                  {"t", "quad_re", "quad_im", "formula_re", "formula_im", "abs_ratio"});
    for (double t : {cfg.t_end / 16.0, cfg.t_end / 8.0, cfg.t_end / 4.0, cfg.t_end / 2.0, cfg.t_end}) {
      if (t <= 2.0) continue;
      const double x = s3h * t;
      if (x > 0.9 * cfg.half_length) continue;
      const complexd q = vmod_quadrature(a0.value, m.alpha, t, x);
      const complexd f = vmod_ray_formula(a0.value, m.alpha, t, +1);
      const double ratio = std::abs(f) > 0.0 ? std::abs(q) / std::abs(f) : 0.0;
      table.push_back({{"t", t},
                       {"quadrature", complex_to_json(q)},
                       {"formula", complex_to_json(f)},
                       {"abs_ratio", ratio}});
      csv.row({t, q.real(), q.imag(), f.real(), f.imag(), ratio});
    }
    vmod["ray_comparison"] = table;

    json off = json::array();
    for (double c : {0.5, 0.99}) {
      json jc;
      jc["speed"] = c;
      json vals = json::array();
      double vmax = 0.0, vmin = 1e300;
      for (double t : geometric_times(10.0, std::min(cfg.t_end, 0.9 * cfg.half_length / c), 7)) {
        const double v = vmod_off_ray_bound(a0.value, m.alpha, t, c, 0.04);
        vals.push_back({{"t", t}, {"scaled_modulus", v}});
        vmax = std::max(vmax, v);
        vmin = std::min(vmin, v);
      }
      jc["series"] = vals;
      jc["max_over_min"] = vmin > 0.0 ? vmax / vmin : 0.0;
      off.push_back(jc);
    }
    vmod["off_ray"] = off;
  }
  report["vmod"] = vmod;

  const LimitProfile vp = extract_V(traj, a0.value, m.alpha);
  {
    CsvWriter csv(out / "profile_V.csv", {"xi", "re", "im"});
    for (size_t i = 0; i < vp.freqs.size(); ++i)
      if (std::abs(vp.freqs[i]) <= 12.0) csv.row({vp.freqs[i], vp.values[i].real(), vp.values[i].imag()});
    json cauchy = json::array();
    for (auto [t, d] : vp.cauchy) cauchy.push_back({{"t", t}, {"sup_difference", d}});
    report["profile_V_cauchy"] = cauchy;
    double sup = 0.0;
    for (const auto& v : vp.values) sup = std::max(sup, std::abs(v));
    report["profile_V_sup"] = sup;
  }

  write_gnuplot(out / "ray_fit.plt",
                "set logscale xy\nset xlabel 't'\nset ylabel '|v(t, c t)|'\n"
                "plot 'rays.csv' using 1:2 with lines title 'resonant ray', \\\n"
                "     'rays.csv' using 1:4 with lines title 'control ray'\n");
  write_gnuplot(out / "vmod_compare.plt",
                "set logscale x\nset xlabel 't'\nset ylabel 'ratio'\n"
                "plot 'vmod_compare.csv' using 1:6 with linespoints title 'quadrature/formula'\n");
  write_json(out / "asymptotics_report.json", report);
  return report;
}

// ---------------------------------------------------------------------------
// nonresonant: the Theorem-1.2 pipeline
// ---------------------------------------------------------------------------

inline json cmd_nonresonant(const ExperimentConfig& cfg_in, const fs::path& out) {
  fs::create_directories(out);
  ExperimentConfig cfg = cfg_in;
  cfg.deresonate_alpha = true;
  json report = detail::report_header(cfg);
  MaterializedExperiment m = materialize(cfg);
  write_json(out / "config.json", detail::report_header(cfg));

  report["alpha"] = {{"r_plus", complex_to_json(m.alpha.r_plus)},
                     {"r_minus", complex_to_json(m.alpha.r_minus)},
                     {"resonant", m.alpha.resonant},
                     {"deresonate_c1", m.deresonate_c1},
                     {"deresonate_c2", m.deresonate_c2}};

  const NormalFormCoeffs nf = normal_form_coefficients(m.alpha);
  const Trajectory traj = run(m.sim);
  write_trajectory(out, traj);

  // Normal-form identity on the stored checkpoints.
  const ResidualReport rr = residual_check(traj, nf, m.sim.alpha, m.sim.beta, m.sim.beta0);
  {
    json nj;
    nj["max_residual"] = rr.max_residual;
    nj["max_state_l2"] = rr.max_state_l2;
    nj["relative"] = rr.max_state_l2 > 0.0 ? rr.max_residual / rr.max_state_l2 : 0.0;
    json per = json::array();
    for (size_t i = 0; i < rr.times.size(); ++i)
      per.push_back({{"t", rr.times[i]}, {"residual", rr.residuals[i]}});
    nj["per_checkpoint"] = per;
    nj["guard"] = {{"band_modes", nf.guard.band_modes},
                   {"max_band_value", nf.guard.max_band_value},
                   {"edge_value", nf.guard.edge_value}};
    write_json(out / "normalform.json", nj);
    report["normal_form"] = nj;
  }

  // Sup-norm decay.
  const DecayFit sup_fit =
      fit_decay(traj.times, traj.sup_norms, DecayModel::power, cfg.fit_lo(), cfg.fit_hi());
  report["sup_norm_power_fit"] = detail::decay_fit_to_json(sup_fit);

  // Integrating factor phase and the final state.
  const LimitProfile w = extract_W(traj, cfg.beta0);
  const LimitProfile uncorrected = extract_W(traj, 0.0);
  {
    CsvWriter csv(out / "profile_W.csv", {"xi", "re", "im"});
    for (size_t i = 0; i < w.freqs.size(); ++i)
      if (std::abs(w.freqs[i]) <= 12.0) csv.row({w.freqs[i], w.values[i].real(), w.values[i].imag()});
    json cj = json::array();
    for (size_t i = 0; i < w.cauchy.size(); ++i)
      cj.push_back({{"t", w.cauchy[i].first},
                    {"corrected", w.cauchy[i].second},
                    {"uncorrected", uncorrected.cauchy[i].second}});
    report["profile_W_cauchy"] = cj;
    double sup = 0.0;
    for (const auto& v : w.values) sup = std::max(sup, std::abs(v));
    report["profile_W_sup"] = sup;
  }

  json probes = json::array();
  {
    CsvWriter csv(out / "bphase.csv", {"xi", "t", "B"});
    for (double xi : cfg.profile_frequencies) {
      const auto b = integrating_phase_B(traj, cfg.beta0, xi);
      for (size_t i = 0; i < b.size(); i += 50) csv.row({xi, b[i].first, b[i].second});
      json pj;
      pj["xi"] = xi;
      // Dyadic contrast of the weighted profile with and without the
      // integrating-factor correction, at T/8, T/4, T/2, T.
      {
        size_t probe = traj.probe_freqs.size();
        for (size_t p = 0; p < traj.probe_freqs.size(); ++p)
          if (std::abs(traj.probe_freqs[p] - xi) <= 0.51 * traj.config.grid.dxi()) probe = p;
        if (probe < traj.probe_freqs.size()) {
          const double br = bracket(traj.probe_freqs[probe]);
          auto sample = [&](double target) {
            size_t best = 0;
            for (size_t i = 0; i < traj.times.size(); ++i)
              if (std::abs(traj.times[i] - target) < std::abs(traj.times[best] - target)) best = i;
            double bval = 0.0;
            for (const auto& [tb, vb] : b)
              if (tb <= traj.times[best]) bval = vb;
            const complexd p_unc = std::pow(br, 1.5) * traj.probe_series[probe][best];
            return std::pair<complexd, complexd>{p_unc, p_unc * std::polar(1.0, bval)};
          };
          std::array<std::pair<complexd, complexd>, 4> at{sample(cfg.t_end / 8.0), sample(cfg.t_end / 4.0),
                                                          sample(cfg.t_end / 2.0), sample(cfg.t_end)};
          json unc = json::array(), corr = json::array();
          for (int i = 0; i + 1 < 4; ++i) {
            unc.push_back(std::abs(at[i + 1].first - at[i].first));
            corr.push_back(std::abs(at[i + 1].second - at[i].second));
          }
          pj["dyadic_uncorrected_diffs"] = unc;
          pj["dyadic_corrected_diffs"] = corr;
          pj["uncorrected_drift_last_doubling"] = std::abs(std::arg(at[3].first / at[2].first));
        }
      }
      if (b.size() >= 3) {
        // Slope of B against log t over the late window.
        std::vector<double> lx, ly;
        for (const auto& [t, v] : b)
          if (t >= cfg.t_end / 10.0 && t <= 0.8 * cfg.t_end) {
            lx.push_back(std::log(t));
            ly.push_back(v);
          }
        const linear_fit_result fit = linear_fit(lx, ly);
        pj["slope"] = fit.slope;
        // Predicted slope (3 beta0/2) <xi>^{-1} |W(xi)|^2 from the extracted
        // final state at the nearest lattice frequency.
        size_t best = 0;
        for (size_t i = 0; i < w.freqs.size(); ++i)
          if (std::abs(w.freqs[i] - xi) < std::abs(w.freqs[best] - xi)) best = i;
        const double predicted = 1.5 * cfg.beta0 / bracket(w.freqs[best]) * std::norm(w.values[best]);
        pj["predicted_slope"] = predicted;
        pj["slope_relative_error"] =
            predicted != 0.0 ? std::abs(fit.slope - predicted) / std::abs(predicted) : 0.0;
        pj["total_phase"] = b.back().second;
      }
      probes.push_back(pj);
    }
  }
  report["integrating_phase"] = probes;

  // Pointwise prediction error over dyadic checkpoint times.
  {
    json pe = json::array();
    CsvWriter csv(out / "prediction_error.csv", {"t", "sup_scaled_error"});
    for (const Checkpoint& cp : traj.checkpoints) {
      const double t = cp.t;
      if (t < cfg.t_end / 16.0) continue;
      // only dyadic times of the checkpoint schedule
      const double l2 = std::log2(t);
      if (std::abs(l2 - std::round(l2)) > 0.05) continue;
      Spectrum s = propagate(cp.profile, t);
      if (traj.config.dealias) dealias(s);
      const Field v = from_spectrum(s);
      double sup = 0.0;
      for (int j = 0; j < v.grid.n_points; ++j) {
        const double x = v.grid.node(j);
        if (std::abs(x) > 0.9 * t) continue;
        sup = std::max(sup, std::abs(v.values[j] - predict_pointwise(w, cfg.beta0, t, x)));
      }
      pe.push_back({{"t", t}, {"sup_scaled_error", sup * std::sqrt(t)}});
      csv.row({t, sup * std::sqrt(t)});
    }
    report["prediction_error"] = pe;
  }

  write_gnuplot(out / "supnorm.plt",
                "set logscale xy\nset xlabel 't'\nset ylabel 'sup |v|'\n"
                "plot 'origin_dense.csv' using 1:2 with lines title 'sup norm'\n");
  write_gnuplot(out / "bphase.plt",
                "set logscale x\nset xlabel 't'\nset ylabel 'B(t)'\n"
                "plot 'bphase.csv' using 2:3 with points title 'integrating phase'\n");
  write_json(out / "asymptotics_report.json", report);
  return report;
}

// ---------------------------------------------------------------------------
// localdecay
// ---------------------------------------------------------------------------

inline json cmd_localdecay(const ExperimentConfig& cfg, const fs::path& out) {
  fs::create_directories(out);
  json report = detail::report_header(cfg);
  write_json(out / "config.json", detail::report_header(cfg));
  const Grid g = make_grid(cfg.half_length, cfg.n_points);
  const LocaldecayParams& p = cfg.localdecay;
  if (g.half_length < 4.0 * p.t_to)
    throw config_error("localdecay: wrap-around control requires L >= 4 t_to, got L = " +
                       std::to_string(g.half_length) + " for t_to = " + std::to_string(p.t_to));
  const std::vector<double> times = geometric_times(p.t_from, p.t_to, p.t_count);

  json scans = json::array();
  CsvWriter csv(out / "localdecay.csv", {"t", "plain", "px_over_bracket", "bracket_minus_one"});
  std::vector<DecayScan> results;
  for (PropagatorVariant v : {PropagatorVariant::plain, PropagatorVariant::px_over_bracket,
                              PropagatorVariant::bracket_minus_one}) {
    DecayScan s = decay_scan(v, p.weight, v == PropagatorVariant::plain ? p.smoothing : 0.0, g, times,
                             p.window);
    json js;
    js["variant"] = variant_name(v);
    js["exponent"] = s.exponent;
    js["rms_residual"] = s.rms_residual;
    scans.push_back(js);
    results.push_back(std::move(s));
  }
  for (size_t i = 0; i < times.size(); ++i)
    csv.row({times[i], results[0].norms[i], results[1].norms[i], results[2].norms[i]});
  report["scans"] = scans;
  write_gnuplot(out / "localdecay.plt",
                "set logscale xy\nset xlabel 't'\nset ylabel 'operator norm'\n"
                "plot 'localdecay.csv' using 1:2 title 'plain', \\\n"
                "     'localdecay.csv' using 1:3 title 'd_x/<nabla>', \\\n"
                "     'localdecay.csv' using 1:4 title '(<nabla>-1)/<nabla>'\n");
  write_json(out / "localdecay_report.json", report);
  return report;
}

// ---------------------------------------------------------------------------
// oscint
// ---------------------------------------------------------------------------

inline json cmd_oscint(const ExperimentConfig& cfg, const fs::path& out) {
  fs::create_directories(out);
  json report = detail::report_header(cfg);
  write_json(out / "config.json", detail::report_header(cfg));

  Phase2D psi;
  psi.value = [](double x, double y) { return 0.5 * (x * x + y * y); };
  psi.gradient = [](double x, double y) -> std::array<double, 2> { return {x, y}; };
  psi.hessian = [](double, double) -> std::array<double, 3> { return {1.0, 0.0, 1.0}; };
  auto amp = [](double x, double y) { return std::exp(-(x * x + y * y)); };
  const Cutoff2D chi = bump_cutoff(2.0);

  json sweep = json::array();
  std::vector<double> lambdas, errors;
  {
    CsvWriter csv(out / "oscint_lambda.csv",
                  {"lambda", "leading_re", "leading_im", "brute_re", "brute_im", "abs_error"});
    for (double lambda : cfg.oscint.lambdas) {
      const complexd lead = stationary_phase_2d(psi, amp, chi, lambda);
      const complexd brute = brute_force_2d(psi, amp, chi, lambda, cfg.oscint.points_per_wavelength);
      const double err = std::abs(lead - brute);
      csv.row({lambda, lead.real(), lead.imag(), brute.real(), brute.imag(), err});
      sweep.push_back({{"lambda", lambda},
                       {"leading", complex_to_json(lead)},
                       {"brute", complex_to_json(brute)},
                       {"abs_error", err},
                       {"rel_error", err / std::abs(brute)}});
      lambdas.push_back(lambda);
      errors.push_back(err);
    }
  }
  report["lambda_sweep"] = sweep;
  if (lambdas.size() >= 2) {
    const power_law_fit fit = fit_power_law(lambdas, errors);
    report["error_exponent"] = fit.exponent;
  }

  json phases = json::array();
  {
    CsvWriter csv(out / "cubic_phases.csv", {"j", "xi", "eta", "sigma", "value", "det", "signature"});
    for (int jdx = 1; jdx <= 4; ++jdx)
      for (double xi : cfg.oscint.xi_samples) {
        const CubicPhaseData d = cubic_phase_data(jdx, xi);
        csv.row({double(d.index), d.xi, d.eta, d.sigma, d.value, d.det, double(d.signature)});
        phases.push_back({{"j", d.index},
                          {"xi", d.xi},
                          {"point", {d.eta, d.sigma}},
                          {"value", d.value},
                          {"det", d.det},
                          {"signature", d.signature}});
      }
  }
  report["cubic_phases"] = phases;
  write_gnuplot(out / "oscint.plt",
                "set logscale xy\nset xlabel 'lambda'\nset ylabel '|leading - brute|'\n"
                "plot 'oscint_lambda.csv' using 1:6 with linespoints title 'error'\n");
  write_json(out / "oscint_report.json", report);
  return report;
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

inline json cmd_sweep(const ExperimentConfig& cfg, const fs::path& out, int jobs = 1) {
  if (cfg.sweep.subcommand.empty() || cfg.sweep.values.empty())
    throw config_error("sweep: config must provide sweep.subcommand and sweep.values");
  if (cfg.sweep.parameter != "epsilon" && cfg.sweep.parameter != "alpha_amplitude")
    throw config_error("sweep: parameter must be 'epsilon' or 'alpha_amplitude'");
  if (cfg.sweep.subcommand != "simulate" && cfg.sweep.subcommand != "resonant" &&
      cfg.sweep.subcommand != "nonresonant")
    throw config_error("sweep: subcommand must be simulate, resonant, or nonresonant");
  fs::create_directories(out);

  struct Item {
    double value;
    fs::path dir;
  };
  std::vector<Item> items;
  for (double v : cfg.sweep.values)
    items.push_back({v, out / (cfg.sweep.parameter + "_" + format_double(v))});

  std::mutex failures_mutex;
  std::vector<std::string> failures;
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= items.size()) return;
      ExperimentConfig local = cfg;
      local.sweep = SweepParams{};
      if (cfg.sweep.parameter == "epsilon")
        local.epsilon = items[i].value;
      else
        local.alpha.amplitude = items[i].value;
      try {
        if (cfg.sweep.subcommand == "simulate")
          cmd_simulate(local, items[i].dir);
        else if (cfg.sweep.subcommand == "resonant")
          cmd_resonant(local, items[i].dir);
        else
          cmd_nonresonant(local, items[i].dir);
      } catch (const std::exception& e) {
        std::scoped_lock lock(failures_mutex);
        failures.push_back(items[i].dir.filename().string() + ": " + e.what());
      }
    }
  };
  std::vector<std::thread> pool;
  const int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(items.size())));
  for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  json report = detail::report_header(cfg);
  json runs = json::array();
  for (const Item& it : items)
    runs.push_back({{"value", it.value}, {"directory", it.dir.filename().string()}});
  report["runs"] = runs;
  report["failures"] = failures;
  write_json(out / "sweep_summary.json", report);
  if (!failures.empty())
    throw numerical_guard_error("sweep: " + std::to_string(failures.size()) + " run(s) failed");
  return report;
}

}  // namespace kglab
