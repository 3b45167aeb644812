#pragma once

#include <cmath>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "kglab/coefficients.hpp"
#include "kglab/evolution.hpp"

namespace kglab {

// Subcommand-independent experiment description.  Parsing is strict: unknown
// keys, wrong types, and out-of-range values are config errors, and the
// resolved config is echoed with every default made explicit.
struct CoefficientSpec {
  std::string kind = "none";  // none | gaussian | sech2 | sech_tanh | cosine_gaussian
  double amplitude = 1.0;
  double sigma = 1.0;
  double center = 0.0;
  double width = 1.0;
  double omega = 0.0;
};

struct InitialDataSpec {
  std::string kind = "gaussian";  // gaussian | gaussian_odd
  double sigma = 1.0;
  double center = 0.0;
};

struct LocaldecayParams {
  double t_from = 10.0, t_to = 300.0;
  int t_count = 12;
  double window = 50.0;
  double weight = 2.0;     // a
  double smoothing = 0.0;  // b for the plain variant
};

struct OscintParams {
  std::vector<double> lambdas{50.0, 100.0, 200.0, 400.0};
  std::vector<double> xi_samples{-2.0, 0.0, 1.0, 5.0};
  int points_per_wavelength = 40;
};

struct SweepParams {
  std::string subcommand;         // simulate | resonant | nonresonant
  std::string parameter;          // epsilon | alpha_amplitude
  std::vector<double> values;
};

struct ExperimentConfig {
  double half_length = 330.0;
  int n_points = 2048;
  CoefficientSpec alpha, beta;
  double beta0 = 0.0;
  bool deresonate_alpha = false;
  InitialDataSpec initial_data;
  double epsilon = 0.05;
  double t_end = 300.0;
  double dt = 0.05;
  bool dealias = true;
  double checkpoint_log2_ratio = 0.25;
  std::vector<double> rays = default_ray_speeds();
  std::vector<double> profile_frequencies{0.0, 1.0, 2.0};
  double fit_window_lo = 0.0, fit_window_hi = 0.0;  // 0 = default [T/16, T/2]
  bool record_a0_integrands = true;
  LocaldecayParams localdecay;
  OscintParams oscint;
  SweepParams sweep;

  double fit_lo() const { return fit_window_lo > 0.0 ? fit_window_lo : t_end / 16.0; }
  double fit_hi() const { return fit_window_hi > 0.0 ? fit_window_hi : t_end / 2.0; }
};

namespace detail {

inline void require_keys(const nlohmann::ordered_json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key))
      throw config_error("config: unknown key '" + key + "' in " + where);
}

template <typename T>
T get_or(const nlohmann::ordered_json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw config_error("config: key '" + key + "' has the wrong type (" + e.what() + ")");
  }
}

inline CoefficientSpec parse_coefficient(const nlohmann::ordered_json& j, const std::string& where) {
  require_keys(j, {"kind", "amplitude", "sigma", "center", "width", "omega"}, where);
  CoefficientSpec s;
  s.kind = get_or<std::string>(j, "kind", "none");
  if (s.kind != "none") profile_kind_from_name(s.kind);  // validates
  s.amplitude = get_or(j, "amplitude", 1.0);
  s.sigma = get_or(j, "sigma", 1.0);
  s.center = get_or(j, "center", 0.0);
  s.width = get_or(j, "width", 1.0);
  s.omega = get_or(j, "omega", 0.0);
  if (s.sigma <= 0.0 || s.width <= 0.0) throw config_error("config: " + where + " widths must be positive");
  return s;
}

}  // namespace detail

inline ExperimentConfig parse_config(const nlohmann::ordered_json& j) {
  using detail::get_or;
  detail::require_keys(j, {"grid", "alpha", "beta", "beta0", "deresonate_alpha", "initial_data",
                           "epsilon", "t_end", "dt", "dealias", "checkpoint_log2_ratio", "rays",
                           "profile_frequencies", "fit_window", "record_a0_integrands", "localdecay",
                           "oscint", "sweep"},
                       "top level");
  ExperimentConfig cfg;
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    detail::require_keys(g, {"half_length", "n_points"}, "grid");
    cfg.half_length = get_or(g, "half_length", cfg.half_length);
    cfg.n_points = get_or(g, "n_points", cfg.n_points);
  }
  if (j.contains("alpha")) cfg.alpha = detail::parse_coefficient(j.at("alpha"), "alpha");
  if (j.contains("beta")) cfg.beta = detail::parse_coefficient(j.at("beta"), "beta");
  cfg.beta0 = get_or(j, "beta0", cfg.beta0);
  cfg.deresonate_alpha = get_or(j, "deresonate_alpha", cfg.deresonate_alpha);
  if (j.contains("initial_data")) {
    const auto& d = j.at("initial_data");
    detail::require_keys(d, {"kind", "sigma", "center"}, "initial_data");
    cfg.initial_data.kind = get_or<std::string>(d, "kind", "gaussian");
    if (cfg.initial_data.kind != "gaussian" && cfg.initial_data.kind != "gaussian_odd")
      throw config_error("config: initial_data.kind must be gaussian or gaussian_odd");
    cfg.initial_data.sigma = get_or(d, "sigma", 1.0);
    cfg.initial_data.center = get_or(d, "center", 0.0);
    if (cfg.initial_data.sigma <= 0.0) throw config_error("config: initial_data.sigma must be positive");
  }
  cfg.epsilon = get_or(j, "epsilon", cfg.epsilon);
  cfg.t_end = get_or(j, "t_end", cfg.t_end);
  cfg.dt = get_or(j, "dt", cfg.dt);
  cfg.dealias = get_or(j, "dealias", cfg.dealias);
  cfg.checkpoint_log2_ratio = get_or(j, "checkpoint_log2_ratio", cfg.checkpoint_log2_ratio);
  cfg.rays = get_or(j, "rays", cfg.rays);
  cfg.profile_frequencies = get_or(j, "profile_frequencies", cfg.profile_frequencies);
  if (j.contains("fit_window")) {
    const auto w = j.at("fit_window").get<std::vector<double>>();
    if (w.size() != 2 || !(w[0] < w[1])) throw config_error("config: fit_window must be [lo, hi]");
    cfg.fit_window_lo = w[0];
    cfg.fit_window_hi = w[1];
  }
  cfg.record_a0_integrands = get_or(j, "record_a0_integrands", cfg.record_a0_integrands);
  if (j.contains("localdecay")) {
    const auto& l = j.at("localdecay");
    detail::require_keys(l, {"t_from", "t_to", "t_count", "window", "weight", "smoothing"}, "localdecay");
    cfg.localdecay.t_from = get_or(l, "t_from", cfg.localdecay.t_from);
    cfg.localdecay.t_to = get_or(l, "t_to", cfg.localdecay.t_to);
    cfg.localdecay.t_count = get_or(l, "t_count", cfg.localdecay.t_count);
    cfg.localdecay.window = get_or(l, "window", cfg.localdecay.window);
    cfg.localdecay.weight = get_or(l, "weight", cfg.localdecay.weight);
    cfg.localdecay.smoothing = get_or(l, "smoothing", cfg.localdecay.smoothing);
    if (cfg.localdecay.t_count < 2 || !(cfg.localdecay.t_from > 0.0) ||
        !(cfg.localdecay.t_to > cfg.localdecay.t_from))
      throw config_error("config: localdecay time list is degenerate");
  }
  if (j.contains("oscint")) {
    const auto& o = j.at("oscint");
    detail::require_keys(o, {"lambdas", "xi_samples", "points_per_wavelength"}, "oscint");
    cfg.oscint.lambdas = get_or(o, "lambdas", cfg.oscint.lambdas);
    cfg.oscint.xi_samples = get_or(o, "xi_samples", cfg.oscint.xi_samples);
    cfg.oscint.points_per_wavelength = get_or(o, "points_per_wavelength", 40);
    if (cfg.oscint.points_per_wavelength < 4)
      throw config_error("config: oscint.points_per_wavelength must be at least 4");
  }
  if (j.contains("sweep")) {
    const auto& s = j.at("sweep");
    detail::require_keys(s, {"subcommand", "parameter", "values"}, "sweep");
    cfg.sweep.subcommand = get_or<std::string>(s, "subcommand", "");
    cfg.sweep.parameter = get_or<std::string>(s, "parameter", "");
    cfg.sweep.values = get_or(s, "values", std::vector<double>{});
  }

  if (!(cfg.epsilon >= 0.0) || cfg.epsilon > 0.5)
    throw config_error("config: epsilon must lie in [0, 0.5]");
  if (!(cfg.dt > 0.0) || cfg.dt > 0.1) throw config_error("config: dt must lie in (0, 0.1]");
  if (!(cfg.t_end > 0.0)) throw config_error("config: t_end must be positive");
  for (double c : cfg.rays)
    if (std::abs(c) >= 1.0) throw config_error("config: ray speeds must satisfy |c| < 1");
  return cfg;
}

inline ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file " + path);
  nlohmann::ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw config_error("config: invalid JSON in " + path + ": " + e.what());
  }
  return parse_config(j);
}

inline nlohmann::ordered_json echo_config(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["grid"] = {{"half_length", c.half_length}, {"n_points", c.n_points}};
  auto coeff = [](const CoefficientSpec& s) {
    return nlohmann::ordered_json{{"kind", s.kind},     {"amplitude", s.amplitude},
                                  {"sigma", s.sigma},   {"center", s.center},
                                  {"width", s.width},   {"omega", s.omega}};
  };
  j["alpha"] = coeff(c.alpha);
  j["beta"] = coeff(c.beta);
  j["beta0"] = c.beta0;
  j["deresonate_alpha"] = c.deresonate_alpha;
  j["initial_data"] = {{"kind", c.initial_data.kind},
                       {"sigma", c.initial_data.sigma},
                       {"center", c.initial_data.center}};
  j["epsilon"] = c.epsilon;
  j["t_end"] = c.t_end;
  j["dt"] = c.dt;
  j["dealias"] = c.dealias;
  j["checkpoint_log2_ratio"] = c.checkpoint_log2_ratio;
  j["rays"] = c.rays;
  j["profile_frequencies"] = c.profile_frequencies;
  j["fit_window"] = {c.fit_lo(), c.fit_hi()};
  j["record_a0_integrands"] = c.record_a0_integrands;
  j["localdecay"] = {{"t_from", c.localdecay.t_from},   {"t_to", c.localdecay.t_to},
                     {"t_count", c.localdecay.t_count}, {"window", c.localdecay.window},
                     {"weight", c.localdecay.weight},   {"smoothing", c.localdecay.smoothing}};
  j["oscint"] = {{"lambdas", c.oscint.lambdas},
                 {"xi_samples", c.oscint.xi_samples},
                 {"points_per_wavelength", c.oscint.points_per_wavelength}};
  if (!c.sweep.subcommand.empty())
    j["sweep"] = {{"subcommand", c.sweep.subcommand},
                  {"parameter", c.sweep.parameter},
                  {"values", c.sweep.values}};
  return j;
}

// Materialization into simulation inputs.

inline Field build_coefficient_field(const Grid& g, const CoefficientSpec& s) {
  if (s.kind == "none") return make_field(g);
  ProfileParams p{s.amplitude, s.sigma, s.center, s.width, s.omega};
  return sample_profile(g, profile_kind_from_name(s.kind), p);
}

inline Field build_initial_profile(const Grid& g, const InitialDataSpec& d, double epsilon) {
  // v0 = epsilon * shape; equivalently u0 = 2 epsilon shape, u1 = 0.
  if (d.kind == "gaussian_odd")
    return sample_field(g, [&](double x) {
      const double z = x - d.center;
      return epsilon * z * std::exp(-z * z / (2.0 * d.sigma * d.sigma));
    });
  return sample_field(g, [&](double x) {
    const double z = x - d.center;
    return epsilon * std::exp(-z * z / (2.0 * d.sigma * d.sigma));
  });
}

struct MaterializedExperiment {
  SimConfig sim;
  Coefficient alpha;       // after optional deresonation
  double deresonate_c1 = 0.0, deresonate_c2 = 0.0;
};

inline MaterializedExperiment materialize(const ExperimentConfig& cfg) {
  const Grid g = make_grid(cfg.half_length, cfg.n_points);
  MaterializedExperiment m;
  Field alpha_field = build_coefficient_field(g, cfg.alpha);
  m.alpha = make_coefficient(std::move(alpha_field));
  if (cfg.deresonate_alpha) {
    DeresonateResult r = deresonate(m.alpha, default_deresonate_window(g));
    m.alpha = std::move(r.coefficient);
    m.deresonate_c1 = r.c1;
    m.deresonate_c2 = r.c2;
  }
  m.sim = make_sim_config(g, m.alpha.values, build_coefficient_field(g, cfg.beta), cfg.beta0,
                          build_initial_profile(g, cfg.initial_data, cfg.epsilon), cfg.epsilon,
                          cfg.t_end, cfg.dt);
  m.sim.dealias = cfg.dealias;
  m.sim.checkpoint_log2_ratio = cfg.checkpoint_log2_ratio;
  m.sim.ray_speeds = cfg.rays;
  m.sim.profile_probes = cfg.profile_frequencies;
  m.sim.record_a0_integrands = cfg.record_a0_integrands;
  return m;
}

}  // namespace kglab
