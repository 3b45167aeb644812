#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kglab/errors.hpp"
#include "kglab/evolution.hpp"

namespace kglab {

using json = nlohmann::ordered_json;

// Shortest round-trip formatting keeps CSV output byte-deterministic.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) : out_(path) {
    if (!out_) throw config_error("cannot open " + path.string() + " for writing");
    for (size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << "\n";
  }

  void row(const std::vector<double>& values) {
    for (size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_double(values[i]);
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

inline void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw config_error("cannot open " + path.string() + " for writing");
  out << j.dump(2) << "\n";
}

inline json complex_to_json(complexd z) { return json::array({z.real(), z.imag()}); }

inline void write_field_csv(const std::filesystem::path& path, const Field& f) {
  CsvWriter csv(path, {"x", "re", "im"});
  for (int j = 0; j < f.grid.n_points; ++j)
    csv.row({f.grid.node(j), f.values[j].real(), f.values[j].imag()});
}

inline void write_spectrum_csv(const std::filesystem::path& path, const Spectrum& s,
                               double max_abs_freq = 0.0) {
  CsvWriter csv(path, {"xi", "re", "im"});
  const int n = s.grid.n_points;
  for (int i = 0; i < n; ++i) {
    const int bin = (n / 2 + i) % n;  // ascending frequency order
    const double xi = s.grid.freq(bin);
    if (max_abs_freq > 0.0 && std::abs(xi) > max_abs_freq) continue;
    csv.row({xi, s.coeffs[bin].real(), s.coeffs[bin].imag()});
  }
}

// Trajectory directory layout: series.csv (checkpoint cadence), dense origin
// series, snapshots/, and the recorded a0 integrands / profile probes.
inline void write_trajectory(const std::filesystem::path& dir, const Trajectory& traj) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "snapshots");

  {
    std::vector<std::string> header{"t",         "sup_norm",   "energy",     "origin_re",
                                    "origin_im", "ld_v",       "ld_dx_v",    "ld_dt_phase",
                                    "bracket_l", "dt_phase_origin"};
    for (size_t r = 0; r < traj.config.ray_speeds.size(); ++r) {
      header.push_back("ray" + std::to_string(r) + "_re");
      header.push_back("ray" + std::to_string(r) + "_im");
    }
    CsvWriter csv(dir / "series.csv", header);
    for (size_t i = 0; i < traj.checkpoints.size(); ++i) {
      const double t = traj.checkpoints[i].t;
      const size_t dense = static_cast<size_t>(std::lround(t / traj.config.dt));
      std::vector<double> row{t,
                              traj.cp_sup[i],
                              traj.cp_energy[i],
                              traj.origin[dense].real(),
                              traj.origin[dense].imag(),
                              traj.cp_ld_v[i],
                              traj.cp_ld_dxv[i],
                              traj.cp_ld_dtphase[i],
                              traj.cp_bracket_l[i],
                              std::abs(traj.dtphase_origin[dense])};
      for (const auto& ray : traj.ray_series) {
        if (i < ray.size()) {
          row.push_back(ray[i].real());
          row.push_back(ray[i].imag());
        } else {
          row.push_back(0.0);
          row.push_back(0.0);
        }
      }
      csv.row(row);
    }
  }

  {
    CsvWriter csv(dir / "origin_dense.csv", {"t", "sup_norm", "origin_re", "origin_im",
                                             "dt_phase_origin_re", "dt_phase_origin_im"});
    for (size_t i = 0; i < traj.times.size(); ++i)
      csv.row({traj.times[i], traj.sup_norms[i], traj.origin[i].real(), traj.origin[i].imag(),
               traj.dtphase_origin[i].real(), traj.dtphase_origin[i].imag()});
  }

  if (!traj.a0_j1.empty()) {
    CsvWriter csv(dir / "a0_integrands.csv", {"t", "j1_re", "j1_im", "j2"});
    for (size_t i = 0; i < traj.a0_j1.size(); ++i)
      csv.row({traj.times[i], traj.a0_j1[i].real(), traj.a0_j1[i].imag(), traj.a0_j2[i]});
  }

  if (!traj.probe_freqs.empty()) {
    std::vector<std::string> header{"t"};
    for (double f : traj.probe_freqs) {
      header.push_back("re_" + format_double(f));
      header.push_back("im_" + format_double(f));
    }
    CsvWriter csv(dir / "probes.csv", header);
    for (size_t i = 0; i < traj.times.size(); ++i) {
      std::vector<double> row{traj.times[i]};
      for (const auto& series : traj.probe_series) {
        row.push_back(series[i].real());
        row.push_back(series[i].imag());
      }
      csv.row(row);
    }
  }

  for (const Checkpoint& cp : traj.checkpoints)
    write_spectrum_csv(dir / "snapshots" / ("t_" + format_double(cp.t) + ".csv"), cp.profile, 12.0);
}

inline void write_gnuplot(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path);
  if (!out) throw config_error("cannot open " + path.string() + " for writing");
  out << "# gnuplot script generated by kglab; run from this directory\n" << body;
}

}  // namespace kglab
