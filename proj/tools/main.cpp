// Command-line runner for the Klein-Gordon asymptotics laboratory.
//
// Subcommands: simulate | resonant | nonresonant | localdecay | oscint | sweep
// Exit codes: 0 success, 2 configuration error, 3 numerical guard tripped.

#include <CLI11.hpp>
#include <cstdio>
#include <string>

#include "kglab/pipelines.hpp"
#include "kglab/version.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  int jobs = 1;
  bool seedless = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON experiment config")->required();
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--jobs", args.jobs, "worker pool size for sweeps")->check(CLI::PositiveNumber);
  // Documents that nothing here is randomized; accepted for symmetry with
  // other lab tooling.
  cmd->add_flag("--seedless", args.seedless, "all computations are deterministic");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string(kglab::version_string) +
               " - variable-coefficient Klein-Gordon asymptotics laboratory"};
  app.require_subcommand(1);

  CommonArgs args;
  CLI::App* simulate = app.add_subcommand("simulate", "time integration with diagnostics");
  CLI::App* resonant = app.add_subcommand("resonant", "log slow-down pipeline along the rays");
  CLI::App* nonresonant = app.add_subcommand("nonresonant", "modified-scattering pipeline");
  CLI::App* localdecay = app.add_subcommand("localdecay", "weighted propagator decay scan");
  CLI::App* oscint = app.add_subcommand("oscint", "stationary phase tables");
  CLI::App* sweep = app.add_subcommand("sweep", "run a pipeline across a parameter list");
  for (CLI::App* cmd : {simulate, resonant, nonresonant, localdecay, oscint, sweep})
    add_common(cmd, args);

  CLI11_PARSE(app, argc, argv);

  try {
    const kglab::ExperimentConfig cfg = kglab::parse_config_file(args.config_path);
    if (simulate->parsed()) {
      kglab::cmd_simulate(cfg, args.out_dir);
    } else if (resonant->parsed()) {
      kglab::cmd_resonant(cfg, args.out_dir);
    } else if (nonresonant->parsed()) {
      kglab::cmd_nonresonant(cfg, args.out_dir);
    } else if (localdecay->parsed()) {
      kglab::cmd_localdecay(cfg, args.out_dir);
    } else if (oscint->parsed()) {
      kglab::cmd_oscint(cfg, args.out_dir);
    } else if (sweep->parsed()) {
      kglab::cmd_sweep(cfg, args.out_dir, args.jobs);
    }
  } catch (const kglab::config_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const kglab::numerical_guard_error& e) {
    std::fprintf(stderr, "numerical guard: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  std::printf("wrote %s\n", args.out_dir.c_str());
  return 0;
}
