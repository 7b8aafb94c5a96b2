// Command-line front end for the electron vortex beam library.
//
// Subcommands:
//   mode         single-mode densities, currents, observables (figs 2-5)
//   observables  observables report only, JSON output
//   evolve       superposition evolution: rotation, centroid, vortices (figs 6-10c)
//   oracle       numerical-propagator cross-checks; exit 1 on tolerance failure
//   phases       dispersion / phase tables
//
// Exit codes: 0 success, 1 tolerance failure, 2 usage or config error.

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "evb/scenario.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::vector<std::string> sets;
  std::vector<std::string> formats;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "flat key = value config file");
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--set", args.sets, "override key=value (repeatable)")
      ->take_all();
  cmd->add_option("--format", args.formats, "output format csv|png|pgm|json (repeatable)")
      ->take_all();
}

evb::cli::Config build_config(const CommonArgs& args) {
  evb::cli::Config cfg;
  if (!args.config_path.empty()) cfg = evb::cli::Config::from_file(args.config_path);
  for (const std::string& s : args.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0)
      throw evb::cli::ConfigError("--set expects key=value, got '" + s + "'");
    cfg.set(s.substr(0, eq), s.substr(eq + 1));
  }
  evb::cli::apply_scenario(cfg, cfg.str("scenario", ""));
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"electron vortex beams in magnetic fields: modes, observables, evolution"};
  app.require_subcommand(1);

  CommonArgs mode_args, obs_args, evolve_args, oracle_args, phases_args;
  CLI::App* cmd_mode = app.add_subcommand("mode", "single-mode fields and currents");
  add_common(cmd_mode, mode_args);
  CLI::App* cmd_obs = app.add_subcommand("observables", "observables report (JSON)");
  add_common(cmd_obs, obs_args);
  CLI::App* cmd_evolve = app.add_subcommand("evolve", "superposition evolution");
  add_common(cmd_evolve, evolve_args);
  CLI::App* cmd_oracle = app.add_subcommand("oracle", "numerical propagator cross-checks");
  add_common(cmd_oracle, oracle_args);
  CLI::App* cmd_phases = app.add_subcommand("phases", "dispersion and phase tables");
  add_common(cmd_phases, phases_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (cmd_mode->parsed()) {
      const auto cfg = build_config(mode_args);
      return evb::cli::run_mode(cfg, mode_args.out_dir,
                                evb::cli::parse_formats(mode_args.formats), std::cout);
    }
    if (cmd_obs->parsed()) {
      const auto cfg = build_config(obs_args);
      evb::cli::OutputFormats fmt;
      fmt.json_out = true;
      return evb::cli::run_mode(cfg, obs_args.out_dir, fmt, std::cout, /*images=*/false);
    }
    if (cmd_evolve->parsed()) {
      const auto cfg = build_config(evolve_args);
      return evb::cli::run_evolve(cfg, evolve_args.out_dir,
                                  evb::cli::parse_formats(evolve_args.formats), std::cout);
    }
    if (cmd_oracle->parsed()) {
      const auto cfg = build_config(oracle_args);
      return evb::cli::run_oracle(cfg, oracle_args.out_dir,
                                  evb::cli::parse_formats(oracle_args.formats), std::cout);
    }
    if (cmd_phases->parsed()) {
      const auto cfg = build_config(phases_args);
      return evb::cli::run_phases(cfg, phases_args.out_dir,
                                  evb::cli::parse_formats(phases_args.formats), std::cout);
    }
  } catch (const evb::cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
