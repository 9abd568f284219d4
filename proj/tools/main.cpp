#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "maxstorm/cli/commands.hpp"
#include "maxstorm/errors.hpp"

namespace ms = maxstorm;

int main(int argc, char** argv) {
  CLI::App app{"maxstorm: space-time max-stable storm simulation and pairwise-likelihood fitting"};
  app.require_subcommand(1);

  std::string config_path, out_path, field_path;
  int scheme = 1;
  std::size_t replicates = 0;

  auto* sim = app.add_subcommand("simulate", "simulate a space-time field");
  sim->add_option("--config", config_path, "run configuration (INI)")->required();
  sim->add_option("--out", out_path, "output directory")->required();

  auto* dep = app.add_subcommand("dependence", "analytic and empirical extremal coefficients");
  dep->add_option("--config", config_path, "run configuration (INI)")->required();
  dep->add_option("--field", field_path, "field CSV for empirical madograms");
  dep->add_option("--out", out_path, "output CSV")->required();

  auto* fit = app.add_subcommand("fit", "pairwise-likelihood fit");
  fit->add_option("--config", config_path, "run configuration (INI)")->required();
  fit->add_option("--field", field_path, "field CSV")->required();
  fit->add_option("--scheme", scheme, "1: two-stage, 2: joint")->required();
  fit->add_option("--out", out_path, "output JSON")->required();

  auto* mc = app.add_subcommand("mc-study", "Monte Carlo study of both fitting schemes");
  mc->add_option("--config", config_path, "run configuration (INI)")->required();
  mc->add_option("--replicates", replicates, "number of replicates (>= 2)")->required();
  mc->add_option("--out", out_path, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const auto config = ms::cli::load_config(config_path);
    if (sim->parsed()) return ms::cli::cmd_simulate(config, out_path);
    if (dep->parsed()) {
      std::optional<std::filesystem::path> field;
      if (!field_path.empty()) field = field_path;
      return ms::cli::cmd_dependence(config, field, out_path);
    }
    if (fit->parsed()) return ms::cli::cmd_fit(config, field_path, scheme, out_path);
    if (mc->parsed()) return ms::cli::cmd_mc_study(config, replicates, out_path);
  } catch (const ms::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return ms::exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
  return 2;
}
