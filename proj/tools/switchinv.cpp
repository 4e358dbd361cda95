#include "switchinv/runner.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  using namespace switchinv::cli;
  CLI::App app{"Simulation and numerical certificates for switched systems under average dwell-time switching"};
  app.require_subcommand(1);

  Overrides overrides;
  std::string scenario;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("scenario", scenario, "Scenario file or built-in id (example1, example2, two_centers)")
        ->required();
    sub->add_option("--horizon", overrides.horizon, "Simulation horizon");
    sub->add_option("--rtol", overrides.rtol, "Integrator relative tolerance");
    sub->add_option("--atol", overrides.atol, "Integrator absolute tolerance");
    sub->add_option("--seed", overrides.seed, "Base seed for generated signals");
    sub->add_option("--out", overrides.out, "Output directory");
  };

  auto* run_cmd = app.add_subcommand("run", "Simulate, run every check and write all artifacts");
  add_common(run_cmd);
  auto* sim_cmd = app.add_subcommand("simulate", "Write trajectory CSVs and realized signals only");
  add_common(sim_cmd);
  auto* omega_cmd = app.add_subcommand("omega", "Write limit-set estimates only");
  add_common(omega_cmd);

  std::string signal_path;
  double tau_d = 0.0;
  int n0 = 1;
  auto* val_cmd = app.add_subcommand("validate", "Check a signal file against an average dwell-time class");
  val_cmd->add_option("signal", signal_path, "Signal file")->required();
  val_cmd->add_option("--tau-d", tau_d, "Average dwell time")->required();
  val_cmd->add_option("--n0", n0, "Chatter bound")->default_val(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kInputError;
  }

  if (*run_cmd) return run(scenario, overrides, std::cout, std::cerr);
  if (*sim_cmd) return simulate(scenario, overrides, std::cout, std::cerr);
  if (*omega_cmd) return omega(scenario, overrides, std::cout, std::cerr);
  return validate(signal_path, tau_d, n0, std::cout, std::cerr);
}
