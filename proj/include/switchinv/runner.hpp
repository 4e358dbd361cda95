#pragma once

#include "switchinv/io.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace switchinv::cli {

enum ExitCode : int {
  kOk = 0,
  kInvalidSignal = 1,
  kInputError = 2,
  kSimulationError = 3,
  kInternalError = 4,
};

/// Command-line overrides applied on top of the scenario file.
struct Overrides {
  std::optional<double> horizon;
  std::optional<double> rtol;
  std::optional<double> atol;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
};

/// A readable file path, or a built-in id (example1, example2, two_centers) when no
/// such file exists.
io::ScenarioFile load_scenario(const std::string& path_or_id, const Overrides& overrides);

/// Full pipeline: trajectories, envelopes, limit-set estimates and the report.
int run(const std::string& scenario, const Overrides& overrides, std::ostream& out, std::ostream& err);
/// Trajectory CSVs and realized signals only.
int simulate(const std::string& scenario, const Overrides& overrides, std::ostream& out, std::ostream& err);
/// Omega and extended omega estimates only.
int omega(const std::string& scenario, const Overrides& overrides, std::ostream& out, std::ostream& err);
/// 0 valid, 1 invalid (witness printed), 2 unreadable or malformed file.
int validate(const std::filesystem::path& signal_path, double tau_d, int n0, std::ostream& out, std::ostream& err);

}  // namespace switchinv::cli
