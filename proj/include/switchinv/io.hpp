#pragma once

#include "switchinv/builtin.hpp"
#include "switchinv/stability.hpp"

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

namespace switchinv::io {

/// Malformed input; `line` is 1-based, 0 when the problem is not tied to one line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& message);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Signal text format:
///
///   modes=<m> horizon=<T>
///   0 <g_0>
///   <t_1> <g_1>
///   ...
///
/// `#` starts a comment; blank lines are ignored. Times print with 17 significant digits.
SwitchingSignal read_signal(std::istream& in, const std::string& source = "<signal>");
SwitchingSignal read_signal_file(const std::filesystem::path& path);
void write_signal(std::ostream& out, const SwitchingSignal& signal);

/// `t,x1,...,xn,sigma,V`; the V column is dropped when V is null.
void write_trajectory_csv(std::ostream& out, const Trajectory<double>& traj, const LyapunovCandidate<double>* V);

void write_class_k_csv(std::ostream& out, const EnvelopeReport& report);
void write_strict_decrease_csv(std::ostream& out, const StrictDecreaseReport& report);
void write_uniform_envelope_csv(std::ostream& out, const UniformEnvelope& env);
/// Fitted parameters as comment-free header rows followed by the fallback table `s,beta`.
void write_kl_envelope_csv(std::ostream& out, const KlEnvelope& env);
void write_omega_csv(std::ostream& out, const OmegaEstimate<double>& est);
void write_omega_sharp_csv(std::ostream& out, const OmegaSharpEstimate<double>& est);

/// A parsed scenario file: the analysis scenario plus where artifacts go.
struct ScenarioFile {
  GuasScenario<double> scenario;
  std::filesystem::path output;
};

/// `key = value` lines with `#` comments. See scenarios/reference.scn for every key.
/// Errors carry the offending line number.
ScenarioFile read_scenario(std::istream& in, const std::string& source,
                           const std::filesystem::path& base_dir = {});
ScenarioFile read_scenario_file(const std::filesystem::path& path);

}  // namespace switchinv::io
