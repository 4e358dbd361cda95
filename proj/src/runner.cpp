#include "switchinv/runner.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

namespace switchinv::cli {

namespace {

using Artifacts = std::map<std::string, std::string>;

std::string indexed(const std::string& stem, std::size_t k, const std::string& ext) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%03zu", k);
  return stem + "_" + buf + ext;
}

void write_artifacts(const std::filesystem::path& dir, const Artifacts& files) {
  for (const auto& [name, content] : files) {
    const auto path = dir / name;
    std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << content;
    if (!f) throw std::runtime_error("write failed for " + path.string());
  }
}

template <typename Fn>
std::string render(Fn&& fn) {
  std::ostringstream os;
  fn(os);
  return os.str();
}

void add_trajectories(Artifacts& files, const GuasScenario<double>& sc, const TrajectoryBatch<double>& batch) {
  for (std::size_t k = 0; k < batch.trajectories.size(); ++k) {
    const auto& t = batch.trajectories[k];
    files[indexed("trajectories/traj", k, ".csv")] =
        render([&](std::ostream& os) { io::write_trajectory_csv(os, t, &sc.V); });
    files[indexed("signals/signal", k, ".txt")] = render([&](std::ostream& os) { io::write_signal(os, t.signal); });
  }
}

template <typename Body>
int guarded(const std::string& scenario, const Overrides& overrides, std::ostream& out, std::ostream& err, Body&& body) {
  std::optional<io::ScenarioFile> file;
  try {
    file = load_scenario(scenario, overrides);
  } catch (const io::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    err << "error: " << scenario << ": " << e.what() << "\n";
    return kInputError;
  }
  Artifacts files;
  try {
    body(*file, files);
  } catch (const FiniteEscapeError& e) {
    err << "error: " << e.what() << "\n";
    return kSimulationError;
  } catch (const StiffnessError& e) {
    err << "error: " << e.what() << "\n";
    return kSimulationError;
  } catch (const ChatteringError& e) {
    err << "error: " << e.what() << "\n";
    return kSimulationError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInternalError;
  }
  try {
    write_artifacts(file->output, files);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInternalError;
  }
  out << "wrote " << files.size() << " files to " << file->output.string() << "\n";
  return kOk;
}

}  // namespace

io::ScenarioFile load_scenario(const std::string& path_or_id, const Overrides& overrides) {
  auto file = [&]() -> io::ScenarioFile {
    if (std::filesystem::is_regular_file(path_or_id)) return io::read_scenario_file(path_or_id);
    if (auto sc = builtin::scenario_by_id(path_or_id))
      return {std::move(*sc), std::filesystem::path("out") / path_or_id};
    throw io::ParseError(path_or_id, 0, "no such scenario file or built-in id");
  }();
  auto& sc = file.scenario;
  auto positive = [&](const char* name, double v) {
    if (!(v > 0.0) || !std::isfinite(v)) throw io::ParseError(std::string("--") + name, 0, "must be a positive number");
    return v;
  };
  if (overrides.horizon) {
    if (sc.fixed_signal) throw io::ParseError("--horizon", 0, "scenario uses a fixed signal file");
    sc.horizon = positive("horizon", *overrides.horizon);
  }
  if (overrides.rtol) sc.integrator.rtol = positive("rtol", *overrides.rtol);
  if (overrides.atol) sc.integrator.atol = positive("atol", *overrides.atol);
  if (overrides.seed) sc.seed = *overrides.seed;
  if (overrides.out) file.output = *overrides.out;
  return file;
}

int run(const std::string& scenario, const Overrides& overrides, std::ostream& out, std::ostream& err) {
  std::string verdict;
  const int code = guarded(scenario, overrides, out, err, [&](io::ScenarioFile& file, Artifacts& files) {
    const auto& sc = file.scenario;
    auto analysis = guas_report(sc);
    add_trajectories(files, sc, analysis.batch);
    files["lyapunov_bounds.csv"] = render([&](std::ostream& os) { io::write_class_k_csv(os, analysis.class_k); });
    files["strict_decrease.csv"] =
        render([&](std::ostream& os) { io::write_strict_decrease_csv(os, analysis.strict); });
    files["envelope_uniform.csv"] =
        render([&](std::ostream& os) { io::write_uniform_envelope_csv(os, analysis.uniform); });
    files["envelope_kl.csv"] = render([&](std::ostream& os) { io::write_kl_envelope_csv(os, analysis.kl); });
    for (std::size_t k = 0; k < analysis.omega.size(); ++k) {
      files[indexed("omega/omega", k, ".csv")] =
          render([&](std::ostream& os) { io::write_omega_csv(os, analysis.omega[k]); });
      files[indexed("omega/omega_sharp", k, ".csv")] =
          render([&](std::ostream& os) { io::write_omega_sharp_csv(os, analysis.omega_sharp[k]); });
    }
    auto& rep = analysis.report;
    for (const auto& [name, _] : files) rep.artifacts.push_back(name);
    rep.artifacts.push_back("report.kv");
    rep.artifacts.push_back("report.txt");
    files["report.txt"] = render([&](std::ostream& os) { rep.write_text(os); });
    files["report.kv"] = render([&](std::ostream& os) { rep.write_records(os); });
    verdict = rep.verdict() + (rep.hypotheses_established ? "" : " (hypotheses not established)");
  });
  if (code == kOk) out << "verdict: " << verdict << "\n";
  return code;
}

int simulate(const std::string& scenario, const Overrides& overrides, std::ostream& out, std::ostream& err) {
  return guarded(scenario, overrides, out, err, [&](io::ScenarioFile& file, Artifacts& files) {
    add_trajectories(files, file.scenario, simulate_batch(file.scenario));
  });
}

int omega(const std::string& scenario, const Overrides& overrides, std::ostream& out, std::ostream& err) {
  return guarded(scenario, overrides, out, err, [&](io::ScenarioFile& file, Artifacts& files) {
    const auto& an = file.scenario.analysis;
    const auto batch = simulate_batch(file.scenario);
    for (std::size_t k = 0; k < batch.trajectories.size(); ++k) {
      const auto& t = batch.trajectories[k];
      const auto est = omega_limit(t, an.tail_fraction, an.cluster_tol);
      const auto sharp = omega_sharp(t, an.tail_fraction, an.cluster_tol, default_dwell_filter(t, an.cluster_tol));
      files[indexed("omega/omega", k, ".csv")] = render([&](std::ostream& os) { io::write_omega_csv(os, est); });
      files[indexed("omega/omega_sharp", k, ".csv")] =
          render([&](std::ostream& os) { io::write_omega_sharp_csv(os, sharp); });
    }
  });
}

int validate(const std::filesystem::path& signal_path, double tau_d, int n0, std::ostream& out, std::ostream& err) {
  std::optional<AdtClass> cls;
  try {
    cls = AdtClass(tau_d, n0);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
  std::optional<SwitchingSignal> signal;
  try {
    signal = io::read_signal_file(signal_path);
  } catch (const io::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
  const auto report = validate_adt(*signal, *cls);
  if (report.valid) {
    out << "valid: " << signal->switch_count() << " switches, worst excess " << format_number(report.worst_excess)
        << "\n";
    return kOk;
  }
  out << "invalid: " << report.witness_count << " switches in (" << format_number(report.witness->first) << ", "
      << format_number(report.witness->second) << "), bound " << format_number(report.witness_bound) << "\n";
  return kInvalidSignal;
}

}  // namespace switchinv::cli
