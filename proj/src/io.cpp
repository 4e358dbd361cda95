#include "switchinv/io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace switchinv::io {

ParseError::ParseError(const std::string& source, std::size_t line, const std::string& message)
    : std::runtime_error(line ? source + ":" + std::to_string(line) + ": " + message : source + ": " + message),
      line_(line) {}

namespace {

std::string trim(std::string_view s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string_view::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return std::string(s.substr(a, b - a + 1));
}

std::string strip_comment(const std::string& line) { return trim(line.substr(0, line.find('#'))); }

std::optional<double> to_double(const std::string& s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) return std::nullopt;
  return v;
}

std::optional<long long> to_integer(const std::string& s) {
  long long v = 0;
  const auto* end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) return std::nullopt;
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  return out;
}

std::vector<std::string> words(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

}  // namespace

SwitchingSignal read_signal(std::istream& in, const std::string& source) {
  std::string raw;
  std::size_t line_no = 0;
  std::optional<int> modes;
  std::optional<double> horizon;
  std::vector<double> times;
  std::vector<Mode> labels;
  bool header = false;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = strip_comment(raw);
    if (line.empty()) continue;
    if (!header) {
      for (const auto& w : words(line)) {
        const auto eq = w.find('=');
        if (eq == std::string::npos) throw ParseError(source, line_no, "expected key=value in header, got '" + w + "'");
        const std::string key = w.substr(0, eq), value = w.substr(eq + 1);
        if (key == "modes") {
          const auto v = to_integer(value);
          if (!v || *v < 1) throw ParseError(source, line_no, "modes must be a positive integer");
          modes = static_cast<int>(*v);
        } else if (key == "horizon") {
          const auto v = to_double(value);
          if (!v || !(*v >= 0.0) || !std::isfinite(*v))
            throw ParseError(source, line_no, "horizon must be a finite number >= 0");
          horizon = *v;
        } else {
          throw ParseError(source, line_no, "unknown header key '" + key + "'");
        }
      }
      if (!modes || !horizon) throw ParseError(source, line_no, "header needs modes=<m> horizon=<T>");
      header = true;
      continue;
    }
    const auto w = words(line);
    if (w.size() != 2) throw ParseError(source, line_no, "expected '<time> <mode>'");
    const auto t = to_double(w[0]);
    const auto g = to_integer(w[1]);
    if (!t || !std::isfinite(*t)) throw ParseError(source, line_no, "bad time '" + w[0] + "'");
    if (!g || *g < 1 || *g > *modes) throw ParseError(source, line_no, "mode must be in 1.." + std::to_string(*modes));
    if (labels.empty()) {
      if (*t != 0.0) throw ParseError(source, line_no, "first entry must be at time 0");
    } else {
      times.push_back(*t);
    }
    labels.push_back(static_cast<Mode>(*g));
  }
  if (!header) throw ParseError(source, 0, "empty signal file");
  if (labels.empty()) throw ParseError(source, line_no, "missing initial mode line '0 <mode>'");
  try {
    return SwitchingSignal(*modes, *horizon, std::move(times), std::move(labels));
  } catch (const std::invalid_argument& e) {
    throw ParseError(source, 0, e.what());
  }
}

SwitchingSignal read_signal_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  return read_signal(in, path.string());
}

void write_signal(std::ostream& out, const SwitchingSignal& signal) {
  out << "modes=" << signal.mode_count() << " horizon=" << format_number(signal.horizon()) << "\n";
  out << "0 " << signal.initial_mode() << "\n";
  for (std::size_t i = 0; i < signal.switch_count(); ++i)
    out << format_number(signal.switch_times()[i]) << " " << signal.modes()[i + 1] << "\n";
}

void write_trajectory_csv(std::ostream& out, const Trajectory<double>& traj, const LyapunovCandidate<double>* V) {
  const int n = traj.dimension();
  out << "t";
  for (int i = 1; i <= n; ++i) out << ",x" << i;
  out << ",sigma";
  if (V) out << ",V";
  out << "\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    out << format_number(traj.times[k]);
    for (int i = 0; i < n; ++i) out << "," << format_number(traj.states[k][i]);
    out << "," << traj.modes[k];
    if (V) out << "," << format_number((*V)(traj.states[k], traj.modes[k]));
    out << "\n";
  }
}

void write_class_k_csv(std::ostream& out, const EnvelopeReport& report) {
  out << "r,m,M,alpha1,alpha2\n";
  for (const auto& row : report.table)
    out << format_number(row.r) << "," << format_number(row.m_raw) << "," << format_number(row.M_raw) << ","
        << format_number(row.alpha1) << "," << format_number(row.alpha2) << "\n";
}

void write_strict_decrease_csv(std::ostream& out, const StrictDecreaseReport& report) {
  out << "r,alpha3\n";
  for (const auto& row : report.table) out << format_number(row.r) << "," << format_number(row.alpha3) << "\n";
}

void write_uniform_envelope_csv(std::ostream& out, const UniformEnvelope& env) {
  out << "r_lo,r_hi,r_obs,alpha_raw,alpha,restarts\n";
  for (const auto& row : env.table)
    out << format_number(row.r_lo) << "," << format_number(row.r_hi) << "," << format_number(row.r_obs) << ","
        << format_number(row.alpha_raw) << "," << format_number(row.alpha) << "," << row.restarts << "\n";
}

void write_kl_envelope_csv(std::ostream& out, const KlEnvelope& env) {
  out << "s,beta_table,beta_fit\n";
  for (const auto& [s, beta] : env.fallback)
    out << format_number(s) << "," << format_number(beta) << "," << format_number(env.C * std::exp(-env.lambda * s))
        << "\n";
}

void write_omega_csv(std::ostream& out, const OmegaEstimate<double>& est) {
  const int n = est.points.empty() ? 0 : static_cast<int>(est.points.front().size());
  for (int i = 1; i <= n; ++i) out << (i > 1 ? "," : "") << "xi_" << i;
  out << (n ? "," : "") << "hits\n";
  for (std::size_t k = 0; k < est.points.size(); ++k) {
    for (int i = 0; i < n; ++i) out << format_number(est.points[k][i]) << ",";
    out << est.hits[k] << "\n";
  }
}

void write_omega_sharp_csv(std::ostream& out, const OmegaSharpEstimate<double>& est) {
  const int n = est.pairs.empty() ? 0 : static_cast<int>(est.pairs.front().xi.size());
  for (int i = 1; i <= n; ++i) out << "xi_" << i << ",";
  out << "gamma,r_hat,hits\n";
  for (const auto& p : est.pairs) {
    for (int i = 0; i < n; ++i) out << format_number(p.xi[i]) << ",";
    out << p.mode << "," << format_number(p.r_hat.value()) << "," << p.hits << "\n";
  }
}

namespace {

struct Entry {
  std::string value;
  std::size_t line;
};

class ScenarioReader {
 public:
  ScenarioReader(std::string source, std::map<std::string, Entry> entries, std::vector<Entry> x0s)
      : source_(std::move(source)), entries_(std::move(entries)), x0s_(std::move(x0s)) {}

  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  std::string text(const std::string& key) const { return entries_.at(key).value; }

  ParseError error(const std::string& key, const std::string& message) const {
    return ParseError(source_, entries_.at(key).line, key + ": " + message);
  }

  void positive(const std::string& key, double& slot) const {
    if (!has(key)) return;
    const auto v = to_double(text(key));
    if (!v || !(*v > 0.0) || std::isnan(*v)) throw error(key, "expected a positive number");
    slot = *v;
  }

  void fraction(const std::string& key, double& slot) const {
    if (!has(key)) return;
    const auto v = to_double(text(key));
    if (!v || !(*v > 0.0 && *v < 1.0)) throw error(key, "expected a number in (0, 1)");
    slot = *v;
  }

  template <typename Int>
  void integer(const std::string& key, Int& slot, long long lo) const {
    if (!has(key)) return;
    const auto v = to_integer(text(key));
    if (!v || *v < lo) throw error(key, "expected an integer >= " + std::to_string(lo));
    slot = static_cast<Int>(*v);
  }

  std::vector<double> list(const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : split(text(key), ',')) {
      const auto v = to_double(item);
      if (!v || !std::isfinite(*v)) throw error(key, "bad number '" + item + "'");
      out.push_back(*v);
    }
    if (out.empty()) throw error(key, "empty list");
    return out;
  }

  std::vector<Vector<double>> explicit_x0(int dim) const {
    std::vector<Vector<double>> out;
    for (const auto& e : x0s_) {
      std::vector<double> c;
      for (const auto& item : split(e.value, ',')) {
        const auto v = to_double(item);
        if (!v || !std::isfinite(*v)) throw ParseError(source_, e.line, "x0: bad number '" + item + "'");
        c.push_back(*v);
      }
      if (static_cast<int>(c.size()) != dim)
        throw ParseError(source_, e.line, "x0: expected " + std::to_string(dim) + " components");
      out.push_back(Eigen::Map<Vector<double>>(c.data(), dim));
    }
    return out;
  }

 private:
  std::string source_;
  std::map<std::string, Entry> entries_;
  std::vector<Entry> x0s_;
};

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "id",          "system",        "signal",       "tau_d",          "n0",
      "seed",        "signal_file",   "horizon",      "x0_radii",       "x0_directions",
      "rtol",        "atol",          "max_dx",       "event_tol",      "bound",
      "cluster_tol", "tail_fraction", "lasalle_tol",  "gas_eps",        "probe_delta",
      "condition3_tol", "compliance_tol", "decrease_margin", "tv_star_tol", "region_r_min",
      "region_r_max", "output"};
  return keys;
}

}  // namespace

ScenarioFile read_scenario(std::istream& in, const std::string& source, const std::filesystem::path& base_dir) {
  std::map<std::string, Entry> entries;
  std::vector<Entry> x0s;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = strip_comment(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(source, line_no, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (value.empty()) throw ParseError(source, line_no, key + ": missing value");
    if (key == "x0") {
      x0s.push_back({value, line_no});
      continue;
    }
    if (!known_keys().count(key)) throw ParseError(source, line_no, "unknown key '" + key + "'");
    if (entries.count(key)) throw ParseError(source, line_no, "duplicate key '" + key + "'");
    entries[key] = {value, line_no};
  }
  if (entries.empty() && x0s.empty()) throw ParseError(source, 0, "empty scenario file");
  const ScenarioReader r(source, entries, x0s);
  if (!r.has("system")) throw ParseError(source, 0, "missing required key 'system'");

  const std::string system = r.text("system");
  std::optional<GuasScenario<double>> base = builtin::scenario_by_id(system);
  if (!base) {
    if (system != "center") throw r.error("system", "unknown system '" + system + "'");
    base = GuasScenario<double>{"center", builtin::center_system(), builtin::quadratic(1.0)};
    base->initial_conditions = builtin::polar_grid({0.5, 1.0, 2.0}, 4);
  }
  GuasScenario<double> sc = std::move(*base);
  if (r.has("id")) sc.id = r.text("id");

  if (r.has("signal")) {
    const std::string kind = r.text("signal");
    sc.feedback.reset();
    sc.generator.reset();
    sc.fixed_signal.reset();
    if (kind == "feedback") {
      if (system != "example1" && system != "two_centers")
        throw r.error("signal", "system '" + system + "' has no feedback rule");
      sc.feedback = builtin::sign_rule();
    } else if (kind == "generator") {
      if (sc.system.mode_count() < 2) throw r.error("signal", "generator needs at least two modes");
      sc.generator = AdtClass(0.5, 2);
    } else if (kind == "file") {
      if (!r.has("signal_file")) throw r.error("signal", "signal = file needs signal_file");
    } else {
      throw r.error("signal", "expected feedback, generator or file");
    }
  }
  if (r.has("tau_d") || r.has("n0")) {
    if (!sc.generator) throw r.error(r.has("tau_d") ? "tau_d" : "n0", "only valid with signal = generator");
    double tau = sc.generator->tau_d;
    int n0 = sc.generator->n0;
    r.positive("tau_d", tau);
    r.integer("n0", n0, 1);
    sc.generator = AdtClass(tau, n0);
  }
  r.integer("seed", sc.seed, 0);
  r.positive("horizon", sc.horizon);

  if (r.has("signal_file")) {
    if (!r.has("signal") || r.text("signal") != "file") throw r.error("signal_file", "needs signal = file");
    std::filesystem::path p = r.text("signal_file");
    if (p.is_relative()) p = base_dir / p;
    std::optional<SwitchingSignal> sig;
    try {
      sig = read_signal_file(p);
    } catch (const ParseError& e) {
      throw r.error("signal_file", e.what());
    }
    if (sig->mode_count() != sc.system.mode_count()) throw r.error("signal_file", "mode count differs from system");
    if (r.has("horizon") && sig->horizon() != sc.horizon) throw r.error("signal_file", "horizon differs from scenario");
    sc.horizon = sig->horizon();
    sc.fixed_signal = std::move(sig);
  }
  if (!sc.feedback && !sc.generator && !sc.fixed_signal)
    throw ParseError(source, 0, "system '" + system + "' needs 'signal = file' with signal_file");

  if (r.has("x0_radii") || r.has("x0_directions") || !x0s.empty()) {
    std::vector<Vector<double>> grid;
    if (r.has("x0_radii") || r.has("x0_directions")) {
      if (!r.has("x0_radii")) throw r.error("x0_directions", "needs x0_radii");
      int directions = 4;
      r.integer("x0_directions", directions, 1);
      const auto radii = r.list("x0_radii");
      for (double v : radii)
        if (v < 0.0) throw r.error("x0_radii", "radii must be >= 0");
      grid = builtin::polar_grid(radii, directions);
    }
    for (auto& x : r.explicit_x0(sc.system.dimension())) grid.push_back(std::move(x));
    sc.initial_conditions = std::move(grid);
  }
  if (sc.initial_conditions.empty()) throw ParseError(source, 0, "empty initial-condition grid");

  r.positive("rtol", sc.integrator.rtol);
  r.positive("atol", sc.integrator.atol);
  r.positive("max_dx", sc.integrator.max_dx);
  r.positive("event_tol", sc.integrator.event_tol);
  r.positive("bound", sc.integrator.bound);

  auto& an = sc.analysis;
  r.positive("cluster_tol", an.cluster_tol);
  r.fraction("tail_fraction", an.tail_fraction);
  r.positive("lasalle_tol", an.lasalle_tol);
  r.positive("gas_eps", an.gas_eps);
  r.positive("probe_delta", an.probe_delta);
  r.positive("condition3_tol", an.condition3_tol);
  r.positive("compliance_tol", an.compliance_tol);
  r.positive("decrease_margin", an.decrease_margin);
  r.positive("tv_star_tol", an.tv_star_tol);
  r.positive("region_r_min", sc.region.r_min);
  r.positive("region_r_max", sc.region.r_max);
  if (sc.region.r_max < sc.region.r_min) throw r.error(r.has("region_r_max") ? "region_r_max" : "region_r_min",
                                                        "need region_r_min <= region_r_max");

  ScenarioFile out{std::move(sc), {}};
  out.output = r.has("output") ? std::filesystem::path(r.text("output")) : std::filesystem::path("out") / out.scenario.id;
  return out;
}

ScenarioFile read_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  return read_scenario(in, path.string(), path.parent_path());
}

}  // namespace switchinv::io
