#pragma once

#include "switchinv/integrator.hpp"
#include "switchinv/signal.hpp"

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace switchinv {

/// Closed covering {chi_g}: xi in chi_g iff boundary(xi, g) <= 0.
template <typename Scalar = double>
class Covering {
 public:
  explicit Covering(std::vector<ScalarField<Scalar>> boundaries) : boundaries_(std::move(boundaries)) {
    if (boundaries_.empty()) throw std::invalid_argument("Covering: need at least one region");
  }

  /// chi_g = R^n for every mode (b = -1).
  static Covering trivial(int modes) {
    return Covering(std::vector<ScalarField<Scalar>>(static_cast<std::size_t>(modes),
                                                     [](const Vector<Scalar>&) { return Scalar(-1); }));
  }

  int size() const { return static_cast<int>(boundaries_.size()); }

  Scalar boundary(const Vector<Scalar>& xi, Mode g) const {
    return boundaries_.at(static_cast<std::size_t>(g - 1))(xi);
  }
  bool contains(const Vector<Scalar>& xi, Mode g, Scalar tol = Scalar(0)) const { return boundary(xi, g) <= tol; }

 private:
  std::vector<ScalarField<Scalar>> boundaries_;
};

/// x' = f(x, g), g in {1..m}, with the covering that admissible trajectories respect.
template <typename Scalar = double>
class SwitchedSystem {
 public:
  SwitchedSystem(int dimension, std::vector<VectorField<Scalar>> fields, Covering<Scalar> covering)
      : dimension_(dimension), fields_(std::move(fields)), covering_(std::move(covering)) {
    if (dimension_ < 1) throw std::invalid_argument("SwitchedSystem: dimension must be >= 1");
    if (fields_.empty()) throw std::invalid_argument("SwitchedSystem: need at least one vector field");
    if (covering_.size() != static_cast<int>(fields_.size()))
      throw std::invalid_argument("SwitchedSystem: covering and field family differ in size");
  }

  int dimension() const { return dimension_; }
  ModeSet modes() const { return ModeSet(static_cast<int>(fields_.size())); }
  int mode_count() const { return static_cast<int>(fields_.size()); }
  const Covering<Scalar>& covering() const { return covering_; }
  const VectorField<Scalar>& field(Mode g) const { return fields_.at(static_cast<std::size_t>(g - 1)); }
  Vector<Scalar> operator()(const Vector<Scalar>& xi, Mode g) const { return field(g)(xi); }

  SwitchedSystem with_covering(Covering<Scalar> c) const { return SwitchedSystem(dimension_, fields_, std::move(c)); }

 private:
  int dimension_;
  std::vector<VectorField<Scalar>> fields_;
  Covering<Scalar> covering_;
};

/// State feedback sigma(t) = select(x(t)). surface(xi, g) is a signed function whose
/// zero set bounds the region where g is selected; it drives event location.
template <typename Scalar = double>
struct FeedbackRule {
  std::function<Mode(const Vector<Scalar>&)> select;
  std::function<Scalar(const Vector<Scalar>&, Mode)> surface;
};

/// Sampled pair (x, sigma). Switch times are sample times; the sample at a switch
/// carries the new mode.
template <typename Scalar = double>
struct Trajectory {
  std::vector<double> times;
  std::vector<Vector<Scalar>> states;
  std::vector<Mode> modes;
  SwitchingSignal signal;
  /// Sample index of t_0 = 0 and of every switch time.
  std::vector<std::size_t> switch_samples;
  /// |surface| at each located switch (feedback integration only).
  std::vector<double> event_residuals;
  IntegratorStats stats;

  double horizon() const { return signal.horizon(); }
  std::size_t size() const { return times.size(); }
  int dimension() const { return states.empty() ? 0 : static_cast<int>(states.front().size()); }

  /// Inclusive sample range [first, last] of segment i; `last` is the sample at the
  /// next switch, which belongs to segment i by continuity of x.
  std::pair<std::size_t, std::size_t> segment(std::size_t i) const {
    const std::size_t first = switch_samples.at(i);
    const std::size_t last = i + 1 < switch_samples.size() ? switch_samples[i + 1] : times.size() - 1;
    return {first, last};
  }
  std::size_t segment_count() const { return switch_samples.size(); }
  Mode segment_mode(std::size_t i) const { return signal.modes().at(i); }

  /// Largest |x(t)| over samples.
  double sup_norm() const {
    double m = 0.0;
    for (const auto& x : states) m = std::max(m, static_cast<double>(x.norm()));
    return m;
  }
};

namespace detail {

template <typename Scalar>
void push_sample(Trajectory<Scalar>& traj, double t, const Vector<Scalar>& x, Mode g) {
  traj.times.push_back(t);
  traj.states.push_back(x);
  traj.modes.push_back(g);
}

}  // namespace detail

/// Integrates the time-triggered trajectory, restarting at every switch time.
template <typename Scalar>
Trajectory<Scalar> integrate(const SwitchedSystem<Scalar>& system, const Vector<Scalar>& x0,
                             const SwitchingSignal& signal, const IntegratorOptions& opts = {}) {
  if (x0.size() != system.dimension()) throw std::invalid_argument("integrate: x0 has wrong dimension");
  if (!x0.allFinite()) throw std::invalid_argument("integrate: x0 must be finite");
  if (signal.mode_count() != system.mode_count())
    throw std::invalid_argument("integrate: signal and system mode counts differ");

  Trajectory<Scalar> traj{{}, {}, {}, signal, {}, {}, {}};
  detail::push_sample(traj, 0.0, x0, signal.initial_mode());
  traj.switch_samples.push_back(0);

  const auto& t = signal.switch_times();
  Vector<Scalar> x = x0;
  double h = 0.0;
  for (std::size_t i = 0; i <= t.size(); ++i) {
    const double start = i == 0 ? 0.0 : t[i - 1];
    const double stop = i < t.size() ? t[i] : signal.horizon();
    const Mode g = signal.modes()[i];
    const Mode next = i < t.size() ? signal.modes()[i + 1] : g;
    auto end = integrate_arc<Scalar>(system.field(g), start, x, stop, opts, traj.stats, h,
                                     [&](double s, const Vector<Scalar>& y) {
                                       detail::push_sample(traj, s, y, s >= stop && i < t.size() ? next : g);
                                     });
    x = end.x;
    if (i < t.size()) {
      if (traj.times.back() != stop) detail::push_sample(traj, stop, x, next);
      traj.switch_samples.push_back(traj.times.size() - 1);
    }
  }
  return traj;
}

/// Integrates under state feedback, locating each region crossing by bisection.
/// Crossings that keep the selected mode are not switches.
template <typename Scalar>
Trajectory<Scalar> integrate_feedback(const SwitchedSystem<Scalar>& system, const Vector<Scalar>& x0,
                                      const FeedbackRule<Scalar>& rule, double horizon,
                                      const IntegratorOptions& opts = {}) {
  if (x0.size() != system.dimension()) throw std::invalid_argument("integrate_feedback: x0 has wrong dimension");
  if (!x0.allFinite()) throw std::invalid_argument("integrate_feedback: x0 must be finite");
  if (!(horizon >= 0.0)) throw std::domain_error("integrate_feedback: horizon must be >= 0");

  Mode g = rule.select(x0);
  std::vector<double> switch_times;
  std::vector<Mode> labels{g};
  std::vector<double> residuals;
  std::vector<std::size_t> switch_samples{0};
  std::vector<double> times{0.0};
  std::vector<Vector<Scalar>> states{x0};
  std::vector<Mode> modes{g};
  IntegratorStats stats;

  double t = 0.0;
  double h = 0.0;
  Vector<Scalar> x = x0;
  while (t < horizon) {
    const Mode active = g;
    auto leaves = [&rule, active](const Vector<Scalar>& y) { return rule.select(y) != active; };
    auto surface = [&rule, active](const Vector<Scalar>& y) { return rule.surface(y, active); };
    auto end = integrate_arc<Scalar>(
        system.field(active), t, x, horizon, opts, stats, h,
        [&](double s, const Vector<Scalar>& y) {
          times.push_back(s);
          states.push_back(y);
          modes.push_back(active);
        },
        leaves, surface);
    t = end.t;
    x = end.x;
    if (!end.crossed) break;
    g = rule.select(x);
    modes.back() = g;
    switch_times.push_back(t);
    labels.push_back(g);
    residuals.push_back(end.residual);
    switch_samples.push_back(times.size() - 1);
    if (switch_times.size() > opts.max_switches) throw ChatteringError(opts.max_switches, t);
  }

  Trajectory<Scalar> traj{std::move(times), std::move(states), std::move(modes),
                          SwitchingSignal(system.mode_count(), horizon, std::move(switch_times), std::move(labels)),
                          std::move(switch_samples), std::move(residuals), stats};
  return traj;
}

/// Restarted trajectory t -> (x(t + s), sigma(t + s)) where s is the first sample time >= s_min.
template <typename Scalar>
Trajectory<Scalar> shifted(const Trajectory<Scalar>& traj, double s_min) {
  auto it = std::lower_bound(traj.times.begin(), traj.times.end(), s_min);
  if (it == traj.times.end()) throw std::domain_error("shifted: restart time past the last sample");
  const auto k0 = static_cast<std::size_t>(it - traj.times.begin());
  const double s = traj.times[k0];
  Trajectory<Scalar> out{{}, {}, {}, shift(traj.signal, s), {0}, {}, traj.stats};
  for (std::size_t k = k0; k < traj.size(); ++k) {
    out.times.push_back(k == k0 ? 0.0 : traj.times[k] - s);
    out.states.push_back(traj.states[k]);
    out.modes.push_back(traj.modes[k]);
  }
  out.modes.front() = out.signal.initial_mode();
  for (std::size_t idx : traj.switch_samples)
    if (idx > k0) out.switch_samples.push_back(idx - k0);
  return out;
}

struct CoveringViolation {
  double t;
  Mode mode;
  double margin;
};

struct ComplianceReport {
  bool compliant = true;
  double worst_margin = -std::numeric_limits<double>::infinity();
  std::vector<CoveringViolation> violations;
};

/// x(t) in chi_{sigma(t)} at every sample, up to tol.
template <typename Scalar>
ComplianceReport check_covering_compliance(const Trajectory<Scalar>& traj, const Covering<Scalar>& covering,
                                           double tol) {
  ComplianceReport report;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double margin = static_cast<double>(covering.boundary(traj.states[k], traj.modes[k]));
    report.worst_margin = std::max(report.worst_margin, margin);
    if (margin > tol) {
      report.compliant = false;
      report.violations.push_back({traj.times[k], traj.modes[k], margin});
    }
  }
  return report;
}

/// Gamma* = {g : 0 in chi_g}.
template <typename Scalar>
std::vector<Mode> gamma_star(const Covering<Scalar>& covering, int dimension) {
  const Vector<Scalar> origin = Vector<Scalar>::Zero(dimension);
  std::vector<Mode> out;
  for (Mode g = 1; g <= covering.size(); ++g)
    if (covering.contains(origin, g)) out.push_back(g);
  return out;
}

struct EquilibriumReport {
  bool passed = true;
  std::vector<std::pair<Mode, double>> violators;
  std::vector<Mode> gamma_star;
};

/// |f_g(0)| <= tol for every g in Gamma*.
template <typename Scalar>
EquilibriumReport check_equilibrium(const SwitchedSystem<Scalar>& system, double tol) {
  EquilibriumReport report;
  report.gamma_star = gamma_star(system.covering(), system.dimension());
  const Vector<Scalar> origin = Vector<Scalar>::Zero(system.dimension());
  for (Mode g : report.gamma_star) {
    const double n = static_cast<double>(system(origin, g).norm());
    if (n > tol) {
      report.passed = false;
      report.violators.emplace_back(g, n);
    }
  }
  return report;
}

/// Points of `samples` that lie in no region of the covering.
template <typename Scalar>
std::vector<Vector<Scalar>> uncovered_points(const Covering<Scalar>& covering,
                                             const std::vector<Vector<Scalar>>& samples) {
  std::vector<Vector<Scalar>> out;
  for (const auto& xi : samples) {
    bool hit = false;
    for (Mode g = 1; g <= covering.size() && !hit; ++g) hit = covering.contains(xi, g);
    if (!hit) out.push_back(xi);
  }
  return out;
}

}  // namespace switchinv
