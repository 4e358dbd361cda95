#pragma once

#include "switchinv/system.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace switchinv {

/// V(xi, g), C^1 in xi. Without a supplied gradient, central differences with step
/// 1e-6 (1 + |xi|) are used.
template <typename Scalar = double>
struct LyapunovCandidate {
  std::function<Scalar(const Vector<Scalar>&, Mode)> value;
  std::function<Vector<Scalar>(const Vector<Scalar>&, Mode)> gradient;
  /// Open region where V is defined; empty means R^n.
  std::function<bool(const Vector<Scalar>&)> domain;

  Scalar operator()(const Vector<Scalar>& xi, Mode g) const { return value(xi, g); }

  bool in_domain(const Vector<Scalar>& xi) const { return !domain || domain(xi); }

  Vector<Scalar> grad(const Vector<Scalar>& xi, Mode g) const {
    return gradient ? gradient(xi, g) : finite_difference_gradient(xi, g);
  }

  Vector<Scalar> finite_difference_gradient(const Vector<Scalar>& xi, Mode g) const {
    const Scalar h = Scalar(1e-6) * (Scalar(1) + xi.norm());
    Vector<Scalar> out(xi.size());
    Vector<Scalar> p = xi;
    for (Eigen::Index i = 0; i < xi.size(); ++i) {
      p[i] = xi[i] + h;
      const Scalar up = value(p, g);
      p[i] = xi[i] - h;
      const Scalar down = value(p, g);
      p[i] = xi[i];
      out[i] = (up - down) / (Scalar(2) * h);
    }
    return out;
  }
};

/// Per-mode nonnegative outputs y = W_g(x).
template <typename Scalar = double>
struct OutputFunction {
  std::vector<ScalarField<Scalar>> per_mode;

  Scalar operator()(const Vector<Scalar>& xi, Mode g) const { return per_mode.at(static_cast<std::size_t>(g - 1))(xi); }
};

/// Annulus r_min <= |xi| <= r_max sampled on a radius x direction grid plus
/// pseudo-random points. In 2-D the grid directions are the coordinate axes and
/// `directions` angles offset by half a step; in other dimensions the non-axis
/// directions are random.
struct SampleRegion {
  double r_min = 0.1;
  double r_max = 2.0;
  int radii = 20;
  int directions = 32;
  int random = 256;
  std::uint64_t seed = 1;
};

template <typename Scalar = double>
struct SamplePoint {
  Vector<Scalar> xi;
  double radius;
  /// Grid radius index, -1 for random points.
  int radius_index;
};

template <typename Scalar = double>
std::vector<double> grid_radii(const SampleRegion& region) {
  std::vector<double> r;
  for (int k = 0; k < region.radii; ++k)
    r.push_back(region.radii == 1 ? region.r_min
                                  : region.r_min + (region.r_max - region.r_min) * k / (region.radii - 1));
  return r;
}

template <typename Scalar = double>
std::vector<SamplePoint<Scalar>> sample_points(const SampleRegion& region, int dimension) {
  if (!(region.r_min > 0.0) || region.r_max < region.r_min)
    throw std::invalid_argument("SampleRegion: need 0 < r_min <= r_max");
  std::mt19937_64 rng(region.seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform(region.r_min, region.r_max);
  auto random_direction = [&] {
    Vector<Scalar> d(dimension);
    do {
      for (int i = 0; i < dimension; ++i) d[i] = static_cast<Scalar>(normal(rng));
    } while (d.norm() == Scalar(0));
    return Vector<Scalar>(d / d.norm());
  };

  std::vector<Vector<Scalar>> dirs;
  for (int i = 0; i < dimension; ++i) {
    for (double sgn : {1.0, -1.0}) {
      Vector<Scalar> e = Vector<Scalar>::Zero(dimension);
      e[i] = static_cast<Scalar>(sgn);
      dirs.push_back(e);
    }
  }
  for (int k = 0; k < region.directions; ++k) {
    if (dimension == 2) {
      const double th = 2.0 * std::numbers::pi * (k + 0.5) / region.directions;
      Vector<Scalar> d(2);
      d << static_cast<Scalar>(std::cos(th)), static_cast<Scalar>(std::sin(th));
      dirs.push_back(d);
    } else {
      dirs.push_back(random_direction());
    }
  }

  std::vector<SamplePoint<Scalar>> out;
  const auto radii = grid_radii(region);
  for (std::size_t k = 0; k < radii.size(); ++k)
    for (const auto& d : dirs) out.push_back({Vector<Scalar>(static_cast<Scalar>(radii[k]) * d), radii[k], static_cast<int>(k)});
  for (int k = 0; k < region.random; ++k) {
    const double r = uniform(rng);
    out.push_back({Vector<Scalar>(static_cast<Scalar>(r) * random_direction()), r, -1});
  }
  return out;
}

/// dV/dxi(xi, g) . f(xi, g)
template <typename Scalar>
Scalar lie_derivative(const LyapunovCandidate<Scalar>& V, const SwitchedSystem<Scalar>& system,
                      const Vector<Scalar>& xi, Mode g) {
  return V.grad(xi, g).dot(system(xi, g));
}

template <typename Scalar>
std::vector<double> lyapunov_series(const LyapunovCandidate<Scalar>& V, const Trajectory<Scalar>& traj) {
  std::vector<double> out(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) out[k] = static_cast<double>(V(traj.states[k], traj.modes[k]));
  return out;
}

template <typename Scalar = double>
struct DecreaseReport {
  bool passed = true;
  double worst = -std::numeric_limits<double>::infinity();
  Vector<Scalar> worst_point;
  Mode worst_mode = 0;
  std::size_t checked = 0;
};

/// Lie derivative <= margin at every sampled xi in chi_g, for every g.
template <typename Scalar>
DecreaseReport<Scalar> check_decrease_on_covering(const LyapunovCandidate<Scalar>& V,
                                                  const SwitchedSystem<Scalar>& system,
                                                  const SampleRegion& region, double margin) {
  DecreaseReport<Scalar> report;
  for (const auto& p : sample_points<Scalar>(region, system.dimension())) {
    if (!V.in_domain(p.xi)) continue;
    for (Mode g = 1; g <= system.mode_count(); ++g) {
      if (!system.covering().contains(p.xi, g)) continue;
      const double d = static_cast<double>(lie_derivative(V, system, p.xi, g));
      ++report.checked;
      if (d > report.worst) {
        report.worst = d;
        report.worst_point = p.xi;
        report.worst_mode = g;
      }
    }
  }
  report.passed = report.worst <= margin;
  return report;
}

struct EnvelopeRow {
  double r;
  double m_raw, M_raw;
  /// Monotone regularizations: largest nondecreasing minorant of m, smallest majorant of M.
  double alpha1, alpha2;
};

struct EnvelopeReport {
  bool passed = true;
  bool positive = true;
  bool zero_at_origin = true;
  /// True when m and M were already nondecreasing before regularization.
  bool monotone_raw = true;
  std::vector<EnvelopeRow> table;
  std::vector<std::string> failures;
};

/// Empirical class-K envelopes of V over the grid radii, restricted to xi in chi_g.
template <typename Scalar>
EnvelopeReport check_class_k_bounds(const LyapunovCandidate<Scalar>& V, const Covering<Scalar>& covering,
                                    int dimension, const SampleRegion& region, double zero_tol = 1e-12) {
  EnvelopeReport report;
  const auto radii = grid_radii(region);
  std::vector<double> m(radii.size(), std::numeric_limits<double>::infinity());
  std::vector<double> M(radii.size(), -std::numeric_limits<double>::infinity());
  for (const auto& p : sample_points<Scalar>(region, dimension)) {
    if (p.radius_index < 0 || !V.in_domain(p.xi)) continue;
    const auto k = static_cast<std::size_t>(p.radius_index);
    for (Mode g = 1; g <= covering.size(); ++g) {
      if (!covering.contains(p.xi, g)) continue;
      const double v = static_cast<double>(V(p.xi, g));
      m[k] = std::min(m[k], v);
      M[k] = std::max(M[k], v);
    }
  }

  const Vector<Scalar> origin = Vector<Scalar>::Zero(dimension);
  for (Mode g : gamma_star(covering, dimension)) {
    const double v0 = static_cast<double>(V(origin, g));
    if (std::abs(v0) > zero_tol) {
      report.zero_at_origin = false;
      report.failures.push_back("V(0, " + std::to_string(g) + ") = " + std::to_string(v0));
    }
  }

  report.table.resize(radii.size());
  double running_max = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < radii.size(); ++k) {
    running_max = std::max(running_max, M[k]);
    report.table[k] = {radii[k], m[k], M[k], 0.0, running_max};
    if (!(m[k] > 0.0)) {
      report.positive = false;
      report.failures.push_back("m(" + std::to_string(radii[k]) + ") = " + std::to_string(m[k]));
    }
    if (k > 0 && (m[k] < m[k - 1] || M[k] < M[k - 1])) report.monotone_raw = false;
  }
  double running_min = std::numeric_limits<double>::infinity();
  for (std::size_t k = radii.size(); k-- > 0;) {
    running_min = std::min(running_min, m[k]);
    report.table[k].alpha1 = running_min;
  }
  report.passed = report.positive && report.zero_at_origin;
  return report;
}

struct Condition3Report {
  /// (a) V(x(t_j), sigma(t_j)) <= V(x(t_{i+1}), sigma(t_i)) for switch pairs with equal modes.
  bool switch_pairs_ok = true;
  /// (b) V(x(t), sigma(t)) >= V(x(t'), sigma(t')) - tol for t <= t' with equal modes.
  bool sample_pairs_ok = true;
  double worst_switch_excess = -std::numeric_limits<double>::infinity();
  double worst_sample_excess = -std::numeric_limits<double>::infinity();
  std::optional<std::pair<double, double>> switch_witness;
  std::optional<std::pair<double, double>> sample_witness;

  bool passed() const { return switch_pairs_ok && sample_pairs_ok; }
};

/// Both pair scans use a running minimum per mode, so they are linear in the
/// number of samples. Segment end samples are evaluated with the segment's mode
/// (left limit), which makes the switch-pair set a subset of the sample-pair set.
template <typename Scalar>
Condition3Report check_condition3(const LyapunovCandidate<Scalar>& V, const Trajectory<Scalar>& traj, double tol) {
  Condition3Report report;
  const int m = traj.signal.mode_count();
  struct Running {
    double value = std::numeric_limits<double>::infinity();
    double time = 0.0;
  };

  // (a) switch pairs, t_0 = 0 included.
  std::vector<Running> best(static_cast<std::size_t>(m + 1));
  for (std::size_t j = 0; j < traj.segment_count(); ++j) {
    const Mode g = traj.segment_mode(j);
    const auto [first, last] = traj.segment(j);
    const double vj = static_cast<double>(V(traj.states[first], g));
    auto& b = best[static_cast<std::size_t>(g)];
    if (std::isfinite(b.value)) {
      const double excess = vj - b.value;
      if (excess > report.worst_switch_excess) {
        report.worst_switch_excess = excess;
        if (excess > tol) report.switch_witness = std::make_pair(b.time, traj.times[first]);
      }
    }
    if (j + 1 < traj.segment_count()) {
      const double end_value = static_cast<double>(V(traj.states[last], g));
      if (end_value < b.value) b = {end_value, traj.times[first]};
    }
  }
  report.switch_pairs_ok = !(report.worst_switch_excess > tol);

  // (b) sample pairs.
  std::vector<Running> low(static_cast<std::size_t>(m + 1));
  for (std::size_t s = 0; s < traj.segment_count(); ++s) {
    const Mode g = traj.segment_mode(s);
    const auto [first, last] = traj.segment(s);
    auto& b = low[static_cast<std::size_t>(g)];
    for (std::size_t k = first; k <= last; ++k) {
      const double v = static_cast<double>(V(traj.states[k], g));
      if (std::isfinite(b.value)) {
        const double excess = v - b.value;
        if (excess > report.worst_sample_excess) {
          report.worst_sample_excess = excess;
          if (excess > tol) report.sample_witness = std::make_pair(b.time, traj.times[k]);
        }
      }
      if (v < b.value) b = {v, traj.times[k]};
    }
  }
  report.sample_pairs_ok = !(report.worst_sample_excess > tol);
  return report;
}

struct StrictDecreaseRow {
  double r;
  double worst;   // max lie derivative on |xi| = r
  double alpha3;  // -worst
};

struct StrictDecreaseReport {
  bool passed = true;
  std::vector<StrictDecreaseRow> table;
};

/// Per-radius worst Lie derivative w(r); passes iff w(r) < 0 on every grid radius.
template <typename Scalar>
StrictDecreaseReport check_strict_decrease(const LyapunovCandidate<Scalar>& V, const SwitchedSystem<Scalar>& system,
                                           const SampleRegion& region) {
  StrictDecreaseReport report;
  const auto radii = grid_radii(region);
  std::vector<double> w(radii.size(), -std::numeric_limits<double>::infinity());
  for (const auto& p : sample_points<Scalar>(region, system.dimension())) {
    if (p.radius_index < 0 || !V.in_domain(p.xi)) continue;
    for (Mode g = 1; g <= system.mode_count(); ++g) {
      if (!system.covering().contains(p.xi, g)) continue;
      auto& slot = w[static_cast<std::size_t>(p.radius_index)];
      slot = std::max(slot, static_cast<double>(lie_derivative(V, system, p.xi, g)));
    }
  }
  for (std::size_t k = 0; k < radii.size(); ++k) {
    report.table.push_back({radii[k], w[k], -w[k]});
    if (!(w[k] < 0.0)) report.passed = false;
  }
  return report;
}

template <typename Scalar = double>
struct DistinguishabilityReport {
  bool passed = false;
  double min_score = std::numeric_limits<double>::infinity();
  Vector<Scalar> argmin;
  std::size_t probed = 0;
  std::size_t skipped = 0;
  std::vector<std::string> warnings;
};

/// Falsification-style evidence for zero small-time distinguishability of (f_g, W_g):
/// for sampled x0 with |x0| >= r_min, s(x0) = max over [0, delta] of W_g(x(t)) under
/// mode g alone. Passes iff min s(x0) >= threshold (default 1e-8 r_min^2). This is
/// evidence, not a proof.
template <typename Scalar>
DistinguishabilityReport<Scalar> distinguishability_probe(const SwitchedSystem<Scalar>& system,
                                                          const OutputFunction<Scalar>& W, Mode g, double delta,
                                                          const SampleRegion& region,
                                                          std::optional<double> threshold = std::nullopt,
                                                          const IntegratorOptions& opts = {}) {
  if (!(delta > 0.0)) throw std::domain_error("distinguishability_probe: delta must be > 0");
  const double thr = threshold.value_or(1e-8 * region.r_min * region.r_min);
  DistinguishabilityReport<Scalar> report;
  for (const auto& p : sample_points<Scalar>(region, system.dimension())) {
    if (p.radius < region.r_min) continue;
    double score = static_cast<double>(W(p.xi, g));
    IntegratorStats stats;
    double h = 0.0;
    try {
      integrate_arc<Scalar>(system.field(g), 0.0, p.xi, delta, opts, stats, h,
                            [&](double, const Vector<Scalar>& y) { score = std::max(score, static_cast<double>(W(y, g))); });
    } catch (const FiniteEscapeError& e) {
      ++report.skipped;
      report.warnings.push_back(e.what());
      continue;
    }
    ++report.probed;
    if (score < report.min_score) {
      report.min_score = score;
      report.argmin = p.xi;
    }
  }
  report.passed = report.probed > 0 && report.min_score >= thr;
  return report;
}

}  // namespace switchinv
