#pragma once

#include "switchinv/invariance.hpp"
#include "switchinv/lyapunov.hpp"
#include "switchinv/report.hpp"
#include "switchinv/system.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace switchinv {

template <typename Scalar = double>
struct TrajectoryBatch {
  std::string scenario;
  std::string signal_source;
  double horizon = 0.0;
  std::vector<Vector<Scalar>> initial_conditions;
  std::vector<Trajectory<Scalar>> trajectories;
};

struct UniformEnvelopeRow {
  double r_lo, r_hi;
  /// Largest restart radius seen in the bin.
  double r_obs;
  double alpha_raw;
  /// Nondecreasing regularization (running max) of alpha_raw.
  double alpha;
  std::size_t restarts;
};

struct UniformEnvelope {
  bool passed = false;
  bool degenerate = false;
  std::vector<UniformEnvelopeRow> table;
  /// alpha / r_obs in the smallest populated positive-radius bin.
  double small_radius_gain = 0.0;
  double max_gain = 0.0;
  std::size_t restarts = 0;

  /// alpha at radius r (bin containing r; last bin beyond the range).
  double alpha_at(double r) const;
};

inline double UniformEnvelope::alpha_at(double r) const {
  for (const auto& row : table)
    if (r <= row.r_hi) return row.alpha;
  return table.empty() ? 0.0 : table.back().alpha;
}

namespace detail {

// suffix[k] = max_{j >= k} |x(t_j)|
template <typename Scalar>
std::vector<double> suffix_sup(const Trajectory<Scalar>& traj) {
  std::vector<double> s(traj.size());
  double m = 0.0;
  for (std::size_t k = traj.size(); k-- > 0;) {
    m = std::max(m, static_cast<double>(traj.states[k].norm()));
    s[k] = m;
  }
  return s;
}

template <typename Scalar>
std::size_t first_sample_at(const Trajectory<Scalar>& traj, double t) {
  return static_cast<std::size_t>(std::lower_bound(traj.times.begin(), traj.times.end(), t) - traj.times.begin());
}

}  // namespace detail

/// Uniform-stability envelope: alpha(r) is the largest sup_{t >= t0} |x(t)| over all
/// trajectories and restart times t0 with |x(t0)| in the radius bin of r (log bins over
/// the positive restart radii). Passes when the gain alpha / r in the smallest bin stays
/// below gain_limit, i.e. alpha(r) -> 0 as r -> 0 at the resolution of the batch.
template <typename Scalar>
UniformEnvelope fit_uniform_envelope(const TrajectoryBatch<Scalar>& batch, const std::vector<double>& restart_grid,
                                     int bins = 20, double gain_limit = 100.0) {
  struct Restart {
    double r0, sup;
  };
  std::vector<Restart> restarts;
  for (const auto& traj : batch.trajectories) {
    if (!(traj.sup_norm() < std::numeric_limits<double>::infinity()))
      throw FiniteEscapeError(traj.times.empty() ? 0.0 : traj.times.back());
    const auto sup = detail::suffix_sup(traj);
    for (double t0 : restart_grid) {
      const std::size_t k = detail::first_sample_at(traj, t0);
      if (k >= traj.size()) continue;
      restarts.push_back({static_cast<double>(traj.states[k].norm()), sup[k]});
    }
  }

  UniformEnvelope env;
  env.restarts = restarts.size();
  double r_min = std::numeric_limits<double>::infinity(), r_max = 0.0, zero_sup = 0.0;
  for (const auto& r : restarts) {
    if (r.r0 > 0.0) {
      r_min = std::min(r_min, r.r0);
      r_max = std::max(r_max, r.r0);
    } else {
      zero_sup = std::max(zero_sup, r.sup);
    }
  }
  if (!(r_max > 0.0)) {
    env.degenerate = true;
    env.table.push_back({0.0, 0.0, 0.0, zero_sup, zero_sup, restarts.size()});
    env.passed = zero_sup == 0.0;
    return env;
  }

  const int nb = r_max > r_min ? std::max(1, bins) : 1;
  const double span = std::log(r_max / r_min);
  env.table.resize(static_cast<std::size_t>(nb));
  for (int b = 0; b < nb; ++b) {
    const double lo = nb == 1 ? r_min : r_min * std::exp(span * b / nb);
    const double hi = nb == 1 ? r_max : r_min * std::exp(span * (b + 1) / nb);
    env.table[static_cast<std::size_t>(b)] = {lo, hi, 0.0, 0.0, 0.0, 0};
  }
  env.table.back().r_hi = r_max;
  for (const auto& r : restarts) {
    if (!(r.r0 > 0.0)) continue;
    int b = nb == 1 ? 0 : static_cast<int>(std::floor(nb * std::log(r.r0 / r_min) / span));
    b = std::clamp(b, 0, nb - 1);
    auto& row = env.table[static_cast<std::size_t>(b)];
    row.r_obs = std::max(row.r_obs, r.r0);
    row.alpha_raw = std::max(row.alpha_raw, r.sup);
    ++row.restarts;
  }
  double running = zero_sup;
  bool first = true;
  for (auto& row : env.table) {
    running = std::max(running, row.alpha_raw);
    row.alpha = running;
    if (row.restarts == 0) continue;
    const double gain = row.alpha_raw / row.r_obs;
    env.max_gain = std::max(env.max_gain, gain);
    if (first) {
      env.small_radius_gain = gain;
      first = false;
    }
  }
  env.passed = std::isfinite(env.max_gain) && env.small_radius_gain <= gain_limit;
  return env;
}

struct KlEnvelope {
  /// beta(r, s) = C r exp(-lambda s) covers every sample and lambda > 0.
  bool fit_ok = false;
  bool degenerate = false;
  double C = 1.0;
  double lambda = 0.0;
  /// Least-squares slope before the resolution cut.
  double lambda_raw = 0.0;
  /// min over samples of log beta - log |x|; >= 0 after the max-shift.
  double worst_slack = 0.0;
  std::size_t samples = 0;
  double time_span = 0.0;
  /// Table-form fallback: beta_table(s) = max over trajectories of sup_{t >= s} |x(t)| / |x(0)|.
  std::vector<std::pair<double, double>> fallback;
  bool fallback_decay = false;
};

/// Fits log|x(t)| <= log C + log|x(0)| - lambda t by least squares over samples with
/// |x(t)| > floor, then shifts log C up to the largest residual so every sample is
/// covered. A fitted decay smaller than min_decay over the whole sampled span is below
/// the resolution of the data and is reported as lambda = 0. When the exponential fit
/// fails, the table fallback is checked for a drop below fallback_ratio.
template <typename Scalar>
KlEnvelope fit_kl_envelope(const TrajectoryBatch<Scalar>& batch, double floor = 1e-9, double min_decay = 1e-6,
                           double fallback_ratio = 0.1, int fallback_points = 20) {
  KlEnvelope env;
  std::vector<std::pair<double, double>> pts;  // (t, log |x(t)| / |x(0)|)
  for (const auto& traj : batch.trajectories) {
    if (traj.size() == 0) continue;
    const double r0 = static_cast<double>(traj.states.front().norm());
    if (!(r0 > floor)) continue;
    for (std::size_t k = 0; k < traj.size(); ++k) {
      const double r = static_cast<double>(traj.states[k].norm());
      if (r > floor) pts.emplace_back(traj.times[k], std::log(r / r0));
    }
  }
  env.samples = pts.size();
  if (pts.empty()) {
    env.degenerate = true;
    env.fit_ok = true;
    return env;
  }

  double st = 0, sy = 0, stt = 0, sty = 0;
  for (const auto& [t, y] : pts) {
    st += t;
    sy += y;
    stt += t * t;
    sty += t * y;
    env.time_span = std::max(env.time_span, t);
  }
  const double n = static_cast<double>(pts.size());
  const double denom = n * stt - st * st;
  env.lambda_raw = denom > 0.0 ? -(n * sty - st * sy) / denom : 0.0;
  env.lambda = env.lambda_raw * env.time_span >= min_decay ? env.lambda_raw : std::min(env.lambda_raw, 0.0);

  double log_c = -std::numeric_limits<double>::infinity();
  std::vector<double> shifted(pts.size());
  for (std::size_t k = 0; k < pts.size(); ++k) {
    shifted[k] = pts[k].second + env.lambda * pts[k].first;
    log_c = std::max(log_c, shifted[k]);
  }
  env.worst_slack = std::numeric_limits<double>::infinity();
  for (double v : shifted) env.worst_slack = std::min(env.worst_slack, log_c - v);
  env.C = std::exp(log_c);
  env.fit_ok = env.lambda > 0.0;

  // Table fallback.
  double beta0 = 0.0;
  for (int p = 0; p < fallback_points; ++p) {
    const double s = batch.horizon * p / std::max(1, fallback_points - 1);
    double beta = 0.0;
    for (const auto& traj : batch.trajectories) {
      const double r0 = traj.size() ? static_cast<double>(traj.states.front().norm()) : 0.0;
      if (!(r0 > floor)) continue;
      const auto sup = detail::suffix_sup(traj);
      const std::size_t k = detail::first_sample_at(traj, s);
      if (k < traj.size()) beta = std::max(beta, sup[k] / r0);
    }
    if (p == 0) beta0 = beta;
    env.fallback.emplace_back(s, beta);
  }
  env.fallback_decay = !env.fallback.empty() && beta0 > 0.0 && env.fallback.back().second <= fallback_ratio * beta0;
  return env;
}

struct RemarkGasReport {
  bool passed = false;
  /// Smallest lag on the grid that works; +inf when none does.
  double T_hat = std::numeric_limits<double>::infinity();
  std::size_t restarts = 0;
};

/// Finds the smallest grid lag T such that |x(t0)| < R implies |x(t)| < eps for all
/// sampled t >= t0 + T. Restarts and lags both range over [0, horizon / 2] in `points`
/// steps so every tested (t0, T) pair has data behind it.
template <typename Scalar>
RemarkGasReport check_remark_gas(const TrajectoryBatch<Scalar>& batch, double R, double eps, int points = 41) {
  RemarkGasReport report;
  const double half = batch.horizon / 2.0;
  std::vector<double> grid;
  for (int p = 0; p < points; ++p) grid.push_back(points == 1 ? 0.0 : half * p / (points - 1));

  // worst[l] = largest sup_{t >= t0 + T_l} |x(t)| over qualifying restarts
  std::vector<double> worst(grid.size(), 0.0);
  for (const auto& traj : batch.trajectories) {
    const auto sup = detail::suffix_sup(traj);
    for (double t0 : grid) {
      const std::size_t k0 = detail::first_sample_at(traj, t0);
      if (k0 >= traj.size() || !(static_cast<double>(traj.states[k0].norm()) < R)) continue;
      ++report.restarts;
      for (std::size_t l = 0; l < grid.size(); ++l) {
        const std::size_t k = detail::first_sample_at(traj, traj.times[k0] + grid[l]);
        if (k < traj.size()) worst[l] = std::max(worst[l], sup[k]);
      }
    }
  }
  for (std::size_t l = 0; l < grid.size(); ++l) {
    if (worst[l] < eps) {
      report.T_hat = grid[l];
      report.passed = true;
      break;
    }
  }
  return report;
}

struct AnalysisOptions {
  double cluster_tol = 1e-2;
  double tail_fraction = 0.5;
  double decrease_margin = 1e-12;
  double condition3_tol = 1e-7;
  double compliance_tol = 1e-8;
  double equilibrium_tol = 1e-12;
  double lasalle_tol = 1e-2;
  double tv_star_tol = 1e-6;
  double gas_eps = 0.1;
  double probe_delta = 0.1;
  std::optional<double> probe_threshold;
  int restart_points = 21;
};

/// Everything guas_report needs: the system, its certificates, the admissible
/// trajectory family (feedback rule, generator class or fixed signal) and the batch grid.
template <typename Scalar = double>
struct GuasScenario {
  GuasScenario(std::string id_, SwitchedSystem<Scalar> system_, LyapunovCandidate<Scalar> V_)
      : id(std::move(id_)), system(std::move(system_)), V(std::move(V_)) {}

  std::string id;
  SwitchedSystem<Scalar> system;
  LyapunovCandidate<Scalar> V;
  std::optional<OutputFunction<Scalar>> W;
  std::optional<FeedbackRule<Scalar>> feedback;
  std::optional<AdtClass> generator;
  std::uint64_t seed = 1;
  std::optional<SwitchingSignal> fixed_signal;
  std::vector<Vector<Scalar>> initial_conditions;
  double horizon = 10.0;
  IntegratorOptions integrator;
  SampleRegion region;
  AnalysisOptions analysis;
};

/// One trajectory per initial condition. Generated signals use seed + index.
template <typename Scalar>
TrajectoryBatch<Scalar> simulate_batch(const GuasScenario<Scalar>& sc) {
  TrajectoryBatch<Scalar> batch;
  batch.scenario = sc.id;
  batch.horizon = sc.horizon;
  batch.initial_conditions = sc.initial_conditions;
  if (sc.feedback) batch.signal_source = "feedback";
  else if (sc.generator) batch.signal_source = "generator";
  else if (sc.fixed_signal) batch.signal_source = "file";
  else throw std::invalid_argument("simulate_batch: scenario has no signal source");

  for (std::size_t k = 0; k < sc.initial_conditions.size(); ++k) {
    const auto& x0 = sc.initial_conditions[k];
    if (sc.feedback) {
      batch.trajectories.push_back(integrate_feedback(sc.system, x0, *sc.feedback, sc.horizon, sc.integrator));
    } else if (sc.generator) {
      const auto sig = generate_adt(sc.seed + k, *sc.generator, sc.system.modes(), sc.horizon);
      batch.trajectories.push_back(integrate(sc.system, x0, sig, sc.integrator));
    } else {
      batch.trajectories.push_back(integrate(sc.system, x0, *sc.fixed_signal, sc.integrator));
    }
  }
  return batch;
}

template <typename Scalar = double>
struct GuasAnalysis {
  AggregateReport report;
  TrajectoryBatch<Scalar> batch;
  EnvelopeReport class_k;
  StrictDecreaseReport strict;
  UniformEnvelope uniform;
  KlEnvelope kl;
  std::vector<OmegaEstimate<Scalar>> omega;
  std::vector<OmegaSharpEstimate<Scalar>> omega_sharp;
};

namespace detail {

inline std::string num(double v) { return format_number(v); }

}  // namespace detail

/// Runs every hypothesis and conclusion check on a simulated batch and aggregates
/// them into one evidential verdict. The candidate attractor is M = {0} x Gamma*.
template <typename Scalar>
GuasAnalysis<Scalar> guas_report(const GuasScenario<Scalar>& sc) {
  using detail::num;
  GuasAnalysis<Scalar> out;
  auto& rep = out.report;
  const auto& an = sc.analysis;
  rep.scenario = sc.id;

  out.batch = simulate_batch(sc);
  const auto& trajs = out.batch.trajectories;
  rep.parameters = {{"batch_size", std::to_string(trajs.size())},
                    {"horizon", num(sc.horizon)},
                    {"signal_source", out.batch.signal_source},
                    {"rtol", num(sc.integrator.rtol)},
                    {"atol", num(sc.integrator.atol)},
                    {"cluster_tol", num(an.cluster_tol)},
                    {"tail_fraction", num(an.tail_fraction)},
                    {"region", num(sc.region.r_min) + ".." + num(sc.region.r_max)}};
  if (sc.generator) {
    rep.parameters.emplace_back("tau_d", num(sc.generator->tau_d));
    rep.parameters.emplace_back("n0", std::to_string(sc.generator->n0));
    rep.parameters.emplace_back("seed", std::to_string(sc.seed));
  }

  // Hypotheses.
  const auto eq = check_equilibrium(sc.system, an.equilibrium_tol);
  {
    std::ostringstream d;
    d << "Gamma* = {";
    for (std::size_t i = 0; i < eq.gamma_star.size(); ++i) d << (i ? "," : "") << eq.gamma_star[i];
    d << "}";
    for (const auto& [g, n] : eq.violators) d << "; |f_" << g << "(0)| = " << num(n);
    rep.add("equilibrium", CheckRole::Hypothesis, eq.passed, d.str());
  }

  {
    bool ok = true;
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& t : trajs) {
      const auto c = check_covering_compliance(t, sc.system.covering(), an.compliance_tol);
      ok = ok && c.compliant;
      worst = std::max(worst, c.worst_margin);
    }
    rep.add("covering_compliance", CheckRole::Hypothesis, ok, "worst margin " + num(worst));
  }

  {
    bool ok = true;
    std::ostringstream d;
    if (sc.generator) {
      for (const auto& t : trajs) ok = ok && validate_adt(t.signal, *sc.generator).valid;
      d << "class tau_d=" << num(sc.generator->tau_d) << " n0=" << sc.generator->n0;
    } else {
      double gap = std::numeric_limits<double>::infinity();
      for (const auto& t : trajs) gap = std::min(gap, min_dwell(t.signal));
      if (std::isfinite(gap) && gap > 0.0) {
        const AdtClass cls(gap / 2.0, 1);
        for (const auto& t : trajs) ok = ok && validate_adt(t.signal, cls).valid;
        d << "measured min dwell " << num(gap) << ", class tau_d=" << num(cls.tau_d) << " n0=1";
      } else if (gap <= 0.0) {
        ok = false;
        d << "zero dwell";
      } else {
        d << "fewer than two switches per trajectory";
      }
    }
    rep.add("adt_regularity", CheckRole::Hypothesis, ok, d.str());
  }

  out.class_k = check_class_k_bounds(sc.V, sc.system.covering(), sc.system.dimension(), sc.region);
  rep.add("lyapunov_class_k", CheckRole::Hypothesis, out.class_k.passed,
          out.class_k.failures.empty() ? "m(r) > 0 on the grid, V(0, Gamma*) = 0" : out.class_k.failures.front());

  const auto dec = check_decrease_on_covering(sc.V, sc.system, sc.region, an.decrease_margin);
  rep.add("lyapunov_decrease", CheckRole::Hypothesis, dec.passed,
          "worst Lie derivative " + num(dec.worst) + " over " + std::to_string(dec.checked) + " points");

  {
    bool a = true, b = true;
    double wa = -std::numeric_limits<double>::infinity(), wb = wa;
    for (const auto& t : trajs) {
      const auto c3 = check_condition3(sc.V, t, an.condition3_tol);
      a = a && c3.switch_pairs_ok;
      b = b && c3.sample_pairs_ok;
      wa = std::max(wa, c3.worst_switch_excess);
      wb = std::max(wb, c3.worst_sample_excess);
    }
    rep.add("lyapunov_condition3", CheckRole::Hypothesis, a && b,
            "switch-pair excess " + num(wa) + ", sample-pair excess " + num(wb));
  }

  out.strict = check_strict_decrease(sc.V, sc.system, sc.region);
  rep.add("strict_decrease", CheckRole::Consistency, out.strict.passed,
          out.strict.passed ? "alpha3 > 0 on the grid" : "alpha3 vanishes at some radius; only the weak decrease holds");

  if (sc.W) {
    bool ok = true;
    std::ostringstream d;
    for (Mode g = 1; g <= sc.system.mode_count(); ++g) {
      const auto p = distinguishability_probe(sc.system, *sc.W, g, an.probe_delta, sc.region, an.probe_threshold,
                                              sc.integrator);
      ok = ok && p.passed;
      d << (g > 1 ? "; " : "") << "mode " << g << " min score " << num(p.min_score);
    }
    rep.add("distinguishability", CheckRole::Hypothesis, ok, d.str());
  } else {
    rep.skip("distinguishability", CheckRole::Hypothesis, "no output family supplied");
  }

  // A tail that stays away from 0 while V is constant per mode is a trajectory of
  // T_V* outside {0} x Gamma*, so that set cannot be the maximal weakly-invariant one.
  {
    std::size_t witnesses = 0;
    for (const auto& t : trajs) {
      double start = 0.0;
      const std::size_t k0 = detail::tail_begin(t, an.tail_fraction, start);
      const auto tv = check_tv_star_residual(t, sc.V, an.tv_star_tol, k0);
      double closest = std::numeric_limits<double>::infinity();
      for (std::size_t k = k0; k < t.size(); ++k) closest = std::min(closest, static_cast<double>(t.states[k].norm()));
      if (tv.passed && closest > an.lasalle_tol) ++witnesses;
    }
    rep.add("invariant_set_probe", CheckRole::Hypothesis, witnesses == 0,
            witnesses == 0 ? "no tail of T_V* away from the origin"
                           : std::to_string(witnesses) + " tails keep V constant away from 0");
  }

  // Conclusions.
  std::vector<double> restarts;
  for (int p = 0; p < an.restart_points; ++p)
    restarts.push_back(sc.horizon / 2.0 * p / std::max(1, an.restart_points - 1));
  out.uniform = fit_uniform_envelope(out.batch, restarts);
  rep.add("uniform_stability", CheckRole::Conclusion, out.uniform.passed,
          "small-radius gain " + num(out.uniform.small_radius_gain) + ", max gain " + num(out.uniform.max_gain));

  out.kl = fit_kl_envelope(out.batch);
  {
    const bool ok = out.kl.fit_ok || out.kl.fallback_decay;
    std::string d = "C=" + num(out.kl.C) + " lambda=" + num(out.kl.lambda) + " slack=" + num(out.kl.worst_slack);
    if (out.kl.degenerate) d += " (degenerate batch)";
    if (!out.kl.fit_ok) d += out.kl.fallback_decay ? "; table fallback decays" : "; table fallback does not decay";
    rep.add("kl_envelope", CheckRole::Conclusion, ok, d);
  }

  {
    double R = 0.0;
    for (const auto& x0 : sc.initial_conditions) R = std::max(R, static_cast<double>(x0.norm()));
    const auto g = check_remark_gas(out.batch, 1.01 * R + 1e-12, an.gas_eps);
    rep.add("remark_gas", CheckRole::Conclusion, g.passed,
            "R=" + num(1.01 * R) + " eps=" + num(an.gas_eps) + " T=" + num(g.T_hat));
  }

  {
    const std::vector<Vector<Scalar>> target{Vector<Scalar>::Zero(sc.system.dimension())};
    bool ok = true;
    double worst = 0.0;
    for (const auto& t : trajs) {
      const auto l = lasalle_certify(t, target, an.lasalle_tol, an.tail_fraction);
      ok = ok && l.passed;
      worst = std::max(worst, l.tail_sup);
    }
    rep.add("lasalle_convergence", CheckRole::Conclusion, ok, "worst tail distance to {0}: " + num(worst));
  }

  // Limit-set estimates and the projection identity.
  {
    double worst = 0.0;
    for (const auto& t : trajs) {
      out.omega.push_back(omega_limit(t, an.tail_fraction, an.cluster_tol));
      out.omega_sharp.push_back(
          omega_sharp(t, an.tail_fraction, an.cluster_tol, default_dwell_filter(t, an.cluster_tol)));
      worst = std::max(worst, hausdorff_distance(out.omega.back().points, project_pi1(out.omega_sharp.back())));
    }
    rep.add("omega_projection", CheckRole::Consistency, worst <= 2.0 * an.cluster_tol,
            "max Hausdorff distance " + num(worst) + " (bound " + num(2.0 * an.cluster_tol) + ")");
  }

  rep.finalize();
  return out;
}

}  // namespace switchinv
