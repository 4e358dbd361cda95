#pragma once

#include "switchinv/lyapunov.hpp"
#include "switchinv/system.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace switchinv {

/// Finite point-cloud estimate of the omega-limit set from a trajectory tail.
template <typename Scalar = double>
struct OmegaEstimate {
  std::vector<Vector<Scalar>> points;
  std::vector<std::size_t> hits;
  double tail_start = 0.0;
  double tail_end = 0.0;
  double cluster_tol = 0.0;
};

template <typename Scalar = double>
struct OmegaSharpPair {
  Vector<Scalar> xi;
  Mode mode;
  /// Median of tau^1(s) - s over the cluster's samples; +inf when no switch follows.
  ExtTime r_hat;
  std::size_t hits;
};

/// Estimate of the extended limit set of state-mode pairs.
template <typename Scalar = double>
struct OmegaSharpEstimate {
  std::vector<OmegaSharpPair<Scalar>> pairs;
  double tail_start = 0.0;
  double tail_end = 0.0;
  double cluster_tol = 0.0;
  double r_min = 0.0;
  std::size_t min_hits = 1;
  std::string diagnostics;

  bool empty() const { return pairs.empty(); }
};

namespace detail {

template <typename Scalar>
struct Cluster {
  Vector<Scalar> seed;
  Vector<Scalar> sum;
  std::size_t count = 0;
  int group = 0;
  Vector<Scalar> centroid() const { return sum / static_cast<Scalar>(count); }
};

/// Greedy metric clustering in sample order: each point joins the nearest seed of
/// its group within tol (ties to the earliest seed) or seeds a new cluster. Centroids
/// closer than tol are then merged until all are separated by more than tol.
template <typename Scalar>
std::vector<Cluster<Scalar>> cluster_points(const std::vector<Vector<Scalar>>& pts, const std::vector<int>& groups,
                                            double tol, std::vector<std::size_t>* assignment = nullptr) {
  std::vector<Cluster<Scalar>> clusters;
  std::vector<std::size_t> owner(pts.size());
  for (std::size_t k = 0; k < pts.size(); ++k) {
    std::size_t best = clusters.size();
    double best_d = tol;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      if (clusters[c].group != groups[k]) continue;
      const double d = static_cast<double>((pts[k] - clusters[c].seed).norm());
      if (d <= best_d && (best == clusters.size() || d < best_d)) {
        best = c;
        best_d = d;
      }
    }
    if (best == clusters.size()) clusters.push_back({pts[k], Vector<Scalar>::Zero(pts[k].size()), 0, groups[k]});
    clusters[best].sum += pts[k];
    ++clusters[best].count;
    owner[k] = best;
  }

  // Merge passes; `remap` tracks where each original cluster ended up.
  std::vector<std::size_t> remap(clusters.size());
  for (std::size_t c = 0; c < remap.size(); ++c) remap[c] = c;
  std::vector<Vector<Scalar>> centers;
  for (const auto& c : clusters) centers.push_back(c.centroid());
  bool merged = true;
  while (merged) {
    merged = false;
    for (std::size_t a = 0; a < clusters.size(); ++a) {
      for (std::size_t b = a + 1; b < clusters.size();) {
        if (clusters[a].group != clusters[b].group || static_cast<double>((centers[a] - centers[b]).norm()) > tol) {
          ++b;
          continue;
        }
        clusters[a].sum += clusters[b].sum;
        clusters[a].count += clusters[b].count;
        centers[a] = clusters[a].centroid();
        clusters.erase(clusters.begin() + static_cast<long>(b));
        centers.erase(centers.begin() + static_cast<long>(b));
        for (auto& r : remap) {
          if (r == b) r = a;
          else if (r > b) --r;
        }
        merged = true;
      }
    }
  }
  if (assignment) {
    assignment->resize(pts.size());
    for (std::size_t k = 0; k < pts.size(); ++k) (*assignment)[k] = remap[owner[k]];
  }
  return clusters;
}

template <typename Scalar>
std::size_t tail_begin(const Trajectory<Scalar>& traj, double tail_fraction, double& start) {
  if (!(tail_fraction > 0.0 && tail_fraction < 1.0)) throw std::domain_error("tail_fraction must be in (0, 1)");
  start = traj.horizon() * (1.0 - tail_fraction);
  auto it = std::lower_bound(traj.times.begin(), traj.times.end(), start);
  if (it == traj.times.end()) throw std::domain_error("empty tail window");
  return static_cast<std::size_t>(it - traj.times.begin());
}

template <typename Scalar>
struct TailPoint {
  double t;
  Vector<Scalar> x;
  Mode mode;
};

/// Tail samples from index k0 with linear interpolants inserted so consecutive
/// points are at most `spacing` apart. Interpolants carry the mode of the left sample.
template <typename Scalar>
std::vector<TailPoint<Scalar>> refined_tail(const Trajectory<Scalar>& traj, std::size_t k0, double spacing) {
  std::vector<TailPoint<Scalar>> out{{traj.times[k0], traj.states[k0], traj.modes[k0]}};
  for (std::size_t k = k0 + 1; k < traj.size(); ++k) {
    const double d = static_cast<double>((traj.states[k] - traj.states[k - 1]).norm());
    const auto pieces = static_cast<std::size_t>(std::ceil(d / spacing));
    for (std::size_t j = 1; j < pieces; ++j) {
      const double w = static_cast<double>(j) / static_cast<double>(pieces);
      out.push_back({traj.times[k - 1] + w * (traj.times[k] - traj.times[k - 1]),
                     (1.0 - w) * traj.states[k - 1] + w * traj.states[k], traj.modes[k - 1]});
    }
    out.push_back({traj.times[k], traj.states[k], traj.modes[k]});
  }
  return out;
}

}  // namespace detail

/// Omega-limit estimate: cluster the samples in [T (1 - tail_fraction), T], refined
/// to spacing cluster_tol / 4 so representatives along a curve sit at most about
/// 2 cluster_tol apart. Hits count refined points.
template <typename Scalar>
OmegaEstimate<Scalar> omega_limit(const Trajectory<Scalar>& traj, double tail_fraction, double cluster_tol) {
  if (!(cluster_tol > 0.0)) throw std::domain_error("omega_limit: cluster_tol must be > 0");
  OmegaEstimate<Scalar> est;
  const std::size_t k0 = detail::tail_begin(traj, tail_fraction, est.tail_start);
  est.tail_end = traj.horizon();
  est.cluster_tol = cluster_tol;
  std::vector<Vector<Scalar>> pts;
  for (auto& p : detail::refined_tail(traj, k0, cluster_tol / 4.0)) pts.push_back(std::move(p.x));
  std::vector<int> groups(pts.size(), 0);
  for (const auto& c : detail::cluster_points(pts, groups, cluster_tol)) {
    est.points.push_back(c.centroid());
    est.hits.push_back(c.count);
  }
  return est;
}

/// Default dwell filter for omega_sharp: half the smallest inter-switch gap, capped so
/// that the motion discarded before a switch stays within cluster_tol.
template <typename Scalar>
double default_dwell_filter(const Trajectory<Scalar>& traj, double cluster_tol) {
  double speed = 0.0;
  for (std::size_t k = 1; k < traj.size(); ++k) {
    const double dt = traj.times[k] - traj.times[k - 1];
    if (dt > 0.0) speed = std::max(speed, static_cast<double>((traj.states[k] - traj.states[k - 1]).norm()) / dt);
  }
  double r = min_dwell(traj.signal) / 2.0;
  if (speed > 0.0) r = std::min(r, cluster_tol / speed);
  if (!std::isfinite(r)) r = cluster_tol;
  return r;
}

/// Extended limit-set estimate: refined tail points with tau^1(s) - s >= r_min,
/// clustered jointly on (state, mode) with modes never merged. After the last switch
/// the gap is censored to T - s, unless the tail window holds no switch at all, in
/// which case it is infinite.
template <typename Scalar>
OmegaSharpEstimate<Scalar> omega_sharp(const Trajectory<Scalar>& traj, double tail_fraction, double cluster_tol,
                                       double r_min, std::size_t min_hits = 1) {
  if (!(cluster_tol > 0.0)) throw std::domain_error("omega_sharp: cluster_tol must be > 0");
  if (!(r_min > 0.0)) throw std::domain_error("omega_sharp: r_min must be > 0");
  OmegaSharpEstimate<Scalar> est;
  const std::size_t k0 = detail::tail_begin(traj, tail_fraction, est.tail_start);
  est.tail_end = traj.horizon();
  est.cluster_tol = cluster_tol;
  est.r_min = r_min;
  est.min_hits = min_hits;

  std::vector<Vector<Scalar>> pts;
  std::vector<int> groups;
  std::vector<ExtTime> gaps;
  const auto& sw = traj.signal.switch_times();
  const bool tail_switches = std::upper_bound(sw.begin(), sw.end(), est.tail_start) != sw.end();
  const auto tail = detail::refined_tail(traj, k0, cluster_tol / 4.0);
  for (const auto& p : tail) {
    ExtTime gap = tau(traj.signal, 1, ExtTime(p.t)) - ExtTime(p.t);
    if (gap.is_infinite() && tail_switches) gap = ExtTime(traj.horizon() - p.t);
    if (gap < ExtTime(r_min)) continue;
    pts.push_back(p.x);
    groups.push_back(p.mode);
    gaps.push_back(gap);
  }
  if (pts.empty()) {
    est.diagnostics = "no tail sample has tau1(s) - s >= r_min = " + std::to_string(r_min) + " in " +
                      std::to_string(tail.size()) + " tail points";
    return est;
  }

  std::vector<std::size_t> owner;
  const auto clusters = detail::cluster_points(pts, groups, cluster_tol, &owner);
  std::vector<std::vector<ExtTime>> cluster_gaps(clusters.size());
  for (std::size_t k = 0; k < pts.size(); ++k) cluster_gaps[owner[k]].push_back(gaps[k]);
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    if (clusters[c].count < min_hits) continue;
    auto& g = cluster_gaps[c];
    std::sort(g.begin(), g.end());
    est.pairs.push_back({clusters[c].centroid(), clusters[c].group, g[(g.size() - 1) / 2], clusters[c].count});
  }
  if (est.pairs.empty()) est.diagnostics = "every cluster has fewer than min_hits samples";
  return est;
}

/// State components of an extended estimate, deduplicated within `tol`
/// (defaults to the estimate's cluster tolerance).
template <typename Scalar>
std::vector<Vector<Scalar>> project_pi1(const OmegaSharpEstimate<Scalar>& est, double tol = -1.0) {
  if (tol < 0.0) tol = est.cluster_tol;
  std::vector<Vector<Scalar>> out;
  for (const auto& p : est.pairs) {
    bool seen = false;
    for (const auto& q : out) seen = seen || static_cast<double>((p.xi - q).norm()) <= tol;
    if (!seen) out.push_back(p.xi);
  }
  return out;
}

template <typename Scalar>
double distance_to_set(const Vector<Scalar>& x, const std::vector<Vector<Scalar>>& set) {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& p : set) d = std::min(d, static_cast<double>((x - p).norm()));
  return d;
}

template <typename Scalar>
double hausdorff_distance(const std::vector<Vector<Scalar>>& a, const std::vector<Vector<Scalar>>& b) {
  if (a.empty() && b.empty()) return 0.0;
  if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
  double h = 0.0;
  for (const auto& p : a) h = std::max(h, distance_to_set(p, b));
  for (const auto& q : b) h = std::max(h, distance_to_set(q, a));
  return h;
}

struct TvStarReport {
  bool passed = true;
  double residual = 0.0;
  Mode worst_mode = 0;
  /// Times of the extreme V values realizing the residual.
  double t_low = 0.0, t_high = 0.0;
};

/// Membership residual for T_V*: max over equal-mode sample pairs of |V(t) - V(t')|.
template <typename Scalar>
TvStarReport check_tv_star_residual(const Trajectory<Scalar>& traj, const LyapunovCandidate<Scalar>& V, double tol,
                                    std::size_t first_sample = 0) {
  TvStarReport report;
  const int m = traj.signal.mode_count();
  std::vector<double> lo(static_cast<std::size_t>(m + 1), std::numeric_limits<double>::infinity());
  std::vector<double> hi(static_cast<std::size_t>(m + 1), -std::numeric_limits<double>::infinity());
  std::vector<double> t_lo(lo.size(), 0.0), t_hi(lo.size(), 0.0);
  for (std::size_t k = first_sample; k < traj.size(); ++k) {
    const auto g = static_cast<std::size_t>(traj.modes[k]);
    const double v = static_cast<double>(V(traj.states[k], traj.modes[k]));
    if (v < lo[g]) {
      lo[g] = v;
      t_lo[g] = traj.times[k];
    }
    if (v > hi[g]) {
      hi[g] = v;
      t_hi[g] = traj.times[k];
    }
  }
  for (std::size_t g = 1; g < lo.size(); ++g) {
    if (!std::isfinite(lo[g])) continue;
    if (hi[g] - lo[g] > report.residual) {
      report.residual = hi[g] - lo[g];
      report.worst_mode = static_cast<Mode>(g);
      report.t_low = t_lo[g];
      report.t_high = t_hi[g];
    }
  }
  report.passed = report.residual <= tol;
  return report;
}

struct LaSalleReport {
  bool passed = false;
  double tail_sup = 0.0;
  double tail_start = 0.0;
  std::vector<std::pair<double, double>> distance_series;
};

/// x(t) converges to the candidate set: sup of dist(x(t), candidate) over the tail <= tol.
template <typename Scalar>
LaSalleReport lasalle_certify(const Trajectory<Scalar>& traj, const std::vector<Vector<Scalar>>& candidate, double tol,
                              double tail_fraction) {
  LaSalleReport report;
  const std::size_t k0 = detail::tail_begin(traj, tail_fraction, report.tail_start);
  report.distance_series.reserve(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double d = distance_to_set(traj.states[k], candidate);
    report.distance_series.emplace_back(traj.times[k], d);
    if (k >= k0) report.tail_sup = std::max(report.tail_sup, d);
  }
  report.passed = report.tail_sup <= tol;
  return report;
}

}  // namespace switchinv
