#pragma once

// Shared generators and independent oracles. Nothing here calls the library's
// own algorithms for the quantity under test.

#include "switchinv/signal.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

namespace support {

using switchinv::Mode;
using switchinv::SwitchingSignal;

/// Random well-formed signal: `count` distinct switch times on a 1e-3 grid in
/// (0, horizon], modes drawn so consecutive labels differ.
inline SwitchingSignal random_signal(std::mt19937_64& rng, int modes, double horizon, int count) {
  const int cells = static_cast<int>(std::floor(horizon * 1000.0));
  std::uniform_int_distribution<int> cell(1, cells);
  std::vector<int> picks;
  while (static_cast<int>(picks.size()) < std::min(count, cells)) {
    const int c = cell(rng);
    if (std::find(picks.begin(), picks.end(), c) == picks.end()) picks.push_back(c);
  }
  std::sort(picks.begin(), picks.end());
  std::vector<double> times;
  for (int c : picks) times.push_back(c / 1000.0);
  std::uniform_int_distribution<int> first(1, modes);
  std::uniform_int_distribution<int> other(1, std::max(1, modes - 1));
  std::vector<Mode> labels{first(rng)};
  for (std::size_t i = 0; i < times.size(); ++i) {
    int g = other(rng);
    if (g >= labels.back()) ++g;
    labels.push_back(g);
  }
  return SwitchingSignal(modes, horizon, times, labels);
}

/// Linear scan: sigma(t) = g_i with i = max{j : t_j <= t}.
inline Mode scan_value(const SwitchingSignal& s, double t) {
  std::size_t i = 0;
  for (std::size_t j = 0; j < s.switch_times().size(); ++j)
    if (s.switch_times()[j] <= t) i = j + 1;
  return s.modes()[i];
}

/// Iterated linear scan for the first switch strictly after t.
inline double scan_tau(const SwitchingSignal& s, int i, double t) {
  for (int k = 0; k < i; ++k) {
    double next = std::numeric_limits<double>::infinity();
    for (double tj : s.switch_times())
      if (tj > t) {
        next = tj;
        break;
      }
    t = next;
    if (std::isinf(t)) return t;
  }
  return t;
}

/// Exhaustive ADT oracle: every open interval whose endpoints lie in
/// {0, horizon} U {t_i - eps, t_i + eps}, counted by brute force.
inline bool brute_force_adt(const SwitchingSignal& s, double tau_d, int n0, double eps = 1e-9) {
  std::vector<double> ends{0.0, s.horizon()};
  for (double t : s.switch_times()) {
    ends.push_back(t - eps);
    ends.push_back(t + eps);
  }
  std::sort(ends.begin(), ends.end());
  for (std::size_t a = 0; a < ends.size(); ++a) {
    for (std::size_t b = a + 1; b < ends.size(); ++b) {
      if (!(ends[a] < ends[b])) continue;
      int count = 0;
      for (double t : s.switch_times())
        if (ends[a] < t && t < ends[b]) ++count;
      if (count > n0 + (ends[b] - ends[a]) / tau_d) return false;
    }
  }
  return true;
}

/// sum_{n=1}^{N} 2^{-n} * integral_0^n rho(u, v), by midpoint sampling on a grid
/// refined to every breakpoint. Exact for piecewise-constant signals.
inline double breakpoint_distance(const SwitchingSignal& u, const SwitchingSignal& v, int n_terms) {
  std::vector<double> cuts{0.0};
  for (double t : u.switch_times()) cuts.push_back(t);
  for (double t : v.switch_times()) cuts.push_back(t);
  for (int n = 1; n <= n_terms; ++n) cuts.push_back(n);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  auto value = [](const SwitchingSignal& s, double t) { return t > s.horizon() ? s.final_mode() : scan_value(s, t); };
  double total = 0.0;
  for (int n = 1; n <= n_terms; ++n) {
    double integral = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size() && cuts[k] < n; ++k) {
      const double a = cuts[k], b = std::min(cuts[k + 1], static_cast<double>(n));
      const double mid = 0.5 * (a + b);
      if (value(u, mid) != value(v, mid)) integral += b - a;
    }
    total += std::ldexp(integral, -n);
  }
  return total;
}

inline Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd x(2);
  x << a, b;
  return x;
}

}  // namespace support
