#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace switchinv {

/// Mode label in 1..m.
using Mode = int;

/// The finite mode set {1, ..., m} with the discrete metric.
class ModeSet {
 public:
  explicit ModeSet(int size);

  int size() const { return size_; }
  bool contains(Mode g) const { return g >= 1 && g <= size_; }
  static double distance(Mode a, Mode b) { return a == b ? 0.0 : 1.0; }

 private:
  int size_;
};

/// Time on the one-point compactification of [0, inf). Arithmetic saturates at +inf.
class ExtTime {
 public:
  constexpr ExtTime() = default;
  constexpr ExtTime(double t) : value_(t) {}  // NOLINT(google-explicit-constructor)

  static constexpr ExtTime infinity() { return ExtTime(std::numeric_limits<double>::infinity()); }

  constexpr bool is_infinite() const { return value_ == std::numeric_limits<double>::infinity(); }
  constexpr double value() const { return value_; }

  friend constexpr auto operator<=>(ExtTime a, ExtTime b) { return a.value_ <=> b.value_; }
  friend constexpr bool operator==(ExtTime a, ExtTime b) { return a.value_ == b.value_; }

  friend ExtTime operator+(ExtTime a, double b);
  /// a - b for finite b; inf - b = inf. Subtracting infinity throws std::domain_error.
  friend ExtTime operator-(ExtTime a, ExtTime b);

 private:
  double value_ = 0.0;
};

/// Average dwell-time class S_a[tau_d, n0].
struct AdtClass {
  double tau_d = 1.0;
  int n0 = 1;

  AdtClass() = default;
  AdtClass(double tau, int chatter);
};

/// Piecewise-constant right-continuous switching signal on [0, horizon].
///
/// Holds switch times t_1 < ... < t_N in (0, horizon] and modes g_0, ..., g_N with
/// g_i != g_{i+1}; sigma(t) = g_i on [t_i, t_{i+1}) with t_0 = 0.
class SwitchingSignal {
 public:
  /// Throws std::invalid_argument on any structural violation.
  SwitchingSignal(int mode_count, double horizon, std::vector<double> switch_times,
                  std::vector<Mode> modes);

  static SwitchingSignal constant(int mode_count, double horizon, Mode g);

  int mode_count() const { return mode_count_; }
  double horizon() const { return horizon_; }
  std::size_t switch_count() const { return times_.size(); }
  const std::vector<double>& switch_times() const { return times_; }
  const std::vector<Mode>& modes() const { return modes_; }
  Mode initial_mode() const { return modes_.front(); }
  Mode final_mode() const { return modes_.back(); }

  /// Index i of the segment [t_i, t_{i+1}) containing t (t_0 = 0).
  std::size_t segment_index(double t) const;

  friend bool operator==(const SwitchingSignal&, const SwitchingSignal&) = default;

 private:
  int mode_count_;
  double horizon_;
  std::vector<double> times_;
  std::vector<Mode> modes_;
};

/// sigma(t), right-continuous. Throws std::domain_error for t outside [0, horizon].
Mode value_at(const SwitchingSignal& signal, double t);

/// The i-th iterate of the next-switch map: tau^0(t) = t, tau^1(t) is the first
/// switch time strictly greater than t (or +inf), tau^{i+1} = tau^1 o tau^i.
ExtTime tau(const SwitchingSignal& signal, int i, ExtTime t);

/// Number of switch times in the open interval (a, b).
std::size_t switch_count(const SwitchingSignal& signal, double a, double b);

/// Smallest gap t_{i+1} - t_i between consecutive switches (i >= 1); +inf with < 2 switches.
double min_dwell(const SwitchingSignal& signal);

struct AdtReport {
  bool valid = true;
  /// Open interval violating the bound, when invalid.
  std::optional<std::pair<double, double>> witness;
  std::size_t witness_count = 0;
  double witness_bound = 0.0;
  /// max over switch pairs of count - (n0 + span / tau_d); <= 0 iff valid.
  double worst_excess = -std::numeric_limits<double>::infinity();
};

/// Checks switch_count(a, b) <= n0 + (b - a) / tau_d over every open interval.
///
/// The count over (a, b) only changes when an endpoint crosses a switch time, so
/// the extremal intervals are (t_i - eps, t_j + eps) for switch pairs i <= j with
/// eps -> 0: j - i + 1 switches against n0 + (t_j - t_i) / tau_d. Writing
/// a_k = k - t_k / tau_d the excess is a_j - a_i + 1 - n0, maximized in one pass
/// with a running minimum of a_i.
AdtReport validate_adt(const SwitchingSignal& signal, const AdtClass& cls);

/// Random signal in S_a[tau_d, n0]: exponential gaps with mean tau_d, then greedy
/// deletion of switches that would violate the class. Deterministic in seed.
/// Throws std::invalid_argument when fewer than two modes are available.
SwitchingSignal generate_adt(std::uint64_t seed, const AdtClass& cls, const ModeSet& modes,
                             double horizon);

struct SignalDistance {
  double value = 0.0;
  /// Upper bound on the neglected tail sum_{n > n_terms} n 2^{-n} = (n_terms + 2) 2^{-n_terms}.
  double tail_bound = 0.0;
};

/// d(u, v) = sum_{n=1}^{n_terms} 2^{-n} int_0^n rho(u(s), v(s)) ds, exact from the
/// piecewise-constant structure. Signals are extended by their final mode past the horizon.
SignalDistance signal_distance(const SwitchingSignal& u, const SwitchingSignal& v, int n_terms);

/// t -> sigma(t + s) on [0, horizon - s].
SwitchingSignal shift(const SwitchingSignal& signal, double s);

struct SubsequenceResult {
  bool found = false;
  std::vector<std::size_t> indices;
  std::optional<SwitchingSignal> limit;
  /// True when the limit switch times were extrapolated rather than copied from the tail.
  bool extrapolated = false;
  std::string diagnostics;
};

/// Desk-scale version of the compactness argument for S_a[tau_d, n0]: pad each signal
/// to a common length (+inf times, final mode repeated), then per switch index keep the
/// majority mode and the largest single-linkage time cluster (tolerance tol, +inf as its
/// own cluster). The limit signal collapses coincident limit times, keeping the mode of
/// the last index in each group, and drops repeated modes.
///
/// Throws std::domain_error with fewer than two signals or mismatched horizons.
SubsequenceResult extract_convergent_subsequence(const std::vector<SwitchingSignal>& signals,
                                                 const AdtClass& cls, double tol);

}  // namespace switchinv
