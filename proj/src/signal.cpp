#include "switchinv/signal.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

namespace switchinv {

ModeSet::ModeSet(int size) : size_(size) {
  if (size < 1) throw std::invalid_argument("ModeSet: size must be >= 1");
}

ExtTime operator+(ExtTime a, double b) {
  if (a.is_infinite()) return a;
  return ExtTime(a.value_ + b);
}

ExtTime operator-(ExtTime a, ExtTime b) {
  if (b.is_infinite()) throw std::domain_error("ExtTime: cannot subtract infinity");
  if (a.is_infinite()) return a;
  return ExtTime(a.value_ - b.value_);
}

AdtClass::AdtClass(double tau, int chatter) : tau_d(tau), n0(chatter) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("AdtClass: tau_d must be > 0");
  if (chatter < 1) throw std::invalid_argument("AdtClass: n0 must be >= 1");
}

SwitchingSignal::SwitchingSignal(int mode_count, double horizon, std::vector<double> switch_times,
                                 std::vector<Mode> modes)
    : mode_count_(mode_count), horizon_(horizon), times_(std::move(switch_times)), modes_(std::move(modes)) {
  if (mode_count_ < 1) throw std::invalid_argument("SwitchingSignal: mode count must be >= 1");
  if (!(horizon_ >= 0.0) || !std::isfinite(horizon_))
    throw std::invalid_argument("SwitchingSignal: horizon must be finite and nonnegative");
  if (modes_.size() != times_.size() + 1)
    throw std::invalid_argument("SwitchingSignal: need exactly one more mode than switch times");
  for (std::size_t i = 0; i < times_.size(); ++i) {
    const double t = times_[i];
    if (!(t > 0.0) || t > horizon_) {
      std::ostringstream os;
      os << "SwitchingSignal: switch time " << t << " outside (0, " << horizon_ << "]";
      throw std::invalid_argument(os.str());
    }
    if (i > 0 && !(times_[i - 1] < t))
      throw std::invalid_argument("SwitchingSignal: switch times must be strictly increasing");
  }
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    if (modes_[i] < 1 || modes_[i] > mode_count_)
      throw std::invalid_argument("SwitchingSignal: mode label out of range");
    if (i > 0 && modes_[i] == modes_[i - 1])
      throw std::invalid_argument("SwitchingSignal: consecutive modes must differ");
  }
}

SwitchingSignal SwitchingSignal::constant(int mode_count, double horizon, Mode g) {
  return SwitchingSignal(mode_count, horizon, {}, {g});
}

std::size_t SwitchingSignal::segment_index(double t) const {
  return static_cast<std::size_t>(std::upper_bound(times_.begin(), times_.end(), t) - times_.begin());
}

Mode value_at(const SwitchingSignal& signal, double t) {
  if (!(t >= 0.0) || t > signal.horizon()) {
    std::ostringstream os;
    os << "value_at: t = " << t << " outside [0, " << signal.horizon() << "]";
    throw std::domain_error(os.str());
  }
  return signal.modes()[signal.segment_index(t)];
}

ExtTime tau(const SwitchingSignal& signal, int i, ExtTime t) {
  if (i < 0) throw std::domain_error("tau: iterate index must be >= 0");
  if (t.value() < 0.0 || std::isnan(t.value())) throw std::domain_error("tau: t must be >= 0");
  const auto& times = signal.switch_times();
  for (int k = 0; k < i; ++k) {
    if (t.is_infinite()) return t;
    auto it = std::upper_bound(times.begin(), times.end(), t.value());
    t = it == times.end() ? ExtTime::infinity() : ExtTime(*it);
  }
  return t;
}

std::size_t switch_count(const SwitchingSignal& signal, double a, double b) {
  if (!(a < b)) throw std::domain_error("switch_count: need a < b");
  const auto& times = signal.switch_times();
  auto lo = std::upper_bound(times.begin(), times.end(), a);
  auto hi = std::lower_bound(times.begin(), times.end(), b);
  return hi > lo ? static_cast<std::size_t>(hi - lo) : 0;
}

double min_dwell(const SwitchingSignal& signal) {
  const auto& t = signal.switch_times();
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < t.size(); ++i) gap = std::min(gap, t[i] - t[i - 1]);
  return gap;
}

namespace {

// count - bound for the extremal interval around switches i..j (0-based, i <= j).
double pair_excess(const std::vector<double>& t, std::size_t i, std::size_t j, const AdtClass& cls) {
  return static_cast<double>(j - i + 1) - static_cast<double>(cls.n0) - (t[j] - t[i]) / cls.tau_d;
}

}  // namespace

AdtReport validate_adt(const SwitchingSignal& signal, const AdtClass& cls) {
  if (!(cls.tau_d > 0.0) || cls.n0 < 1) throw std::invalid_argument("validate_adt: malformed AdtClass");
  AdtReport report;
  const auto& t = signal.switch_times();
  if (t.empty()) return report;

  std::size_t best_i = 0, best_j = 0;
  std::size_t argmin = 0;
  double min_a = 1.0 - t[0] / cls.tau_d;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < t.size(); ++j) {
    const double a = static_cast<double>(j + 1) - t[j] / cls.tau_d;
    if (a < min_a) {
      min_a = a;
      argmin = j;
    }
    const double excess = pair_excess(t, argmin, j, cls);
    if (excess > best) {
      best = excess;
      best_i = argmin;
      best_j = j;
    }
  }
  report.worst_excess = best;
  if (best > 0.0) {
    report.valid = false;
    // Widen by eps without letting the bound catch up or pulling in neighbours.
    double eps = std::min(1e-3, best * cls.tau_d / 4.0);
    eps = std::min(eps, t[best_i] / 2.0);
    if (best_i > 0) eps = std::min(eps, (t[best_i] - t[best_i - 1]) / 2.0);
    if (best_j + 1 < t.size()) eps = std::min(eps, (t[best_j + 1] - t[best_j]) / 2.0);
    const double a = t[best_i] - eps;
    const double b = t[best_j] + eps;
    report.witness = std::make_pair(a, b);
    report.witness_count = best_j - best_i + 1;
    report.witness_bound = cls.n0 + (b - a) / cls.tau_d;
  }
  return report;
}

SwitchingSignal generate_adt(std::uint64_t seed, const AdtClass& cls, const ModeSet& modes, double horizon) {
  if (!(horizon > 0.0)) throw std::domain_error("generate_adt: horizon must be > 0");
  if (modes.size() < 2) throw std::invalid_argument("generate_adt: switching needs at least two modes");

  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> gap(1.0 / cls.tau_d);
  std::uniform_int_distribution<int> first(1, modes.size());
  std::uniform_int_distribution<int> other(1, modes.size() - 1);

  std::vector<double> times;
  std::vector<Mode> labels{first(rng)};
  double t = 0.0;
  double min_a = std::numeric_limits<double>::infinity();
  std::size_t argmin = 0;
  for (;;) {
    t += gap(rng);
    if (t > horizon) break;
    const std::size_t j = times.size();
    times.push_back(t);
    const double a = static_cast<double>(j + 1) - t / cls.tau_d;
    const std::size_t i = a < min_a ? j : argmin;
    if (pair_excess(times, i, j, cls) > 0.0) {
      times.pop_back();
      continue;
    }
    if (a < min_a) {
      min_a = a;
      argmin = j;
    }
    int next = other(rng);
    if (next >= labels.back()) ++next;
    labels.push_back(next);
  }
  return SwitchingSignal(modes.size(), horizon, std::move(times), std::move(labels));
}

namespace {

Mode extended_value(const SwitchingSignal& s, double t) {
  return t >= s.horizon() ? s.final_mode() : s.modes()[s.segment_index(t)];
}

}  // namespace

SignalDistance signal_distance(const SwitchingSignal& u, const SwitchingSignal& v, int n_terms) {
  if (n_terms < 1) throw std::domain_error("signal_distance: n_terms must be >= 1");
  const double end = static_cast<double>(n_terms);

  std::vector<double> cuts{0.0, end};
  for (const auto* s : {&u, &v})
    for (double t : s->switch_times())
      if (t < end) cuts.push_back(t);
  for (int n = 1; n < n_terms; ++n) cuts.push_back(static_cast<double>(n));
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  // Disagreement measure inside each unit cell [n-1, n).
  std::vector<double> cell(static_cast<std::size_t>(n_terms), 0.0);
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double a = cuts[k], b = cuts[k + 1];
    if (extended_value(u, a) == extended_value(v, a)) continue;
    const auto c = static_cast<std::size_t>(std::floor(a));
    cell[std::min(c, cell.size() - 1)] += b - a;
  }

  std::vector<double> cumulative(cell.size());
  double acc = 0.0;
  for (std::size_t n = 0; n < cell.size(); ++n) {
    acc += cell[n];
    cumulative[n] = acc;
  }
  SignalDistance d;
  for (int n = n_terms; n >= 1; --n) d.value += std::ldexp(cumulative[static_cast<std::size_t>(n - 1)], -n);
  d.tail_bound = std::ldexp(static_cast<double>(n_terms) + 2.0, -n_terms);
  return d;
}

SwitchingSignal shift(const SwitchingSignal& signal, double s) {
  if (!(s >= 0.0) || s > signal.horizon()) throw std::domain_error("shift: s outside [0, horizon]");
  std::vector<double> times;
  std::vector<Mode> labels{value_at(signal, s)};
  const auto& t = signal.switch_times();
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] > s) {
      times.push_back(t[i] - s);
      labels.push_back(signal.modes()[i + 1]);
    }
  }
  return SwitchingSignal(signal.mode_count(), signal.horizon() - s, std::move(times), std::move(labels));
}

namespace {

// Levin u-transform on the tail of a sequence; exact for s_m = L + omega_m * P(1 / (m + 1))
// with P of degree < order, which covers both geometric and algebraic convergence.
std::optional<double> levin_u(const std::vector<double>& s, int order) {
  const int n = static_cast<int>(s.size());
  if (order < 1 || n < order + 2) return std::nullopt;
  const int m0 = n - 1 - order;
  double num = 0.0, den = 0.0;
  double binom = 1.0;
  for (int j = 0; j <= order; ++j) {
    const int m = m0 + j;
    const double omega = (1.0 + m) * (s[static_cast<std::size_t>(m)] - s[static_cast<std::size_t>(m - 1)]);
    if (omega == 0.0) return std::nullopt;
    const double w = ((j % 2 == 0) ? 1.0 : -1.0) * binom *
                     std::pow((1.0 + m0 + j) / (1.0 + m0 + order), order - 1) / omega;
    num += w * s[static_cast<std::size_t>(m)];
    den += w;
    binom = binom * (order - j) / (j + 1);
  }
  if (den == 0.0) return std::nullopt;
  const double limit = num / den;
  if (!std::isfinite(limit)) return std::nullopt;
  return limit;
}

struct LimitEstimate {
  double value;
  bool extrapolated;
};

LimitEstimate limit_of(const std::vector<double>& seq, double tol) {
  const double last = seq.back();
  const auto [lo, hi] = std::minmax_element(seq.begin(), seq.end());
  const double spread = *hi - *lo;
  if (seq.size() < 4 || spread <= 1e-15 * (1.0 + std::abs(last))) return {last, false};
  auto est = levin_u(seq, std::min<int>(4, static_cast<int>(seq.size()) - 2));
  if (!est || std::abs(*est - last) > std::max(tol, std::abs(last - seq.front()))) return {last, false};
  return {*est, true};
}

}  // namespace

SubsequenceResult extract_convergent_subsequence(const std::vector<SwitchingSignal>& signals,
                                                 const AdtClass& cls, double tol) {
  if (signals.size() < 2) throw std::domain_error("extract_convergent_subsequence: need >= 2 signals");
  if (!(tol > 0.0)) throw std::domain_error("extract_convergent_subsequence: tol must be > 0");
  const double horizon = signals.front().horizon();
  const int mode_count = signals.front().mode_count();
  for (const auto& s : signals)
    if (s.horizon() != horizon) throw std::domain_error("extract_convergent_subsequence: horizons differ");

  const std::size_t count = signals.size();
  std::size_t depth = 0;
  for (const auto& s : signals) depth = std::max(depth, s.switch_count());

  auto time_of = [&](std::size_t k, std::size_t i) -> double {  // switch i, 1-based
    const auto& t = signals[k].switch_times();
    return i <= t.size() ? t[i - 1] : std::numeric_limits<double>::infinity();
  };
  auto mode_of = [&](std::size_t k, std::size_t i) -> Mode {
    const auto& g = signals[k].modes();
    return i < g.size() ? g[i] : g.back();
  };

  const auto min_keep = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(count))));
  std::vector<std::size_t> keep(count);
  for (std::size_t k = 0; k < count; ++k) keep[k] = k;

  SubsequenceResult result;
  auto fail = [&](std::size_t index, const char* what) {
    std::ostringstream os;
    os << "extraction failed at switch index " << index << " (" << what << "): " << keep.size()
       << " signals left, need " << min_keep;
    result.diagnostics = os.str();
    result.indices = keep;
    return result;
  };

  for (std::size_t i = 0; i <= depth; ++i) {
    if (i >= 1) {
      std::vector<std::size_t> finite, infinite;
      for (std::size_t k : keep) (std::isinf(time_of(k, i)) ? infinite : finite).push_back(k);
      std::stable_sort(finite.begin(), finite.end(),
                       [&](std::size_t a, std::size_t b) { return time_of(a, i) < time_of(b, i); });
      std::vector<std::size_t> best;
      std::size_t start = 0;
      for (std::size_t p = 1; p <= finite.size(); ++p) {
        if (p == finite.size() || time_of(finite[p], i) - time_of(finite[p - 1], i) > tol) {
          if (p - start > best.size()) best.assign(finite.begin() + static_cast<long>(start), finite.begin() + static_cast<long>(p));
          start = p;
        }
      }
      if (infinite.size() > best.size()) best = infinite;
      std::sort(best.begin(), best.end());
      keep = std::move(best);
      if (keep.size() < min_keep) return fail(i, "switch times");
    }
    std::map<Mode, std::size_t> votes;
    for (std::size_t k : keep) ++votes[mode_of(k, i)];
    Mode winner = votes.begin()->first;
    for (const auto& [g, n] : votes)
      if (n > votes[winner]) winner = g;
    std::erase_if(keep, [&](std::size_t k) { return mode_of(k, i) != winner; });
    if (keep.size() < min_keep) return fail(i, "modes");
  }

  result.found = true;
  result.indices = keep;

  // Per-index limits in the compactification.
  std::vector<double> lt(depth + 1, 0.0);
  std::vector<Mode> lg(depth + 1);
  bool extrapolated = false;
  for (std::size_t i = 0; i <= depth; ++i) {
    lg[i] = mode_of(keep.front(), i);
    if (i == 0) continue;
    if (std::isinf(time_of(keep.front(), i))) {
      lt[i] = std::numeric_limits<double>::infinity();
      continue;
    }
    std::vector<double> seq;
    for (std::size_t k : keep) seq.push_back(time_of(k, i));
    const auto est = limit_of(seq, tol);
    lt[i] = std::max({est.value, lt[i - 1], 0.0});
    extrapolated = extrapolated || est.extrapolated;
  }

  // Collapse coincident limit times; each group takes the mode of its last index.
  std::vector<double> times;
  std::vector<Mode> labels;
  std::size_t i = 0;
  while (i <= depth) {
    std::size_t j = i;
    while (j < depth && std::isfinite(lt[j + 1]) && lt[j + 1] - lt[j] <= tol) ++j;
    const double at = lt[j];
    if (i == 0) {
      labels.push_back(lg[j]);
    } else if (std::isfinite(at) && at > 0.0 && at <= horizon && lg[j] != labels.back()) {
      times.push_back(at);
      labels.push_back(lg[j]);
    }
    if (!std::isfinite(at)) break;
    i = j + 1;
  }
  SwitchingSignal limit(mode_count, horizon, std::move(times), std::move(labels));
  if (!validate_adt(limit, cls).valid) {
    result.limit = signals[keep.back()];
    result.extrapolated = false;
    result.diagnostics = "extrapolated limit left the class; using the last subsequence member";
    return result;
  }
  result.limit = std::move(limit);
  result.extrapolated = extrapolated;
  return result;
}

}  // namespace switchinv
