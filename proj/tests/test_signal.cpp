#include "support.hpp"

#include <doctest.h>

#include "switchinv/signal.hpp"

#include <cmath>

using namespace switchinv;
using support::random_signal;

namespace {

SwitchingSignal two_switches() { return SwitchingSignal(2, 5.0, {1.0, 2.5}, {1, 2, 1}); }

}  // namespace

TEST_CASE("signal construction rejects malformed input") {
  CHECK_THROWS_AS(SwitchingSignal(2, 5.0, {2.0, 1.0}, {1, 2, 1}), std::invalid_argument);
  CHECK_THROWS_AS(SwitchingSignal(2, 5.0, {1.0, 1.0}, {1, 2, 1}), std::invalid_argument);
  CHECK_THROWS_AS(SwitchingSignal(2, 5.0, {1.0}, {1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(SwitchingSignal(2, 5.0, {0.0}, {1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(SwitchingSignal(2, 5.0, {6.0}, {1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(SwitchingSignal(2, 5.0, {1.0}, {1, 3}), std::invalid_argument);
  CHECK_THROWS_AS(SwitchingSignal(2, 5.0, {1.0}, {1}), std::invalid_argument);
  CHECK_NOTHROW(SwitchingSignal(2, 5.0, {5.0}, {1, 2}));
  CHECK_THROWS_AS(ModeSet(0), std::invalid_argument);
  CHECK_THROWS_AS(AdtClass(0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(AdtClass(1.0, 0), std::invalid_argument);
}

TEST_CASE("value_at is right-continuous") {
  const SwitchingSignal s(2, 5.0, {1.0}, {1, 2});
  CHECK(value_at(s, 0.5) == 1);
  CHECK(value_at(s, 1.0) == 2);
  CHECK(value_at(s, 5.0) == 2);
  const auto c = SwitchingSignal::constant(3, 4.0, 3);
  for (double t : {0.0, 1.7, 4.0}) CHECK(value_at(c, t) == 3);
  CHECK_THROWS_AS(value_at(s, -0.1), std::domain_error);
  CHECK_THROWS_AS(value_at(s, 5.1), std::domain_error);
}

TEST_CASE("value_at matches a linear scan") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const auto s = random_signal(rng, 3, 8.0, trial % 12);
    for (int k = 0; k < 10; ++k) {
      const double t = k < 3 && s.switch_count() ? s.switch_times()[std::min<std::size_t>(k, s.switch_count() - 1)]
                                                 : 8.0 * u(rng);
      REQUIRE(value_at(s, t) == support::scan_value(s, t));
    }
  }
}

TEST_CASE("tau operators") {
  const auto s = two_switches();
  CHECK(tau(s, 1, 0.5) == ExtTime(1.0));
  CHECK(tau(s, 2, 0.5) == ExtTime(2.5));
  CHECK(tau(s, 1, 3.0).is_infinite());
  CHECK(tau(s, 0, 0.5) == ExtTime(0.5));
  CHECK(tau(s, 1, 1.0) == ExtTime(2.5));
  CHECK(tau(s, 3, 0.0).is_infinite());
  CHECK(tau(s, 1, ExtTime::infinity()).is_infinite());
  CHECK_THROWS_AS(tau(s, -1, 0.0), std::domain_error);
  CHECK_THROWS_AS(tau(s, 1, -1.0), std::domain_error);
}

TEST_CASE("tau is monotone in the iterate and strictly ahead of t") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 6.0);
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = random_signal(rng, 2, 6.0, trial % 9);
    const double t = u(rng);
    for (int i = 0; i < 6; ++i) {
      const ExtTime a = tau(s, i, t), b = tau(s, i + 1, t);
      REQUIRE(a <= b);
      if (a == b) REQUIRE(a.is_infinite());
    }
    const ExtTime one = tau(s, 1, t);
    if (!one.is_infinite()) REQUIRE(one.value() > t);
  }
}

TEST_CASE("ExtTime arithmetic saturates") {
  const ExtTime inf = ExtTime::infinity();
  CHECK((inf + 3.0).is_infinite());
  CHECK((inf - ExtTime(3.0)).is_infinite());
  CHECK((ExtTime(5.0) - ExtTime(2.0)) == ExtTime(3.0));
  CHECK(ExtTime(1e300) < inf);
  CHECK_THROWS_AS(inf - inf, std::domain_error);
}

TEST_CASE("switch_count counts the open interval") {
  const auto s = two_switches();
  CHECK(switch_count(s, 0.5, 2.6) == 2);
  CHECK(switch_count(s, 1.0, 2.5) == 0);
  const SwitchingSignal four(2, 5.0, {1, 2, 3, 4}, {1, 2, 1, 2, 1});
  CHECK(switch_count(four, 0.9, 3.1) == 3);
  CHECK_THROWS_AS(switch_count(s, 2.0, 2.0), std::domain_error);
}

TEST_CASE("validate_adt examples") {
  const SwitchingSignal four(2, 5.0, {1, 2, 3, 4}, {1, 2, 1, 2, 1});
  CHECK(validate_adt(four, AdtClass(1.0, 1)).valid);

  const SwitchingSignal close(2, 5.0, {1.0, 1.01}, {1, 2, 1});
  const auto bad = validate_adt(close, AdtClass(1.0, 1));
  REQUIRE_FALSE(bad.valid);
  REQUIRE(bad.witness);
  CHECK(bad.witness->first == doctest::Approx(0.999).epsilon(1e-9));
  CHECK(bad.witness->second == doctest::Approx(1.011).epsilon(1e-9));
  CHECK(bad.witness_count == 2);
  // The witness really violates the bound.
  CHECK(switch_count(close, bad.witness->first, bad.witness->second) >
        1 + (bad.witness->second - bad.witness->first) / 1.0);

  CHECK(validate_adt(SwitchingSignal::constant(2, 9.0, 1), AdtClass(1e-3, 1)).valid);
}

TEST_CASE("validate_adt agrees with the exhaustive interval oracle") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> tau_dist(0.2, 2.0);
  int valid = 0;
  for (int trial = 0; trial < 600; ++trial) {
    const auto s = random_signal(rng, 3, 10.0, 1 + trial % 14);
    const AdtClass cls(tau_dist(rng), 1 + trial % 3);
    const auto r = validate_adt(s, cls);
    REQUIRE(r.valid == support::brute_force_adt(s, cls.tau_d, cls.n0));
    if (r.valid) {
      ++valid;
    } else {
      REQUIRE(r.witness);
      REQUIRE(switch_count(s, r.witness->first, r.witness->second) >
              cls.n0 + (r.witness->second - r.witness->first) / cls.tau_d);
    }
  }
  CHECK(valid > 50);
  CHECK(valid < 550);
}

TEST_CASE("generate_adt output validates and is deterministic") {
  const AdtClass cls(1.0, 1);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto s = generate_adt(seed, cls, ModeSet(3), 10.0);
    REQUIRE(validate_adt(s, cls).valid);
    for (std::size_t i = 1; i < s.modes().size(); ++i) REQUIRE(s.modes()[i] != s.modes()[i - 1]);
    REQUIRE(s == generate_adt(seed, cls, ModeSet(3), 10.0));
  }
  const AdtClass loose(0.3, 4);
  for (std::uint64_t seed = 0; seed < 50; ++seed) REQUIRE(validate_adt(generate_adt(seed, loose, ModeSet(2), 20.0), loose).valid);
  CHECK_THROWS_AS(generate_adt(1, cls, ModeSet(1), 10.0), std::invalid_argument);
}

TEST_CASE("signal_distance closed forms") {
  const auto u = SwitchingSignal::constant(2, 3.0, 1);
  const auto v = SwitchingSignal::constant(2, 3.0, 2);
  const auto d = signal_distance(u, v, 20);
  CHECK(d.value == 2.0 - 22.0 * std::ldexp(1.0, -20));
  CHECK(d.tail_bound == doctest::Approx(22.0 * std::ldexp(1.0, -20)));
  CHECK(signal_distance(u, u, 20).value == 0.0);

  // Disagreement on [0, 1) only: sum_{n <= N} 2^{-n} = 1 - 2^{-N}.
  const SwitchingSignal a(2, 3.0, {1.0}, {1, 2});
  const SwitchingSignal b = SwitchingSignal::constant(2, 3.0, 2);
  CHECK(signal_distance(a, b, 30).value == doctest::Approx(1.0 - std::ldexp(1.0, -30)).epsilon(1e-15));
  CHECK_THROWS_AS(signal_distance(a, b, 0), std::domain_error);
}

TEST_CASE("signal_distance matches the breakpoint-grid oracle and is a pseudometric") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const auto u = random_signal(rng, 3, 12.0, trial % 10);
    const auto v = random_signal(rng, 3, 12.0, (trial + 3) % 10);
    const auto w = random_signal(rng, 3, 12.0, (trial + 6) % 10);
    const double uv = signal_distance(u, v, 16).value;
    REQUIRE(uv == doctest::Approx(support::breakpoint_distance(u, v, 16)).epsilon(1e-12));
    REQUIRE(uv == signal_distance(v, u, 16).value);
    REQUIRE(signal_distance(u, u, 16).value == 0.0);
    REQUIRE(uv <= signal_distance(u, w, 16).value + signal_distance(w, v, 16).value + 1e-12);
  }
}

TEST_CASE("shift") {
  const auto s = two_switches();
  CHECK(shift(s, 0.0) == s);
  const auto r = shift(s, 1.5);
  REQUIRE(r.switch_count() == 1);
  CHECK(r.switch_times()[0] == doctest::Approx(1.0));
  CHECK(r.initial_mode() == 2);
  CHECK(r.horizon() == doctest::Approx(3.5));
  CHECK(shift(s, 5.0).horizon() == 0.0);
  CHECK_THROWS_AS(shift(s, 5.5), std::domain_error);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int trial = 0; trial < 200; ++trial) {
    const auto g = generate_adt(static_cast<std::uint64_t>(trial), AdtClass(0.5, 2), ModeSet(3), 10.0);
    const double at = u(rng);
    const auto h = shift(g, at);
    REQUIRE(validate_adt(h, AdtClass(0.5, 2)).valid);
    for (double t : {0.0, 0.3 * h.horizon(), h.horizon()})
      REQUIRE(value_at(h, t) == support::scan_value(g, t + at));
  }
}

TEST_CASE("extract_convergent_subsequence: constant sequence") {
  const SwitchingSignal s(2, 6.0, {1.0, 3.0}, {1, 2, 1});
  const std::vector<SwitchingSignal> seq(9, s);
  const auto r = extract_convergent_subsequence(seq, AdtClass(1.0, 1), 1e-6);
  REQUIRE(r.found);
  CHECK(r.indices.size() == 9);
  REQUIRE(r.limit);
  CHECK(*r.limit == s);
}

TEST_CASE("extract_convergent_subsequence: 1 + 1/k family") {
  std::vector<SwitchingSignal> seq;
  for (int k = 1; k <= 50; ++k) seq.emplace_back(2, 5.0, std::vector<double>{1.0 + 1.0 / k}, std::vector<Mode>{1, 2});
  const AdtClass cls(1.0, 1);
  const auto r = extract_convergent_subsequence(seq, cls, 0.05);
  REQUIRE(r.found);
  CHECK(r.indices.size() >= 7);
  REQUIRE(r.limit);
  REQUIRE(r.limit->switch_count() == 1);
  CHECK(std::abs(r.limit->switch_times()[0] - 1.0) <= 1e-3);
  CHECK(r.limit->modes() == std::vector<Mode>{1, 2});
  CHECK(validate_adt(*r.limit, cls).valid);
}

TEST_CASE("extract_convergent_subsequence: interleaved constant families") {
  std::vector<SwitchingSignal> seq;
  for (int k = 0; k < 11; ++k) seq.push_back(SwitchingSignal::constant(2, 4.0, k % 3 == 0 ? 2 : 1));
  const auto r = extract_convergent_subsequence(seq, AdtClass(1.0, 1), 1e-3);
  REQUIRE(r.found);
  for (auto k : r.indices) CHECK(k % 3 != 0);
  CHECK(r.indices.size() == 7);
  CHECK(*r.limit == SwitchingSignal::constant(2, 4.0, 1));
}

TEST_CASE("extract_convergent_subsequence: limit always validates") {
  for (std::uint64_t base = 0; base < 20; ++base) {
    const AdtClass cls(0.8, 2);
    std::vector<SwitchingSignal> seq;
    for (std::uint64_t k = 0; k < 16; ++k) seq.push_back(generate_adt(base * 100 + k, cls, ModeSet(2), 6.0));
    const auto r = extract_convergent_subsequence(seq, cls, 0.5);
    if (r.found) {
      REQUIRE(r.limit);
      REQUIRE(validate_adt(*r.limit, cls).valid);
    } else {
      REQUIRE_FALSE(r.diagnostics.empty());
    }
  }
  CHECK_THROWS_AS(extract_convergent_subsequence({SwitchingSignal::constant(2, 1.0, 1)}, AdtClass(1.0, 1), 0.1),
                  std::domain_error);
}
