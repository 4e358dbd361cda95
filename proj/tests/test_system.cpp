#include "support.hpp"

#include <doctest.h>

#include "switchinv/builtin.hpp"
#include "switchinv/system.hpp"

#include <cmath>
#include <numbers>

using namespace switchinv;
using support::vec2;
namespace bi = switchinv::builtin;

constexpr double kPi = std::numbers::pi;

TEST_CASE("dopri step reproduces the rotation closed form") {
  const auto sys = bi::example1_system();
  const auto sig = SwitchingSignal::constant(2, kPi / 2, 2);
  const auto traj = integrate(sys, vec2(1, 0), sig);
  CHECK((traj.states.back() - vec2(0, 1)).norm() < 1e-6);
  CHECK(traj.times.back() == kPi / 2);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const Eigen::VectorXd exact = vec2(std::cos(traj.times[k]), std::sin(traj.times[k]));
    REQUIRE((traj.states[k] - exact).norm() < 1e-8);
  }
  for (std::size_t k = 1; k < traj.size(); ++k) {
    REQUIRE(traj.times[k] > traj.times[k - 1]);
    REQUIRE((traj.states[k] - traj.states[k - 1]).norm() <= IntegratorOptions{}.max_dx + 1e-12);
  }
}

TEST_CASE("spiral mode matches its matrix exponential") {
  // f1 = A x with A = [[-2, -2], [2, 0]]; eigenvalues -1 +- i sqrt(3).
  const auto sys = bi::example1_system();
  const auto traj = integrate(sys, vec2(0.3, -1.1), SwitchingSignal::constant(2, 2.0, 1));
  Eigen::Matrix2d A;
  A << -2, -2, 2, 0;
  for (std::size_t k = 1; k < traj.size(); k += 7) {
    const Eigen::Matrix2d M = A * traj.times[k];
    // exp(M) via the Cayley-Hamilton form for 2x2 with complex eigenvalues a +- ib.
    const double a = M.trace() / 2.0;
    const double b = std::sqrt(M.determinant() - a * a);
    const Eigen::Matrix2d E =
        std::exp(a) * (std::cos(b) * Eigen::Matrix2d::Identity() + std::sin(b) / b * (M - a * Eigen::Matrix2d::Identity()));
    REQUIRE((traj.states[k] - E * vec2(0.3, -1.1)).norm() < 1e-8);
  }
}

TEST_CASE("equilibrium stays at the origin") {
  const auto sys = bi::example1_system();
  const auto sig = generate_adt(4, AdtClass(1.0, 1), sys.modes(), 10.0);
  const auto traj = integrate(sys, vec2(0, 0), sig);
  for (const auto& x : traj.states) REQUIRE(x.norm() == 0.0);
  const auto fb = integrate_feedback(sys, vec2(0, 0), bi::sign_rule(), 10.0);
  CHECK(fb.signal.switch_count() == 0);
  CHECK(fb.sup_norm() == 0.0);
}

TEST_CASE("example 2 mode 2 shrinks the norm strictly") {
  const auto sys = bi::example2_system();
  const auto traj = integrate(sys, vec2(3, 4), SwitchingSignal::constant(2, 20.0, 2));
  for (std::size_t k = 1; k < traj.size(); ++k) REQUIRE(traj.states[k].norm() < traj.states[k - 1].norm());
  // Oracle: r' = -r / (1 + r^4) integrates to ln r + r^4 / 4 = ln r0 + r0^4 / 4 - t.
  const double r0 = 5.0, r = traj.states.back().norm();
  CHECK(std::log(r) + std::pow(r, 4) / 4 == doctest::Approx(std::log(r0) + std::pow(r0, 4) / 4 - 20.0).epsilon(1e-9));
}

TEST_CASE("integrate restarts exactly at switch times") {
  const auto sys = bi::example2_system();
  const auto sig = generate_adt(9, AdtClass(0.5, 2), sys.modes(), 10.0);
  const auto traj = integrate(sys, vec2(1, 1), sig);
  REQUIRE(traj.switch_samples.size() == sig.switch_count() + 1);
  for (std::size_t i = 0; i < sig.switch_count(); ++i) {
    const auto idx = traj.switch_samples[i + 1];
    REQUIRE(traj.times[idx] == sig.switch_times()[i]);
    REQUIRE(traj.modes[idx] == sig.modes()[i + 1]);
  }
  for (std::size_t k = 0; k < traj.size(); ++k) REQUIRE(traj.modes[k] == value_at(sig, traj.times[k]));
  CHECK(traj.horizon() == sig.horizon());
}

TEST_CASE("halving tolerances moves the endpoint less than the local error budget") {
  const auto sys = bi::example2_system();
  const auto sig = generate_adt(2, AdtClass(0.5, 2), sys.modes(), 8.0);
  IntegratorOptions coarse;
  coarse.rtol = 1e-7;
  coarse.atol = 1e-10;
  IntegratorOptions fine = coarse;
  fine.rtol /= 2;
  fine.atol /= 2;
  const auto a = integrate(sys, vec2(1.5, -0.5), sig, coarse);
  const auto b = integrate(sys, vec2(1.5, -0.5), sig, fine);
  CHECK((a.states.back() - b.states.back()).norm() < 10.0 * a.stats.local_error_sum);
}

TEST_CASE("forward then backward integration returns to the start") {
  const std::vector<VectorField<double>> reversed{[](const Eigen::VectorXd& x) {
    return Eigen::VectorXd(-bi::damped(x));
  }};
  const SwitchedSystem<double> fwd(2, {bi::damped}, Covering<double>::trivial(1));
  const SwitchedSystem<double> bwd(2, reversed, Covering<double>::trivial(1));
  const Eigen::VectorXd x0 = vec2(0.7, -0.2);
  const auto there = integrate(fwd, x0, SwitchingSignal::constant(1, 3.0, 1));
  const auto back = integrate(bwd, there.states.back(), SwitchingSignal::constant(1, 3.0, 1));
  CHECK((back.states.back() - x0).norm() < 100 * IntegratorOptions{}.atol + 1e-9 * x0.norm());
}

TEST_CASE("blow-up raises a finite-escape error") {
  const SwitchedSystem<double> sys(1, {[](const Eigen::VectorXd& x) { return Eigen::VectorXd(x.array().square()); }},
                                   Covering<double>::trivial(1));
  Eigen::VectorXd x0(1);
  x0 << 1.0;
  // x' = x^2 from 1 escapes at t = 1.
  try {
    integrate(sys, x0, SwitchingSignal::constant(1, 2.0, 1));
    FAIL("expected FiniteEscapeError");
  } catch (const FiniteEscapeError& e) {
    CHECK(e.escape_time == doctest::Approx(1.0).epsilon(1e-3));
  }
}

TEST_CASE("feedback: example 1 first switch at a quarter turn") {
  const auto sys = bi::example1_system();
  const auto traj = integrate_feedback(sys, vec2(1, 0), bi::sign_rule(), 3.0);
  REQUIRE(traj.signal.switch_count() >= 1);
  CHECK(traj.signal.switch_times()[0] == doctest::Approx(kPi / 2).epsilon(1e-9));
  CHECK(traj.signal.modes()[0] == 2);
  CHECK(traj.signal.modes()[1] == 1);
  const auto idx = traj.switch_samples[1];
  CHECK((traj.states[idx] - vec2(0, 1)).norm() < 1e-8);
  for (double r : traj.event_residuals) CHECK(r <= IntegratorOptions{}.event_tol * 2.0);
}

TEST_CASE("feedback: dwell times match the closed-form half-turns") {
  const auto sys = bi::example1_system();
  const auto traj = integrate_feedback(sys, vec2(1, 0), bi::sign_rule(), 40.0);
  const auto& t = traj.signal.switch_times();
  REQUIRE(t.size() >= 6);
  for (std::size_t i = 1; i < t.size(); ++i) {
    const double expected = traj.signal.modes()[i] == 1 ? kPi / std::sqrt(3.0) : kPi;
    REQUIRE(t[i] - t[i - 1] == doctest::Approx(expected).epsilon(1e-7));
  }
  const double gap = min_dwell(traj.signal);
  CHECK(gap > 0.0);
  CHECK(validate_adt(traj.signal, AdtClass(gap, 1)).valid);
  for (std::size_t i = 0; i < traj.event_residuals.size(); ++i) {
    const auto& x = traj.states[traj.switch_samples[i + 1]];
    CHECK(traj.event_residuals[i] <= IntegratorOptions{}.event_tol * (1.0 + x.norm()));
  }
}

TEST_CASE("feedback inter-switch gaps are bounded below across an annulus grid") {
  const auto sys = bi::example1_system();
  double lo = 1e300, hi = 0.0;
  for (const auto& x0 : bi::polar_grid({0.1, 0.7, 1.3, 2.0}, 6)) {
    const auto traj = integrate_feedback(sys, x0, bi::sign_rule(), 30.0);
    const double g = min_dwell(traj.signal);
    lo = std::min(lo, g);
    hi = std::max(hi, g);
  }
  CHECK(lo == doctest::Approx(kPi / std::sqrt(3.0)).epsilon(1e-6));
  CHECK(hi / lo < 1.0 + 1e-6);
}

TEST_CASE("chattering rule raises") {
  // Mode 1 pushes right, mode 2 pushes left; the rule always points toward x1 = 0.
  const SwitchedSystem<double> sys(1,
                                   {[](const Eigen::VectorXd&) { return Eigen::VectorXd::Constant(1, 1.0); },
                                    [](const Eigen::VectorXd&) { return Eigen::VectorXd::Constant(1, -1.0); }},
                                   Covering<double>::trivial(2));
  const FeedbackRule<double> rule{[](const Eigen::VectorXd& x) -> Mode { return x[0] < 0 ? 1 : 2; },
                                  [](const Eigen::VectorXd& x, Mode) { return x[0]; }};
  IntegratorOptions opts;
  opts.max_switches = 50;
  Eigen::VectorXd x0(1);
  x0 << 0.5;
  CHECK_THROWS_AS(integrate_feedback(sys, x0, rule, 5.0, opts), ChatteringError);
}

TEST_CASE("covering compliance") {
  const auto sys = bi::example1_system();
  const auto traj = integrate_feedback(sys, vec2(1, 0), bi::sign_rule(), 20.0);
  CHECK(check_covering_compliance(traj, sys.covering(), 1e-8).compliant);
  CHECK(check_covering_compliance(traj, Covering<double>::trivial(2), 0.0).compliant);

  // Same switch times with the modes swapped.
  std::vector<Mode> swapped;
  for (Mode g : traj.signal.modes()) swapped.push_back(3 - g);
  const SwitchingSignal bad(2, 20.0, traj.signal.switch_times(), swapped);
  const auto wrong = integrate(sys, vec2(1, 0), bad);
  const auto report = check_covering_compliance(wrong, sys.covering(), 1e-8);
  REQUIRE_FALSE(report.compliant);
  REQUIRE_FALSE(report.violations.empty());
  CHECK(report.violations.front().mode == 1);
  CHECK(report.violations.front().margin > 0.0);
}

TEST_CASE("gamma_star and equilibrium") {
  CHECK(gamma_star(bi::half_planes(), 2) == std::vector<Mode>{1, 2});
  CHECK(gamma_star(Covering<double>::trivial(3), 2) == std::vector<Mode>{1, 2, 3});
  const Covering<double> offset({[](const Eigen::VectorXd& x) { return x[0] + 1.0; },
                                 [](const Eigen::VectorXd&) { return -1.0; }});
  CHECK(gamma_star(offset, 2) == std::vector<Mode>{2});

  CHECK(check_equilibrium(bi::example1_system(), 1e-12).passed);
  CHECK(check_equilibrium(bi::example2_system(), 1e-12).passed);
  const SwitchedSystem<double> shifted_sys(
      2, {[](const Eigen::VectorXd& x) { return Eigen::VectorXd(bi::spiral(x) + vec2(1, 0)); }, bi::center},
      bi::half_planes());
  const auto eq = check_equilibrium(shifted_sys, 1e-12);
  REQUIRE_FALSE(eq.passed);
  REQUIRE(eq.violators.size() == 1);
  CHECK(eq.violators[0].first == 1);
  CHECK(eq.violators[0].second == 1.0);
}

TEST_CASE("coverings of the built-in systems leave nothing uncovered") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  std::vector<Eigen::VectorXd> pts;
  for (int k = 0; k < 500; ++k) pts.push_back(vec2(n(rng), n(rng)));
  pts.push_back(vec2(0, 0));
  CHECK(uncovered_points(bi::half_planes(), pts).empty());
  // Modes cover x1 <= -1 and x1 >= 1 only.
  const Covering<double> gap({[](const Eigen::VectorXd& x) { return x[0] + 1.0; },
                              [](const Eigen::VectorXd& x) { return 1.0 - x[0]; }});
  CHECK_FALSE(uncovered_points(gap, pts).empty());
}

TEST_CASE("shifted trajectory restarts the clock") {
  const auto sys = bi::example1_system();
  const auto traj = integrate_feedback(sys, vec2(1, 0), bi::sign_rule(), 20.0);
  const auto s = shifted(traj, 5.0);
  const auto it = std::lower_bound(traj.times.begin(), traj.times.end(), 5.0);
  const double s0 = *it;
  CHECK(s.times.front() == 0.0);
  CHECK(s.horizon() == doctest::Approx(20.0 - s0));
  CHECK(s.states.front() == traj.states[static_cast<std::size_t>(it - traj.times.begin())]);
  for (std::size_t k = 0; k < s.size(); ++k) REQUIRE(s.modes[k] == value_at(s.signal, s.times[k]));
}
