#include "switchinv/builtin.hpp"

#include <numbers>

namespace switchinv::builtin {

Vector<double> spiral(const Vector<double>& xi) {
  Vector<double> out(2);
  out << -2.0 * xi[0] - 2.0 * xi[1], 2.0 * xi[0];
  return out;
}

Vector<double> center(const Vector<double>& xi) {
  Vector<double> out(2);
  out << -xi[1], xi[0];
  return out;
}

Vector<double> damped(const Vector<double>& xi) {
  Vector<double> out(2);
  out << -xi[0] - xi[1], xi[0];
  return out;
}

Vector<double> saturating_sink(const Vector<double>& xi) {
  const double r2 = xi.squaredNorm();
  return -xi / (1.0 + r2 * r2);
}

Covering<double> half_planes() {
  return Covering<double>({[](const Vector<double>& xi) { return xi[0]; },
                           [](const Vector<double>& xi) { return -xi[0]; }});
}

FeedbackRule<double> sign_rule() {
  return {[](const Vector<double>& xi) -> Mode { return xi[0] < 0.0 ? 1 : 2; },
          [](const Vector<double>& xi, Mode) { return xi[0]; }};
}

LyapunovCandidate<double> quadratic(double scale) {
  return {[scale](const Vector<double>& xi, Mode) { return scale * xi.squaredNorm(); },
          [scale](const Vector<double>& xi, Mode) { return Vector<double>(2.0 * scale * xi); },
          {}};
}

SwitchedSystem<double> example1_system() { return {2, {spiral, center}, half_planes()}; }

SwitchedSystem<double> example2_system() { return {2, {damped, saturating_sink}, Covering<double>::trivial(2)}; }

SwitchedSystem<double> two_centers_system() { return {2, {center, center}, half_planes()}; }

SwitchedSystem<double> center_system() { return {2, {center}, Covering<double>::trivial(1)}; }

OutputFunction<double> example2_outputs() {
  return {{[](const Vector<double>& xi) { return xi[0] * xi[0]; },
           [](const Vector<double>& xi) {
             const double r2 = xi.squaredNorm();
             return r2 / (1.0 + r2 * r2);
           }}};
}

std::vector<Vector<double>> polar_grid(const std::vector<double>& radii, int directions, double offset) {
  std::vector<Vector<double>> out;
  for (double r : radii) {
    for (int k = 0; k < directions; ++k) {
      const double th = 2.0 * std::numbers::pi * (k + offset) / directions;
      Vector<double> x(2);
      x << r * std::cos(th), r * std::sin(th);
      out.push_back(x);
    }
  }
  return out;
}

namespace {

GuasScenario<double> feedback_scenario(std::string id, SwitchedSystem<double> system) {
  GuasScenario<double> sc(std::move(id), std::move(system), quadratic(1.0));
  sc.feedback = sign_rule();
  sc.initial_conditions = polar_grid({0.25, 0.75, 1.25, 2.0}, 4);
  sc.horizon = 60.0;
  sc.region.r_min = 0.1;
  sc.region.r_max = 2.0;
  return sc;
}

}  // namespace

GuasScenario<double> example1_scenario() { return feedback_scenario("example1", example1_system()); }

GuasScenario<double> two_centers_scenario() { return feedback_scenario("two_centers", two_centers_system()); }

GuasScenario<double> example2_scenario() {
  GuasScenario<double> sc("example2", example2_system(), quadratic(0.5));
  sc.W = example2_outputs();
  sc.generator = AdtClass(0.5, 2);
  sc.seed = 1;
  sc.initial_conditions = polar_grid({0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0}, 4);
  sc.horizon = 100.0;
  sc.region.r_min = 0.1;
  sc.region.r_max = 3.0;
  return sc;
}

std::optional<GuasScenario<double>> scenario_by_id(const std::string& id) {
  if (id == "example1") return example1_scenario();
  if (id == "example2") return example2_scenario();
  if (id == "two_centers") return two_centers_scenario();
  return std::nullopt;
}

const std::vector<std::string>& system_ids() {
  static const std::vector<std::string> ids{"example1", "example2", "two_centers", "center"};
  return ids;
}

}  // namespace switchinv::builtin
