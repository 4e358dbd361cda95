#pragma once

#include "switchinv/stability.hpp"

#include <optional>
#include <string>
#include <vector>

namespace switchinv::builtin {

/// Rotation-with-damping field (-2 xi1 - 2 xi2, 2 xi1).
Vector<double> spiral(const Vector<double>& xi);
/// Center field (-xi2, xi1).
Vector<double> center(const Vector<double>& xi);
/// Damped oscillator (-xi1 - xi2, xi1).
Vector<double> damped(const Vector<double>& xi);
/// Saturating sink -xi / (1 + |xi|^4).
Vector<double> saturating_sink(const Vector<double>& xi);

/// chi_1 = {xi1 <= 0}, chi_2 = {xi1 >= 0}.
Covering<double> half_planes();

/// Mode 1 when x1 < 0, mode 2 when x1 >= 0.
FeedbackRule<double> sign_rule();

/// Mode-independent V = scale |xi|^2 with exact gradient.
LyapunovCandidate<double> quadratic(double scale);

SwitchedSystem<double> example1_system();
SwitchedSystem<double> example2_system();
/// Example 1 with the first field replaced by the center.
SwitchedSystem<double> two_centers_system();
/// Single-mode center.
SwitchedSystem<double> center_system();

/// W_1 = xi1^2, W_2 = |xi|^2 / (1 + |xi|^4).
OutputFunction<double> example2_outputs();

/// radii x directions grid; directions sit at angles 2 pi (k + offset) / directions.
std::vector<Vector<double>> polar_grid(const std::vector<double>& radii, int directions, double offset = 0.5);

GuasScenario<double> example1_scenario();
GuasScenario<double> example2_scenario();
GuasScenario<double> two_centers_scenario();

/// Built-in scenario by id (example1, example2, two_centers); nullopt when unknown.
std::optional<GuasScenario<double>> scenario_by_id(const std::string& id);

/// Names accepted by `system = ...` in scenario files.
const std::vector<std::string>& system_ids();

}  // namespace switchinv::builtin
