#pragma once

#include <vector>

#include "rse/compact_set.hpp"
#include "rse/plant.hpp"
#include "rse/signals.hpp"
#include "rse/types.hpp"

namespace rse {

/// Built-in 20-sensor benchmark scenario: 3-state input-affine plant,
/// h_i = x1 - x3^2/2 + (i/10) x2 for i <= 10 and h_i = x3/2 - sin(x2)/2 for
/// i >= 11, all observability maps scalar (Phi_i = h_i). Canonical per-sensor
/// dynamics: z_i' = -z_i + (i/10) u for i <= 10 and z_i' = u/2 for i >= 11.
struct Sec5Scenario {
  PlantModel plant;
  CompactSetSpec domain;      // inf-norm ball, radius 0.5
  SignalSpec input;           // u(t) = 0.25 sin(0.2 pi t)
  std::vector<SignalSpec> attack;  // square wave on sensors 1..4 from t = 4
  double noise_bound = 0.01;
  std::uint64_t seed = 1;
  double horizon = 10.0;
  double step = 1e-3;
  double grid_delta = 0.05;
  int q = 4;
  double theta = 20.0;
  std::vector<IndexSet> groups;  // {1..10}, {11..20}
  double attack_amplitude = 0.5;
  double attack_period = 2.0;
  double attack_start = 4.0;
};

Sec5Scenario builtin_scenario_sec5(double attack_amplitude = 0.5);

/// Every h_i is linear in s(x) = (x1 - x3^2/2, x2, x3/2 - sin(x2)/2):
/// row [1, i/10, 0] for i <= 10 and [0, 0, 1] for i >= 11. The basis for a
/// sensor subset keeps those rows and drops all-zero columns, e.g. rows
/// [1, i/10] for subsets of group 1 and the all-ones column for group 2.
Matrix sec5_group_basis(const IndexSet& sensors);

/// Closed-form left inverse used by the reconstruction path: least squares of
/// the identified readings against their [1, i/10, 0] / [0, 0, 1] rows gives
/// s = (s1, s2, s3); then x2 = s2, x3 = 2 s3 + sin(x2), x1 = s1 + x3^2/2.
/// Requires the identified sensors to span all three s-components.
Vector sec5_analytic_inverse(const std::vector<std::pair<IndexSet, Vector>>& identified);

}  // namespace rse
