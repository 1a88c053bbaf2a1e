#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rse/compact_set.hpp"
#include "rse/identification.hpp"
#include "rse/linear_decomposition.hpp"
#include "rse/plant.hpp"
#include "rse/sec5.hpp"
#include "rse/signals.hpp"

namespace rse {

struct DeltaConfig {
  std::optional<double> floor;   // default: the per-channel noise bound
  double transient_coeff = 0.0;  // c in max(c e^{-theta t/8}, floor)
  bool calibrate = false;        // fit c from an attack-free run
};

struct AttackConfig {
  std::vector<int> sensors;  // 1-based
  std::string kind = "square";
  double amplitude = 0.5;
  double period = 2.0;
  double start = 4.0;
  double constant = 0.0;
  double slope = 0.0;
};

/// Fully resolved run configuration. Built from the sec5 defaults or parsed
/// from a versioned JSON document (see load_scenario).
struct Scenario {
  int version = 1;
  std::string name = "sec5";

  enum class PlantKind { Sec5, Linear, Fixture };
  PlantKind plant_kind = PlantKind::Sec5;

  std::optional<LinearSystem> linear;  // with input vector B
  std::optional<Vector> linear_B;
  std::string fixture;  // "polar" | "polar-projected" for redundancy checks

  CompactSetSpec domain = CompactSetSpec::ball(Vector::Zero(3), 0.5);
  std::optional<Vector> x0;  // default: zero

  SignalSpec input;
  AttackConfig attack;
  double noise_bound = 0.01;
  std::uint64_t seed = 1;

  double horizon = 10.0;
  double step = 1e-3;
  double grid_delta = 0.05;
  int q = 4;
  std::vector<double> thetas;  // broadcast from a scalar when parsing
  double theta_scalar = 20.0;

  InspectMode mode = InspectMode::Subspace;
  DeltaConfig delta;
  std::optional<std::vector<IndexSet>> groups;  // explicit; otherwise builtin/auto
  double guard_factor = 10.0;
  double cluster_tol = 1e-6;

  std::string out_dir = ".";
  bool svg = false;
};

/// The 20-sensor benchmark configuration with its paper defaults.
Scenario default_sec5_scenario();

/// Parses and validates a scenario JSON file. Throws SchemaError on malformed
/// or unknown content.
Scenario load_scenario(const std::string& path);

Scenario parse_scenario_json(const std::string& text);

}  // namespace rse
