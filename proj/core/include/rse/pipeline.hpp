#pragma once

#include <memory>
#include <string>
#include <vector>

#include "rse/combinatorics.hpp"
#include "rse/identification.hpp"
#include "rse/reconstruction.hpp"
#include "rse/redundancy.hpp"
#include "rse/scenario.hpp"

namespace rse {

/// Everything produced by one simulate -> observe -> identify -> reconstruct
/// run, kept in memory for tests and written to disk by write_artifacts.
struct PipelineResult {
  std::string scenario_name;
  InspectMode mode = InspectMode::Subspace;

  ComplexityReport counts;
  double grid_delta = 0.0;
  int grid_points = 0;
  std::vector<double> group_M;
  std::vector<double> delta_floor;    // per sensor
  std::vector<double> delta_coeff;    // per sensor

  std::shared_ptr<const GroupPlan> plan;
  std::shared_ptr<const SampleGrid> grid;
  Trajectory trajectory;
  BankRun bank;
  MonitorResult monitor;

  std::vector<Vector> xhat;      // per sample
  std::vector<double> err_inf;   // vs simulated truth

  std::string summary_json;
  int exit_code = 0;  // 0 ok, 4 identification exhausted somewhere
};

/// Builds the group plan for a scenario: the sec5 builtin wires identity
/// projections and the known linear bases; linear plants go through the
/// constructive decomposition.
struct PreparedScenario {
  PlantModel plant;
  std::shared_ptr<const GroupPlan> plan;
  std::optional<AnalyticInverse> analytic;
  std::vector<SignalSpec> attack;
  std::vector<double> thetas;
  Vector x0;
};

PreparedScenario prepare_scenario(const Scenario& sc);

PipelineResult run_pipeline(const Scenario& sc);

/// trajectory.csv, estimates.csv, detections.jsonl, xhat.csv, summary.json
/// (and optional SVG plots) under out_dir.
void write_artifacts(const PipelineResult& result, const std::string& out_dir, bool svg);

/// Case counts without running anything: sec5 groups or the linear
/// decomposition's groups.
ComplexityReport count_cases(const Scenario& sc);

}  // namespace rse
