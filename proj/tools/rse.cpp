// rse: resilient state estimation simulator.
//   rse run        simulate, observe, identify, reconstruct; write artifacts
//   rse count      global vs local identification case counts
//   rse redundancy grid-relative k-redundancy verdict for a map or fixture
//   rse decompose  constructive linear decomposition plan

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "rse/errors.hpp"
#include "rse/fixtures.hpp"
#include "rse/pipeline.hpp"
#include "rse/redundancy.hpp"
#include "rse/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSchema = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitExhausted = 4;

struct CommonOpts {
  std::string scenario_path;
  std::string out_dir;
  bool svg = false;
  std::optional<std::uint64_t> seed;
  std::optional<double> attack_amplitude;
};

rse::Scenario load_with_overrides(const CommonOpts& opts) {
  rse::Scenario sc = rse::load_scenario(opts.scenario_path);
  if (opts.seed) sc.seed = *opts.seed;
  if (opts.attack_amplitude) sc.attack.amplitude = *opts.attack_amplitude;
  if (!opts.out_dir.empty()) sc.out_dir = opts.out_dir;
  sc.svg = sc.svg || opts.svg;
  return sc;
}

int cmd_run(const CommonOpts& opts) {
  rse::Scenario sc = load_with_overrides(opts);
  rse::PipelineResult result = rse::run_pipeline(sc);
  rse::write_artifacts(result, sc.out_dir, sc.svg);
  std::cout << result.summary_json << std::endl;
  return result.exit_code;
}

int cmd_count(const CommonOpts& opts) {
  rse::Scenario sc = load_with_overrides(opts);
  const rse::ComplexityReport report = rse::count_cases(sc);
  std::cout << "global " << report.global.str() << "\n";
  std::cout << "local " << report.local.str() << std::endl;
  return kExitOk;
}

int cmd_redundancy(const CommonOpts& opts, int k, bool rank_criterion) {
  rse::Scenario sc = load_with_overrides(opts);

  rse::VectorMap map;
  rse::CompactSetSpec domain = sc.domain;
  if (sc.plant_kind == rse::Scenario::PlantKind::Fixture) {
    map = sc.fixture == "polar" ? rse::make_polar_map() : rse::make_projected_polar_map();
    domain = rse::polar_domain();
  } else {
    rse::PreparedScenario prep = rse::prepare_scenario(sc);
    map = prep.plant.phi;
  }

  const rse::SampleGrid grid = rse::SampleGrid::build(domain, sc.grid_delta);
  rse::RedundancyVerdict verdict = rse::check_k_redundant(map, grid, k);
  if (rank_criterion) {
    const auto rank = rse::check_rank_criterion(map, grid, k);
    std::cout << "{\"rank_criterion\": " << (rank.holds ? "true" : "false") << "}\n";
  }
  std::cout << verdict.to_json() << std::endl;
  if (!opts.out_dir.empty()) {
    std::filesystem::create_directories(opts.out_dir);
    std::ofstream out(std::filesystem::path(opts.out_dir) / "verdict.json");
    out << verdict.to_json() << "\n";
  }
  return kExitOk;
}

int cmd_decompose(const CommonOpts& opts, int q_override) {
  rse::Scenario sc = load_with_overrides(opts);
  if (sc.plant_kind != rse::Scenario::PlantKind::Linear)
    throw rse::SchemaError("decompose: scenario must declare a linear plant");
  const int q = q_override >= 0 ? q_override : sc.q;
  const rse::LinearPlan plan = rse::plan_from_linear(*sc.linear, q, sc.cluster_tol);
  std::cout << plan.to_json() << std::endl;
  if (!opts.out_dir.empty()) {
    std::filesystem::create_directories(opts.out_dir);
    std::ofstream out(std::filesystem::path(opts.out_dir) / "plan.json");
    out << plan.to_json() << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"resilient state estimation under sparse sensor attacks"};
  app.require_subcommand(1);

  CommonOpts opts;
  int k = 2;
  int q_override = -1;
  bool rank_criterion = false;

  auto add_common = [&](CLI::App* cmd, bool needs_out) {
    cmd->add_option("scenario", opts.scenario_path, "scenario JSON file")->required();
    cmd->add_option("--seed", opts.seed, "override the noise seed");
    cmd->add_option("--out", opts.out_dir, "output directory");
    if (needs_out) cmd->add_flag("--svg", opts.svg, "emit SVG plots");
  };

  CLI::App* run = app.add_subcommand("run", "simulate and estimate");
  add_common(run, true);
  run->add_option("--attack-amplitude", opts.attack_amplitude, "override the attack amplitude");

  CLI::App* count = app.add_subcommand("count", "identification case counts");
  add_common(count, false);

  CLI::App* red = app.add_subcommand("redundancy", "k-redundancy verdict");
  add_common(red, false);
  red->add_option("--k", k, "redundancy level to test")->required();
  red->add_flag("--rank", rank_criterion, "also run the Jacobian rank criterion");

  CLI::App* dec = app.add_subcommand("decompose", "linear decomposition plan");
  add_common(dec, false);
  dec->add_option("--q", q_override, "attacked-sensor budget for the complexity report");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(opts);
    if (count->parsed()) return cmd_count(opts);
    if (red->parsed()) return cmd_redundancy(opts, k, rank_criterion);
    if (dec->parsed()) return cmd_decompose(opts, q_override);
  } catch (const rse::SchemaError& e) {
    std::cerr << "schema error: " << e.what() << std::endl;
    return kExitSchema;
  } catch (const std::invalid_argument& e) {
    std::cerr << "schema error: " << e.what() << std::endl;
    return kExitSchema;
  } catch (const rse::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << std::endl;
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitNumeric;
  }
  return kExitOk;
}
