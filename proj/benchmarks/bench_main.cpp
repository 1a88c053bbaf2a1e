#include <benchmark/benchmark.h>

#include "rse/combinatorics.hpp"
#include "rse/identification.hpp"
#include "rse/observer.hpp"
#include "rse/pipeline.hpp"
#include "rse/sample_grid.hpp"
#include "rse/sec5.hpp"

namespace {

void BM_CombinationStream_20_4(benchmark::State& state) {
  for (auto _ : state) {
    rse::CombinationStream stream(20, 4);
    std::int64_t count = 0;
    while (auto s = stream.next()) ++count;
    benchmark::DoNotOptimize(count);
  }
}
BENCHMARK(BM_CombinationStream_20_4);

void BM_SynthesizeGain(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(rse::synthesize_gain(n, 20.0));
  }
}
BENCHMARK(BM_SynthesizeGain)->Arg(1)->Arg(3)->Arg(6);

void BM_DistanceToCloud(benchmark::State& state) {
  const auto sc = rse::builtin_scenario_sec5();
  const auto grid =
      rse::SampleGrid::build(sc.domain, 1.0 / (2.0 * static_cast<double>(state.range(0))));
  const rse::IndexSet I = rse::IndexSet::full(20);
  const auto cloud = grid.image_cloud(sc.plant.phi, I);
  const rse::Vector z = rse::Vector::Constant(20, 0.1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rse::distance_to_cloud(z, *cloud));
  }
  state.SetItemsProcessed(state.iterations() * grid.size());
}
BENCHMARK(BM_DistanceToCloud)->Arg(5)->Arg(10)->Arg(20);

void BM_RK4StepSec5(benchmark::State& state) {
  const auto sc = rse::builtin_scenario_sec5();
  rse::Vector x = rse::Vector::Zero(3);
  auto field = [&](const rse::Vector& s) { return sc.plant.f(s) + sc.plant.g(s) * 0.25; };
  for (auto _ : state) {
    x = rse::rk4_step(field, x, 1e-3);
    benchmark::DoNotOptimize(x);
  }
}
BENCHMARK(BM_RK4StepSec5);

void BM_IdentifyEpochSec5(benchmark::State& state) {
  // full lexicographic rescan of group 1 with sensors 1-4 corrupted
  rse::Scenario sc = rse::default_sec5_scenario();
  sc.horizon = 0.2;
  auto prep = rse::prepare_scenario(sc);
  const auto grid = std::make_shared<const rse::SampleGrid>(
      rse::SampleGrid::build(sc.domain, sc.grid_delta));

  rse::InspectionConfig cfg;
  cfg.q = sc.q;
  cfg.mode = rse::InspectMode::Subspace;
  cfg.grid = grid;
  for (std::size_t j = 0; j < prep.plan->groups.size(); ++j)
    cfg.group_delta.push_back([](double) { return 0.01; });
  rse::Inspector inspector(*prep.plan, cfg);

  rse::Vector z_hat = rse::Vector::Zero(20);
  for (int i = 0; i < 4; ++i) z_hat[i] += 0.5;  // corrupted estimates

  for (auto _ : state) {
    auto ids = rse::identify_once(z_hat, prep.plant.layout, inspector, 5.0);
    benchmark::DoNotOptimize(ids);
  }
}
BENCHMARK(BM_IdentifyEpochSec5);

}  // namespace

BENCHMARK_MAIN();
