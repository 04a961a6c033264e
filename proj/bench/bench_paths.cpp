#include <benchmark/benchmark.h>

#include <vector>

#include "entropic/path_engine.hpp"
#include "entropic/policies.hpp"

using namespace entropic;

namespace {

PathProblem bridge_problem() {
  BridgeSpec spec;
  spec.start = 1.0;
  PathProblem p;
  p.policy = bridge_policy(spec);
  p.cost = CostFunctional::quadratic_terminal(0.0);
  p.grid = TimeGrid(1.0, 200);
  p.x0 = {1.0};
  return p;
}

constexpr std::size_t kPaths = 20000;

// materialized bundle route, one path after another
void reference(benchmark::State& state) {
  const auto p = bridge_problem();
  SimulationOptions o;
  o.seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(simulate_outcomes_reference(p, kPaths, o));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * kPaths));
}

void serial(benchmark::State& state) {
  const auto p = bridge_problem();
  SimulationOptions o;
  o.seed = 1;
  o.exec = Execution::serial_reference();
  for (auto _ : state) benchmark::DoNotOptimize(simulate_outcomes(p, kPaths, o));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * kPaths));
}

void openmp(benchmark::State& state) {
  const auto p = bridge_problem();
  SimulationOptions o;
  o.seed = 1;
  o.exec = Execution::with_threads(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(simulate_outcomes(p, kPaths, o));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * kPaths));
}

}  // namespace

BENCHMARK(reference)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(serial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(openmp)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
