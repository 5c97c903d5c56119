#include <benchmark/benchmark.h>

#include "mdpsense/finance.hpp"
#include "mdpsense/inventory.hpp"
#include "mdpsense/sensitivity.hpp"

using namespace mdpsense;

static void BM_InventoryBellman(benchmark::State& state) {
  const FiniteMdm mdm = build_inventory_mdm(builtin_inventory_spec());
  for (auto _ : state) benchmark::DoNotOptimize(bellman(mdm));
}
BENCHMARK(BM_InventoryBellman);

static void BM_InventoryRewardIteration(benchmark::State& state) {
  const FiniteMdm mdm = build_inventory_mdm(builtin_inventory_spec());
  const StrategySet set =
      enumerate_optimal_strategies(mdm, OptimalEnumMode::MaximizerProduct);
  for (auto _ : state)
    benchmark::DoNotOptimize(reward_iteration(mdm, set.strategies.front()));
}
BENCHMARK(BM_InventoryRewardIteration);

static void BM_InventoryDerivative(benchmark::State& state) {
  const InventorySpec spec = builtin_inventory_spec();
  const FiniteMdm mdm = build_inventory_mdm(spec);
  const StrategySet set =
      enumerate_optimal_strategies(mdm, OptimalEnumMode::MaximizerProduct);
  const TransitionFunction q = demand_direction(spec, 0);
  for (auto _ : state)
    benchmark::DoNotOptimize(frechet_fixed(mdm, set.strategies.front(), q));
}
BENCHMARK(BM_InventoryDerivative);

static void BM_BsmHadamard(benchmark::State& state) {
  const FinanceModel model = bsm_model(0.05, 0.2, 0.03, 0.5, int(state.range(0)), 1.0);
  const auto q = jump_direction(model, 0.5, {0});
  for (auto _ : state) benchmark::DoNotOptimize(hadamard_finance(model, q));
}
BENCHMARK(BM_BsmHadamard)->Arg(4)->Arg(12)->Arg(52);

static void BM_SolveGammaLognormal(benchmark::State& state) {
  const FinanceModel model = bsm_model(0.05, 0.2, 0.035, 0.5, 12, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(solve_gamma_numeric(model, 0));
}
BENCHMARK(BM_SolveGammaLognormal);

BENCHMARK_MAIN();
