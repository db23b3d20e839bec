#include "toscca/core.hpp"
#include "toscca/solver.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

using namespace toscca;

namespace {

Matrix random_block(Index n, Index m, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix x(n, m);
  for (Index j = 0; j < m; ++j) {
    for (Index i = 0; i < n; ++i) x(i, j) = normal(rng);
  }
  return standardize(RawMatrix{x, {}, {}}).values;
}

void BM_SoftThresholdTopk(benchmark::State& state) {
  const Index m = state.range(0);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  Vector v(m);
  for (Index i = 0; i < m; ++i) v(i) = normal(rng);
  for (auto _ : state) benchmark::DoNotOptimize(soft_threshold_topk(v, 100));
  state.SetItemsProcessed(state.iterations() * m);
}
BENCHMARK(BM_SoftThresholdTopk)->Arg(1000)->Arg(10000)->Arg(50000);

void BM_FitComponent(benchmark::State& state) {
  const Matrix x1 = random_block(100, state.range(0), 2);
  const Matrix x2 = random_block(100, 500, 3);
  SolverConfig cfg;
  cfg.seed = 4;
  for (auto _ : state) benchmark::DoNotOptimize(fit_component(x1, x2, {100, 100}, cfg));
}
BENCHMARK(BM_FitComponent)->Arg(2500)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_GridVersusSingles(benchmark::State& state) {
  const Matrix x1 = random_block(100, 2500, 5);
  const Matrix x2 = random_block(100, 500, 6);
  std::vector<SparsityPair> grid;
  for (Index i = 1; i <= 8; ++i) grid.push_back({100 * i, 100});
  SolverConfig cfg;
  cfg.seed = 7;
  const bool batched = state.range(0) == 1;
  for (auto _ : state) {
    if (batched) {
      benchmark::DoNotOptimize(fit_component_grid(x1, x2, grid, cfg));
    } else {
      for (const auto& sp : grid) benchmark::DoNotOptimize(fit_component(x1, x2, sp, cfg));
    }
  }
  state.SetLabel(batched ? "grid" : "singles");
}
BENCHMARK(BM_GridVersusSingles)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
