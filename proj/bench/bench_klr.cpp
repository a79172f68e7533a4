#include <benchmark/benchmark.h>

#include "klr/experiment.hpp"
#include "klr/gram_operator.hpp"
#include "klr/rng.hpp"

using namespace klr;

namespace {

Execution mode(const benchmark::State& state) { return state.range(0) ? Execution::parallel : Execution::serial; }

void apply_block_dense(benchmark::State& state) {
  Rng rng(1);
  GramOperator op = GramOperator::dense(rng.normal_matrix(800, 800));
  const Matrix x = rng.normal_matrix(800, state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(op.apply_block(x, mode(state)));
}

void gap_sweep_fast(benchmark::State& state) {
  ExperimentConfig c = default_config(Preset::gap_sweep, Scale::fast);
  c.trials = 4;
  for (auto _ : state) benchmark::DoNotOptimize(run_preset(c, mode(state)));
}

}  // namespace

BENCHMARK(apply_block_dense)->ArgNames({"parallel", "b"})->ArgsProduct({{0, 1}, {1, 16, 64}});
BENCHMARK(gap_sweep_fast)->ArgNames({"parallel"})->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
