#include <benchmark/benchmark.h>

#include "etd/analysis.hpp"
#include "etd/experiments.hpp"
#include "etd/random_task.hpp"

namespace {

etd::TaskSpec task_with_states(etd::Index n) {
  etd::RandomTaskOptions opts;
  opts.min_states = opts.max_states = n;
  etd::Rng rng(static_cast<std::uint64_t>(n));
  return etd::random_task(rng, opts);
}

void BM_AnalyzeEmphatic(benchmark::State& state) {
  const etd::TaskSpec task = task_with_states(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(etd::analyze(task, etd::Method::kEmphatic));
}
BENCHMARK(BM_AnalyzeEmphatic)->Arg(2)->Arg(6)->Arg(32)->Arg(128);

void BM_ValidateTask(benchmark::State& state) {
  const etd::TaskSpec task = task_with_states(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(etd::validate_task(task));
}
BENCHMARK(BM_ValidateTask)->Arg(6)->Arg(128);

void BM_MomentCurve(benchmark::State& state) {
  const etd::Scenario sc = etd::build_scenario("chain5");
  for (auto _ : state) {
    benchmark::DoNotOptimize(etd::f_moment_curve(sc, etd::InterestMode::kStateInterest, state.range(0)));
  }
}
BENCHMARK(BM_MomentCurve)->Arg(30)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
