#include <benchmark/benchmark.h>

#include "etd/experiments.hpp"
#include "etd/learners.hpp"

namespace {

void BM_LearnerStep(benchmark::State& state) {
  const auto kind = static_cast<etd::LearnerKind>(state.range(0));
  const etd::Scenario sc = etd::build_scenario("chain5");
  etd::Rng rng(1);
  const auto traj = etd::sample_trajectory(sc.task, 0, 4096, rng);
  etd::LearnerState ls = etd::make_learner_state(sc.task, 0, sc.default_theta0, 1e-4);
  std::size_t k = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(etd::learner_step(kind, ls, traj[k], sc.task));
    k = (k + 1) % traj.size();
  }
  state.SetLabel(std::string(etd::to_string(kind)));
}
BENCHMARK(BM_LearnerStep)->DenseRange(0, 3);

void BM_RunExperimentChain5(benchmark::State& state) {
  const etd::Scenario sc = etd::build_scenario("chain5");
  etd::RunConfig cfg = etd::default_run_config(sc, etd::LearnerKind::kEmphaticTdLambda, {1});
  cfg.horizon = state.range(0);
  cfg.record_every = cfg.horizon;
  for (auto _ : state) benchmark::DoNotOptimize(etd::run_experiment(sc, cfg));
  state.SetItemsProcessed(state.iterations() * cfg.horizon);
}
BENCHMARK(BM_RunExperimentChain5)->Arg(10000);

void BM_ForwardView(benchmark::State& state) {
  const etd::Scenario sc = etd::build_scenario("chain5");
  etd::Rng rng(2);
  const auto traj = etd::sample_trajectory(sc.task, 0, state.range(0), rng);
  for (auto _ : state) benchmark::DoNotOptimize(etd::forward_view_emphasis(traj, sc.task));
}
BENCHMARK(BM_ForwardView)->Arg(30)->Arg(300);

}  // namespace
