// Microbenchmarks for the steal-rate math and full virtual-mode runs.

#include <benchmark/benchmark.h>

#include <random>

#include "a2ws/run.hpp"
#include "a2ws/steal_policy.hpp"

using namespace a2ws;

namespace {

policy::RateView window_of(int size) {
  policy::RateView view;
  view.self_rank = 0;
  view.elapsed = 1.0;
  std::mt19937_64 rng(7);
  for (int j = 0; j < size; ++j) {
    double n = static_cast<double>(rng() % 100);
    view.entries.push_back(
        {j, n, 0.05 + static_cast<double>(rng() % 50) / 100.0, 0.0, n});
  }
  return view;
}

}  // namespace

static void BM_StealRate(benchmark::State& state) {
  policy::RateView view = window_of(static_cast<int>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(policy::steal_rate(view, 0));
}
BENCHMARK(BM_StealRate)->Arg(5)->Arg(27);

static void BM_SelectVictim(benchmark::State& state) {
  policy::RateView view = window_of(static_cast<int>(state.range(0)));
  std::mt19937_64 rng(11);
  double s_self = policy::steal_rate(view, 0);
  for (auto _ : state)
    benchmark::DoNotOptimize(policy::select_victim(view, s_self, rng));
}
BENCHMARK(BM_SelectVictim)->Arg(5)->Arg(27);

static void BM_VirtualRun(benchmark::State& state) {
  for (auto _ : state) {
    RunParams p;
    p.scheduler = SchedulerKind::a2ws;
    p.cluster = builtin_config("C1");
    p.workload = {480, 0.002, 0.02, 1};
    p.mode = ExecMode::virtual_accounting;
    RunResult r = run_schedule(p);
    benchmark::DoNotOptimize(r.makespan);
  }
}
BENCHMARK(BM_VirtualRun)->Unit(benchmark::kMillisecond);

static void BM_VirtualRunCtws(benchmark::State& state) {
  for (auto _ : state) {
    RunParams p;
    p.scheduler = SchedulerKind::ctws;
    p.cluster = builtin_config("C1");
    p.workload = {480, 0.002, 0.02, 1};
    p.mode = ExecMode::virtual_accounting;
    RunResult r = run_schedule(p);
    benchmark::DoNotOptimize(r.makespan);
  }
}
BENCHMARK(BM_VirtualRunCtws)->Unit(benchmark::kMillisecond);
