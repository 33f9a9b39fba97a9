// Microbenchmarks for the communication substrate and the deque protocol.

#include <benchmark/benchmark.h>

#include <numeric>
#include <thread>
#include <vector>

#include "a2ws/info_ring.hpp"
#include "a2ws/osc.hpp"
#include "a2ws/task_deque.hpp"

using namespace a2ws;

static void BM_FetchAddPacked(benchmark::State& state) {
  osc::Communicator comm(2, {});
  auto w = comm.create_window("ht", 1, osc::CellKind::packed_headtail);
  for (auto _ : state)
    benchmark::DoNotOptimize(comm.fetch_add_packed(w, 0, 0, -1));
}
BENCHMARK(BM_FetchAddPacked);

static void BM_FetchAddPackedContended(benchmark::State& state) {
  static osc::Communicator comm(8, {});
  static auto w = comm.create_window("ht.contended", 1,
                                     osc::CellKind::packed_headtail);
  for (auto _ : state)
    benchmark::DoNotOptimize(comm.fetch_add_packed(w, 0, 0, -1));
}
BENCHMARK(BM_FetchAddPackedContended)->Threads(2)->Threads(4);

static void BM_LockedPut(benchmark::State& state) {
  osc::Communicator comm(2, {});
  auto w = comm.create_window("data", 64, osc::CellKind::scalar_word);
  std::vector<osc::Word> payload(8, 42);
  for (auto _ : state)
    comm.with_lock(w, 1, osc::LockMode::shared,
                   [&] { comm.put(w, 1, 0, payload); });
}
BENCHMARK(BM_LockedPut);

static void BM_GetTask(benchmark::State& state) {
  osc::Communicator comm(2, {});
  DequeSpace deques(comm, 1 << 20);
  std::vector<TaskId> tasks(1 << 20);
  std::iota(tasks.begin(), tasks.end(), 0);
  deques.init_deque(0, tasks);
  std::int64_t consumed = 0;
  for (auto _ : state) {
    GetOutcome got = deques.get_task(0);
    if (!got.task) {
      state.SkipWithError("deque drained; raise capacity");
      break;
    }
    ++consumed;
  }
  state.SetItemsProcessed(consumed);
}
BENCHMARK(BM_GetTask);

static void BM_StealTasks(benchmark::State& state) {
  const int batch = static_cast<int>(state.range(0));
  osc::Communicator comm(2, {});
  DequeSpace deques(comm, 1 << 21);
  std::vector<TaskId> tasks(1 << 20);
  std::iota(tasks.begin(), tasks.end(), 0);
  deques.init_deque(0, tasks);
  deques.init_deque(1, {});
  // Tasks ping-pong between the two ranks so neither side ever drains.
  int victim = 0;
  std::int64_t moved = 0;
  for (auto _ : state) {
    StealOutcome out = deques.steal_tasks(1 - victim, victim, batch);
    moved += out.adjusted;
    if (out.adjusted < batch) victim = 1 - victim;
  }
  state.SetItemsProcessed(moved);
}
BENCHMARK(BM_StealTasks)->Arg(1)->Arg(8)->Arg(64);

static void BM_InfoCommunication(benchmark::State& state) {
  osc::Communicator comm(8, {});
  InfoRing ring(comm, 2);
  ring.init_static(std::vector<std::int64_t>(8, 60));
  std::int64_t step = 0;
  for (auto _ : state) {
    ++step;
    ring.update_self(3, 60, 0.001 + 1e-9 * static_cast<double>(step), step);
    benchmark::DoNotOptimize(ring.info_communication(3));
  }
}
BENCHMARK(BM_InfoCommunication);

BENCHMARK_MAIN();
