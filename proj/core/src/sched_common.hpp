#pragma once

#include <chrono>
#include <memory>
#include <mutex>

#include "a2ws/info_ring.hpp"
#include "a2ws/osc.hpp"
#include "a2ws/run.hpp"
#include "a2ws/task_deque.hpp"
#include "a2ws/virtual_time.hpp"

// Shared plumbing for the three scheduler engines.

namespace a2ws::detail {

// Run-relative time source. Real-sleep mode free-runs against the steady
// clock; virtual mode serializes worker steps through the clock board.
class WorkerClock {
 public:
  WorkerClock(ExecMode mode, int ranks)
      : mode_(mode), start_(std::chrono::steady_clock::now()) {
    if (mode == ExecMode::virtual_accounting)
      board_ = std::make_unique<VirtualClockBoard>(ranks);
  }

  bool is_virtual() const { return mode_ == ExecMode::virtual_accounting; }
  VirtualClockBoard* board() { return board_.get(); }

  double now(int rank) const {
    if (board_) return board_->now(rank);
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
        .count();
  }

  void execute(int rank, double seconds) {
    if (board_)
      board_->advance(rank, seconds);
    else
      execute_task(ExecMode::real_sleep, seconds);
  }

  void step_begin(int rank) {
    if (board_) board_->step_begin(rank);
  }
  void step_end(int rank) {
    if (board_) board_->step_end(rank);
  }
  void finish(int rank) {
    if (board_) board_->finish(rank);
  }

 private:
  ExecMode mode_;
  std::chrono::steady_clock::time_point start_;
  std::unique_ptr<VirtualClockBoard> board_;
};

struct RunContext {
  const RunParams& params;
  osc::Communicator comm;
  DequeSpace deques;
  WorkerClock clock;
  std::vector<std::pair<std::int64_t, std::int64_t>> partition;

  std::vector<WorkerStats> stats;
  std::mutex sink_mutex;
  std::vector<StealEvent> steals;
  std::vector<LwRequestRecord> lw_requests;

  RunContext(const RunParams& p, osc::CommunicatorOptions copts)
      : params(p),
        comm(p.cluster.ranks(), copts),
        deques(comm, static_cast<int>(p.workload.n_tasks)),
        clock(p.mode, p.cluster.ranks()),
        partition(block_partition(p.workload.n_tasks, p.cluster.ranks())) {
    int ranks = p.cluster.ranks();
    stats.resize(static_cast<std::size_t>(ranks));
    for (int r = 0; r < ranks; ++r) {
      stats[static_cast<std::size_t>(r)].rank = r;
      if (p.scheduler == SchedulerKind::lw) continue;  // leader owns the pool
      auto [begin, end] = partition[static_cast<std::size_t>(r)];
      std::vector<TaskId> tasks;
      tasks.reserve(static_cast<std::size_t>(end - begin));
      for (std::int64_t t = begin; t < end; ++t) tasks.push_back(t);
      deques.init_deque(r, tasks);
    }
    if (clock.is_virtual() && p.latency_us > 0) {
      comm.set_remote_cost_hook(
          [this](int rank, double seconds) { clock.board()->advance(rank, seconds); });
    }
  }

  std::int64_t initial_count(int rank) const {
    auto [begin, end] = partition[static_cast<std::size_t>(rank)];
    return end - begin;
  }

  void record_steal(const StealEvent& ev) {
    std::lock_guard<std::mutex> lock(sink_mutex);
    steals.push_back(ev);
  }
  void record_lw_request(const LwRequestRecord& rec) {
    std::lock_guard<std::mutex> lock(sink_mutex);
    lw_requests.push_back(rec);
  }
};

void run_a2ws(RunContext& ctx, int radius);
void run_ctws(RunContext& ctx);
void run_lw(RunContext& ctx);

}  // namespace a2ws::detail
