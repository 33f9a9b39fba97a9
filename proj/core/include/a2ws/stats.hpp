#pragma once

#include <cstdint>
#include <vector>

#include "a2ws/task_deque.hpp"

namespace a2ws {

struct TaskRecord {
  TaskId task = -1;
  double start = 0.0;
  double duration = 0.0;
};

struct StealEvent {
  int thief = -1;
  int victim = -1;
  int requested = 0;
  int adjusted = 0;
  double begin = 0.0;
  double end = 0.0;
  std::uint64_t token_seq = 0;  // CTWS: token possession ordinal
};

struct LwRequestRecord {
  int rank = -1;
  double request = 0.0;
  double grant = 0.0;
  std::int64_t undispatched_before = 0;  // pool size when the leader decided
};

struct WorkerStats {
  int rank = -1;
  std::vector<TaskRecord> executed;
  std::int64_t steals_attempted = 0;
  std::int64_t steals_succeeded = 0;
  std::int64_t tasks_stolen = 0;
  std::int64_t info_sends = 0;
  double finish_time = 0.0;      // completion of this rank's last task
  double first_empty_time = -1;  // first empty deque observation; -1 = never
};

struct RunResult {
  double makespan = 0.0;
  std::vector<WorkerStats> per_rank;
  std::vector<StealEvent> steals;
  std::vector<LwRequestRecord> lw_requests;
  int radius = 0;  // effective radius (a2ws runs)

  std::int64_t total_executed() const {
    std::int64_t n = 0;
    for (const WorkerStats& w : per_rank)
      n += static_cast<std::int64_t>(w.executed.size());
    return n;
  }
  std::int64_t total_steals() const {
    std::int64_t n = 0;
    for (const WorkerStats& w : per_rank) n += w.steals_succeeded;
    return n;
  }
  std::int64_t total_failed_steals() const {
    std::int64_t n = 0;
    for (const WorkerStats& w : per_rank)
      n += w.steals_attempted - w.steals_succeeded;
    return n;
  }
  std::int64_t total_info_sends() const {
    std::int64_t n = 0;
    for (const WorkerStats& w : per_rank) n += w.info_sends;
    return n;
  }
};

}  // namespace a2ws
