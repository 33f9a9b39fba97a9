#pragma once

#include <string>

#include "a2ws/cluster.hpp"
#include "a2ws/stats.hpp"
#include "a2ws/workload.hpp"

namespace a2ws {

enum class SchedulerKind { a2ws, ctws, lw };

const char* scheduler_name(SchedulerKind kind);
SchedulerKind scheduler_from_name(const std::string& name);

// 20% of the ring, rounded half up, clamped so the two neighbor regions of
// the information ring cannot overlap.
int radius_default(int ranks);
int clamp_radius(int radius, int ranks);

struct RunParams {
  SchedulerKind scheduler = SchedulerKind::a2ws;
  ClusterConfig cluster;
  WorkloadSpec workload;
  ExecMode mode = ExecMode::virtual_accounting;
  int radius = 0;          // 0 = radius_default(P); a2ws only
  unsigned latency_us = 0;  // injected remote-operation latency
  bool lock_watchdog = false;
  // Optional hook: relay ring information once mid-task as well, not only
  // between tasks. Off by default; only meaningful for a2ws.
  bool mid_task_info = false;
  // Slowdown of the leader-workers dispatcher's co-located worker. 0 picks
  // the default c/(c-1) for a c-core rank-0 node (2.0 when c == 1).
  double lw_leader_slowdown = 0.0;
};

// Launches one worker thread per rank and drives the chosen scheduler to
// completion. Virtual-accounting runs are deterministic given (scheduler,
// cluster, n-tasks, seed) at zero latency.
RunResult run_schedule(const RunParams& params);

}  // namespace a2ws
