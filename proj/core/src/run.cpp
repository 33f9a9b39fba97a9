#include "a2ws/run.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sched_common.hpp"

namespace a2ws {

const char* scheduler_name(SchedulerKind kind) {
  switch (kind) {
    case SchedulerKind::a2ws: return "a2ws";
    case SchedulerKind::ctws: return "ctws";
    case SchedulerKind::lw: return "lw";
  }
  return "?";
}

SchedulerKind scheduler_from_name(const std::string& name) {
  if (name == "a2ws") return SchedulerKind::a2ws;
  if (name == "ctws") return SchedulerKind::ctws;
  if (name == "lw") return SchedulerKind::lw;
  throw std::invalid_argument("unknown scheduler: " + name);
}

int clamp_radius(int radius, int ranks) {
  int ceiling = std::max(1, (ranks - 1) / 2);
  return std::clamp(radius, 1, ceiling);
}

int radius_default(int ranks) {
  int rounded = static_cast<int>(std::llround(0.20 * ranks));
  return clamp_radius(rounded, ranks);
}

RunResult run_schedule(const RunParams& params) {
  int ranks = params.cluster.ranks();
  if (ranks < 2) throw std::invalid_argument("cluster needs at least two ranks");
  if (params.workload.n_tasks < ranks)
    throw std::invalid_argument("need at least one task per rank");
  for (const NodeSpec& node : params.cluster.nodes)
    if (node.cores < 1) throw std::invalid_argument("node cores must be >= 1");

  // Env toggles (A2WS_LATENCY_US, A2WS_LOCK_WATCHDOG) act as defaults;
  // explicit parameters win.
  osc::CommunicatorOptions copts = osc::CommunicatorOptions::from_env();
  if (params.latency_us > 0) copts.latency_us = params.latency_us;
  if (params.lock_watchdog) copts.lock_watchdog = true;
  copts.latency_seed = params.workload.seed;

  detail::RunContext ctx(params, copts);
  int radius = 0;
  switch (params.scheduler) {
    case SchedulerKind::a2ws:
      radius = params.radius > 0 ? clamp_radius(params.radius, ranks)
                                 : radius_default(ranks);
      detail::run_a2ws(ctx, radius);
      break;
    case SchedulerKind::ctws:
      detail::run_ctws(ctx);
      break;
    case SchedulerKind::lw:
      detail::run_lw(ctx);
      break;
  }

  RunResult result;
  result.per_rank = std::move(ctx.stats);
  result.steals = std::move(ctx.steals);
  result.lw_requests = std::move(ctx.lw_requests);
  result.radius = radius;
  for (const WorkerStats& w : result.per_rank)
    result.makespan = std::max(result.makespan, w.finish_time);
  A2WS_CHECK_MSG(ctx.comm.watchdog_violations() == 0,
                 "lock watchdog recorded a violation");
  return result;
}

}  // namespace a2ws
