#pragma once

#include <cstdint>
#include <random>

#include "a2ws/cluster.hpp"

// Synthetic homogeneous tasks: every task costs base_cost seconds on a
// one-core node and scales down with node speed, with optional mild
// lognormal noise so equal nodes do not run in lockstep.

namespace a2ws {

struct WorkloadSpec {
  std::int64_t n_tasks = 0;
  double base_cost = 0.002;   // seconds per task on a 1-core node
  double noise_sigma = 0.02;  // lognormal sigma; 0 = deterministic
  std::uint64_t seed = 1;
};

enum class ExecMode { real_sleep, virtual_accounting };

// Per-rank stream of task durations; deterministic given (workload.seed, rank)
// and identical in both execution modes.
class DurationSampler {
 public:
  DurationSampler(const NodeSpec& node, const WorkloadSpec& workload, int rank);

  double next();

 private:
  double scale_;
  double sigma_;
  std::mt19937_64 gen_;
};

// N / sum(1/t_j) with deterministic (sigma = 0) per-node durations: the
// zero-imbalance lower envelope for the makespan.
double ideal_runtime(const ClusterConfig& cluster, const WorkloadSpec& workload);

// Deterministic per-node duration at sigma = 0.
double node_task_seconds(const NodeSpec& node, const WorkloadSpec& workload);

// real_sleep blocks the calling thread for `seconds`; virtual_accounting
// returns immediately (the caller advances its virtual clock instead).
void execute_task(ExecMode mode, double seconds);

}  // namespace a2ws
