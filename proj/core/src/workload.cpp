#include "a2ws/workload.hpp"

#include <chrono>
#include <cmath>
#include <thread>

#include "a2ws/rng.hpp"

namespace a2ws {

DurationSampler::DurationSampler(const NodeSpec& node, const WorkloadSpec& workload,
                                 int rank)
    : scale_(workload.base_cost / node.speed()),
      sigma_(workload.noise_sigma),
      gen_(workload.seed ^ static_cast<std::uint64_t>(rank)) {}

double DurationSampler::next() {
  if (sigma_ <= 0.0) return scale_;
  return scale_ * std::exp(sigma_ * gaussian(gen_));
}

double node_task_seconds(const NodeSpec& node, const WorkloadSpec& workload) {
  return workload.base_cost / node.speed();
}

double ideal_runtime(const ClusterConfig& cluster, const WorkloadSpec& workload) {
  double total_speed = 0.0;
  for (const NodeSpec& node : cluster.nodes)
    total_speed += 1.0 / node_task_seconds(node, workload);
  return static_cast<double>(workload.n_tasks) / total_speed;
}

void execute_task(ExecMode mode, double seconds) {
  if (mode == ExecMode::virtual_accounting) return;
  std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
}

}  // namespace a2ws
