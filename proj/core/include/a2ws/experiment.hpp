#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "a2ws/run.hpp"

// Experiment driver behind the CLI: repeated runs over seed lists, radius
// sweeps, paired scheduler comparisons, CSV emission.

namespace a2ws {

struct ExperimentPlan {
  std::vector<SchedulerKind> schedulers;  // one entry = run, two = compare
  ClusterConfig cluster;
  std::int64_t n_tasks = 0;
  int repetitions = 5;
  std::uint64_t base_seed = 1;  // seeds are base_seed .. base_seed+reps-1
  std::vector<int> radius_sweep;  // empty = single radius
  int radius = 0;                 // 0 = auto (20% of ranks)
  double base_cost = 0.002;
  double alpha = 0.9;
  double sigma = 0.02;
  ExecMode mode = ExecMode::virtual_accounting;
  unsigned latency_us = 0;
  bool write_trace = false;
  bool parallel_runs = false;
  std::string out_dir;
};

struct RunRow {
  std::string scheduler;
  std::string config;
  std::int64_t n_tasks = 0;
  int radius = 0;
  std::uint64_t seed = 0;
  double makespan = 0.0;
  std::int64_t steals = 0;
  std::int64_t failed_steals = 0;
  std::int64_t info_sends = 0;
};

struct GainRow {
  std::int64_t n_tasks = 0;
  std::string config;
  double gain_percent = 0.0;
  double a_median = 0.0;
  double b_median = 0.0;
};

struct ExperimentReport {
  std::vector<RunRow> runs;
  std::vector<GainRow> gains;
};

// Percentage runtime improvement of a over b: (1 - a/b) * 100. Losses are
// negative. b must be positive.
double gain(double a_median, double b_median);

double median(std::vector<double> values);

// Executes the plan and writes runs.csv (always), trace.csv (on request,
// per run when more than one) and gains.csv (two-scheduler plans) under
// plan.out_dir. Returns the rows it wrote.
ExperimentReport run_experiment(const ExperimentPlan& plan);

}  // namespace a2ws
