#include "a2ws/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <future>
#include <stdexcept>

#include "a2ws/check.hpp"

namespace a2ws {

namespace {

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v,
                                 std::chars_format::general, 12);
  A2WS_CHECK(ec == std::errc());
  return std::string(buf, ptr);
}

std::ofstream open_out(const std::string& dir, const std::string& file) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  fs::path path = fs::path(dir) / file;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void write_runs_csv(const std::string& dir, const std::vector<RunRow>& rows) {
  std::ofstream out = open_out(dir, "runs.csv");
  out << "scheduler,config,n_tasks,radius,seed,makespan,steals,failed_steals,"
         "info_sends\n";
  for (const RunRow& r : rows) {
    out << r.scheduler << ',' << r.config << ',' << r.n_tasks << ',' << r.radius
        << ',' << r.seed << ',' << format_double(r.makespan) << ',' << r.steals
        << ',' << r.failed_steals << ',' << r.info_sends << '\n';
  }
}

void write_trace_csv(const std::string& dir, const std::string& file,
                     const RunResult& result) {
  std::ofstream out = open_out(dir, file);
  out << "rank,task_id,start,duration\n";
  for (const WorkerStats& w : result.per_rank)
    for (const TaskRecord& t : w.executed)
      out << w.rank << ',' << t.task << ',' << format_double(t.start) << ','
          << format_double(t.duration) << '\n';
}

void write_gains_csv(const std::string& dir, const std::vector<GainRow>& rows) {
  std::ofstream out = open_out(dir, "gains.csv");
  out << "n_tasks,config,gain_percent,a_median,b_median\n";
  for (const GainRow& g : rows)
    out << g.n_tasks << ',' << g.config << ',' << format_double(g.gain_percent)
        << ',' << format_double(g.a_median) << ',' << format_double(g.b_median)
        << '\n';
}

}  // namespace

double gain(double a_median, double b_median) {
  if (!(b_median > 0.0))
    throw std::invalid_argument("gain needs a positive reference median");
  return (1.0 - a_median / b_median) * 100.0;
}

double median(std::vector<double> values) {
  A2WS_CHECK(!values.empty());
  std::sort(values.begin(), values.end());
  std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

ExperimentReport run_experiment(const ExperimentPlan& plan) {
  if (plan.schedulers.empty() || plan.schedulers.size() > 2)
    throw std::invalid_argument("plan needs one or two schedulers");
  if (plan.repetitions < 1)
    throw std::invalid_argument("repetitions must be >= 1");
  if (plan.out_dir.empty()) throw std::invalid_argument("missing output dir");

  int ranks = plan.cluster.ranks();
  std::vector<int> radii;
  if (!plan.radius_sweep.empty()) {
    for (int r : plan.radius_sweep) radii.push_back(clamp_radius(r, ranks));
  } else {
    radii.push_back(plan.radius > 0 ? clamp_radius(plan.radius, ranks)
                                    : radius_default(ranks));
  }

  struct Job {
    SchedulerKind scheduler;
    int radius;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (SchedulerKind sched : plan.schedulers)
    for (int radius : radii)
      for (int rep = 0; rep < plan.repetitions; ++rep)
        jobs.push_back({sched, radius, plan.base_seed + static_cast<std::uint64_t>(rep)});

  ClusterConfig cluster = plan.cluster;
  apply_alpha(cluster, plan.alpha);

  auto run_job = [&](const Job& job) {
    RunParams params;
    params.scheduler = job.scheduler;
    params.cluster = cluster;
    params.workload.n_tasks = plan.n_tasks;
    params.workload.base_cost = plan.base_cost;
    params.workload.noise_sigma = plan.sigma;
    params.workload.seed = job.seed;
    params.mode = plan.mode;
    params.radius = job.radius;
    params.latency_us = plan.latency_us;
    return run_schedule(params);
  };

  std::vector<RunResult> results(jobs.size());
  if (plan.parallel_runs) {
    std::vector<std::future<RunResult>> futures;
    futures.reserve(jobs.size());
    for (const Job& job : jobs)
      futures.push_back(std::async(std::launch::async, run_job, job));
    for (std::size_t i = 0; i < jobs.size(); ++i) results[i] = futures[i].get();
  } else {
    for (std::size_t i = 0; i < jobs.size(); ++i) results[i] = run_job(jobs[i]);
  }

  ExperimentReport report;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const Job& job = jobs[i];
    const RunResult& result = results[i];
    RunRow row;
    row.scheduler = scheduler_name(job.scheduler);
    row.config = cluster.name;
    row.n_tasks = plan.n_tasks;
    row.radius = result.radius;
    row.seed = job.seed;
    row.makespan = result.makespan;
    row.steals = result.total_steals();
    row.failed_steals = result.total_failed_steals();
    row.info_sends = result.total_info_sends();
    report.runs.push_back(row);
  }

  if (plan.schedulers.size() == 2) {
    auto arm_median = [&](SchedulerKind sched) {
      std::vector<double> spans;
      for (std::size_t i = 0; i < jobs.size(); ++i)
        if (jobs[i].scheduler == sched) spans.push_back(results[i].makespan);
      return median(std::move(spans));
    };
    GainRow row;
    row.n_tasks = plan.n_tasks;
    row.config = cluster.name;
    row.a_median = arm_median(plan.schedulers[0]);
    row.b_median = arm_median(plan.schedulers[1]);
    row.gain_percent = gain(row.a_median, row.b_median);
    report.gains.push_back(row);
  }

  write_runs_csv(plan.out_dir, report.runs);
  if (!report.gains.empty()) write_gains_csv(plan.out_dir, report.gains);
  if (plan.write_trace) {
    if (jobs.size() == 1) {
      write_trace_csv(plan.out_dir, "trace.csv", results[0]);
    } else {
      for (std::size_t i = 0; i < jobs.size(); ++i) {
        std::string file = "trace-" +
                           std::string(scheduler_name(jobs[i].scheduler)) + "-r" +
                           std::to_string(jobs[i].radius) + "-s" +
                           std::to_string(jobs[i].seed) + ".csv";
        write_trace_csv(plan.out_dir, file, results[i]);
      }
    }
  }
  return report;
}

}  // namespace a2ws
