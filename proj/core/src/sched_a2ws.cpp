#include <optional>
#include <thread>
#include <vector>

#include "a2ws/rng.hpp"
#include "a2ws/steal_policy.hpp"
#include "sched_common.hpp"

// The adaptive asynchronous work-stealing worker. Per loop iteration:
// refresh own info; if at least one task has completed, compute the steal
// rate, pick a victim and steal; take a task from the own deque (detecting
// theft against us on the way); execute it; forward dirty info to the ring
// neighbors. A rank leaves when its deque is empty and no victim can be
// selected.

namespace a2ws::detail {

namespace {

// Availability evidence a thief gathered itself, valid until the ring entry
// for that rank changes version.
struct ObservedAvail {
  std::int64_t avail = 0;
  std::uint64_t version = 0;
};

struct A2wsShared {
  RunContext& ctx;
  InfoRing& ring;
};

class A2wsWorker {
 public:
  A2wsWorker(A2wsShared& shared, int rank)
      : sh_(shared),
        rank_(rank),
        sampler_(shared.ctx.params.cluster.nodes[static_cast<std::size_t>(rank)],
                 shared.ctx.params.workload, rank),
        rng_(mix_seed(shared.ctx.params.workload.seed,
                      0xa25eedULL + static_cast<std::uint64_t>(rank))),
        stats_(shared.ctx.stats[static_cast<std::size_t>(rank)]),
        observed_(static_cast<std::size_t>(shared.ctx.comm.size())),
        window_(shared.ring.window_positions(rank)) {
    known_avail_ = shared.ctx.initial_count(rank);
  }

  void run() {
    osc::Communicator::RankBinding bind(sh_.ctx.comm, rank_);
    WorkerClock& clock = sh_.ctx.clock;
    for (;;) {
      clock.step_begin(rank_);

      refresh_self_info();
      bool steal_attempted = false;
      if (completed_ >= 1) steal_attempted = try_steal();

      GetOutcome got = sh_.ctx.deques.get_task(rank_);
      after_get_update(got);

      if (!got.task) {
        if (stats_.first_empty_time < 0)
          stats_.first_empty_time = clock.now(rank_);
        if (!steal_attempted) {
          clock.finish(rank_);
          return;
        }
        stats_.info_sends += sh_.ring.info_communication(rank_);
        clock.step_end(rank_);
        continue;
      }

      double start = clock.now(rank_);
      double duration = sampler_.next();
      if (sh_.ctx.params.mid_task_info) {
        clock.execute(rank_, duration * 0.5);
        stats_.info_sends += sh_.ring.info_communication(rank_);
        clock.execute(rank_, duration * 0.5);
      } else {
        clock.execute(rank_, duration);
      }
      double end = clock.now(rank_);
      stats_.executed.push_back({*got.task, start, end - start});
      stats_.finish_time = end;
      ++completed_;
      runtime_sum_ += end - start;
      mean_runtime_ = runtime_sum_ / static_cast<double>(completed_);

      stats_.info_sends += sh_.ring.info_communication(rank_);
      clock.step_end(rank_);
    }
  }

 private:
  void publish_self(std::int64_t n) {
    sh_.ring.update_self(rank_, n, mean_runtime_, completed_);
  }

  void refresh_self_info() {
    known_avail_ = sh_.ctx.deques.load_cursors(rank_).available();
    publish_self(completed_ + known_avail_);
  }

  policy::RateView build_view() {
    policy::RateView view;
    view.self_rank = rank_;
    view.elapsed = std::max(sh_.ctx.clock.now(rank_), 1e-9);
    view.entries.reserve(window_.size());
    for (int pos : window_) {
      policy::RateEntry entry;
      entry.rank = pos;
      if (pos == rank_) {
        entry.n = static_cast<double>(completed_ + known_avail_);
        entry.completed = static_cast<double>(completed_);
        entry.avail = static_cast<double>(known_avail_);
        ProcessInfo self;
        self.completed = completed_;
        self.mean_runtime = mean_runtime_;
        entry.runtime = policy::effective_runtime(self, view.elapsed);
      } else {
        ProcessInfo info = sh_.ring.read(rank_, pos);
        entry.n = static_cast<double>(info.n);
        entry.completed = static_cast<double>(info.completed);
        entry.runtime = policy::effective_runtime(info, view.elapsed);
        const auto& obs = observed_[static_cast<std::size_t>(pos)];
        if (obs && obs->version == info.version)
          entry.avail = static_cast<double>(obs->avail);
        else
          entry.avail = static_cast<double>(info.n - info.completed);
      }
      view.entries.push_back(entry);
    }
    return view;
  }

  bool try_steal() {
    policy::RateView view = build_view();
    double s_self = policy::steal_rate(view, rank_);
    if (!(s_self > 0.0)) return false;
    auto decision = policy::select_victim(view, s_self, rng_);
    if (!decision) return false;

    ++stats_.steals_attempted;
    WorkerClock& clock = sh_.ctx.clock;
    double begin = clock.now(rank_);
    StealOutcome out = sh_.ctx.deques.steal_tasks(
        rank_, decision->victim, static_cast<int>(decision->amount));
    double end = clock.now(rank_);

    std::int64_t left = out.observed.available() - out.adjusted;
    observed_[static_cast<std::size_t>(decision->victim)] = ObservedAvail{
        std::max<std::int64_t>(left, 0),
        sh_.ring.read(rank_, decision->victim).version};

    if (out.adjusted > 0) {
      ++stats_.steals_succeeded;
      stats_.tasks_stolen += out.adjusted;
      known_avail_ += out.adjusted;
      sh_.ring.mark_outdated(rank_, rank_, OutdateCause::thief_stole);
      sh_.ring.mark_outdated(rank_, decision->victim, OutdateCause::thief_stole);
      sh_.ctx.record_steal(
          {rank_, decision->victim, out.requested, out.adjusted, begin, end, 0});
    } else {
      sh_.ring.mark_outdated(rank_, decision->victim,
                             OutdateCause::steal_attempt_failed);
    }
    return true;
  }

  void after_get_update(const GetOutcome& got) {
    std::int64_t avail_before = got.observed.available();
    bool theft_detected = avail_before < known_avail_;
    std::int64_t in_hand = got.task ? 1 : 0;
    known_avail_ = std::max<std::int64_t>(avail_before - in_hand, 0);
    if (theft_detected)
      sh_.ring.mark_outdated(rank_, rank_, OutdateCause::victim_detected_theft);
    publish_self(completed_ + in_hand + known_avail_);
  }

  A2wsShared& sh_;
  int rank_;
  DurationSampler sampler_;
  std::mt19937_64 rng_;
  WorkerStats& stats_;
  std::vector<std::optional<ObservedAvail>> observed_;
  std::vector<int> window_;
  std::int64_t known_avail_ = 0;
  std::int64_t completed_ = 0;
  double runtime_sum_ = 0.0;
  double mean_runtime_ = 0.0;  // <= 0 until the first task completes
};

}  // namespace

void run_a2ws(RunContext& ctx, int radius) {
  InfoRing ring(ctx.comm, radius);
  int ranks = ctx.comm.size();
  std::vector<std::int64_t> initial(static_cast<std::size_t>(ranks));
  for (int r = 0; r < ranks; ++r)
    initial[static_cast<std::size_t>(r)] = ctx.initial_count(r);
  ring.init_static(initial);

  A2wsShared shared{ctx, ring};
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(ranks));
  for (int r = 0; r < ranks; ++r)
    threads.emplace_back([&shared, r] { A2wsWorker(shared, r).run(); });
  for (auto& t : threads) t.join();
  A2WS_CHECK_MSG(ring.writer_violations() == 0,
                 "info ring writer partition was violated");
}

}  // namespace a2ws::detail
