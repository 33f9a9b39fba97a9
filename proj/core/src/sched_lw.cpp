#include <condition_variable>
#include <deque>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "sched_common.hpp"

// Leader-workers baseline: a dispatcher on rank 0 hands out one task at a
// time on demand. In real-sleep mode the dispatcher is an actual extra
// thread fed through a request queue; in virtual mode requests are served
// inline (a zero-latency round trip), which makes the run exactly greedy
// list scheduling in virtual time. The co-located worker on rank 0 pays a
// slowdown factor for the core the dispatcher occupies.

namespace a2ws::detail {

namespace {

double leader_slowdown(const RunParams& params) {
  if (params.lw_leader_slowdown > 0.0) return params.lw_leader_slowdown;
  const NodeSpec& node = params.cluster.nodes.front();
  if (node.cores > 1)
    return static_cast<double>(node.cores) / (node.cores - 1);
  return 2.0;  // dispatcher shares the only core
}

struct LwShared {
  RunContext& ctx;

  std::mutex mutex;
  std::condition_variable request_cv;
  std::deque<int> requests;

  struct Reply {
    std::optional<TaskId> task;
    std::int64_t undispatched_before = 0;
    bool ready = false;
  };
  std::vector<Reply> replies;
  std::vector<std::unique_ptr<std::condition_variable>> reply_cv;

  std::int64_t next = 0;
  std::int64_t total = 0;

  explicit LwShared(RunContext& c) : ctx(c), total(c.params.workload.n_tasks) {
    int ranks = c.comm.size();
    replies.resize(static_cast<std::size_t>(ranks));
    for (int r = 0; r < ranks; ++r)
      reply_cv.push_back(std::make_unique<std::condition_variable>());
  }

  // Inline dispatch used in virtual mode and by the leader thread.
  std::pair<std::optional<TaskId>, std::int64_t> take_locked() {
    std::int64_t before = total - next;
    if (next < total) return {next++, before};
    return {std::nullopt, before};
  }
};

void leader_loop(LwShared& sh) {
  int ranks = sh.ctx.comm.size();
  int done_sent = 0;
  std::unique_lock<std::mutex> lock(sh.mutex);
  while (done_sent < ranks) {
    sh.request_cv.wait(lock, [&] { return !sh.requests.empty(); });
    int rank = sh.requests.front();
    sh.requests.pop_front();
    auto [task, before] = sh.take_locked();
    if (!task) ++done_sent;
    LwShared::Reply& reply = sh.replies[static_cast<std::size_t>(rank)];
    reply.task = task;
    reply.undispatched_before = before;
    reply.ready = true;
    sh.reply_cv[static_cast<std::size_t>(rank)]->notify_one();
  }
}

class LwWorker {
 public:
  LwWorker(LwShared& shared, int rank)
      : sh_(shared),
        rank_(rank),
        sampler_(shared.ctx.params.cluster.nodes[static_cast<std::size_t>(rank)],
                 shared.ctx.params.workload, rank),
        stats_(shared.ctx.stats[static_cast<std::size_t>(rank)]),
        slowdown_(rank == 0 ? leader_slowdown(shared.ctx.params) : 1.0) {}

  void run() {
    osc::Communicator::RankBinding bind(sh_.ctx.comm, rank_);
    WorkerClock& clock = sh_.ctx.clock;
    for (;;) {
      clock.step_begin(rank_);
      double t_request = clock.now(rank_);
      auto [task, before] = request_task();
      double t_grant = clock.now(rank_);
      sh_.ctx.record_lw_request({rank_, t_request, t_grant, before});
      if (!task) {
        stats_.first_empty_time =
            stats_.first_empty_time < 0 ? t_grant : stats_.first_empty_time;
        clock.finish(rank_);
        return;
      }
      double start = clock.now(rank_);
      clock.execute(rank_, sampler_.next() * slowdown_);
      double end = clock.now(rank_);
      stats_.executed.push_back({*task, start, end - start});
      stats_.finish_time = end;
      clock.step_end(rank_);
    }
  }

 private:
  std::pair<std::optional<TaskId>, std::int64_t> request_task() {
    if (sh_.ctx.clock.is_virtual()) {
      std::lock_guard<std::mutex> lock(sh_.mutex);
      return sh_.take_locked();
    }
    std::unique_lock<std::mutex> lock(sh_.mutex);
    sh_.requests.push_back(rank_);
    sh_.request_cv.notify_one();
    LwShared::Reply& reply = sh_.replies[static_cast<std::size_t>(rank_)];
    sh_.reply_cv[static_cast<std::size_t>(rank_)]->wait(lock,
                                                        [&] { return reply.ready; });
    reply.ready = false;
    return {reply.task, reply.undispatched_before};
  }

  LwShared& sh_;
  int rank_;
  DurationSampler sampler_;
  WorkerStats& stats_;
  double slowdown_;
};

}  // namespace

void run_lw(RunContext& ctx) {
  int ranks = ctx.comm.size();
  LwShared shared(ctx);

  std::thread leader;
  if (!ctx.clock.is_virtual()) leader = std::thread([&shared] { leader_loop(shared); });

  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(ranks));
  for (int r = 0; r < ranks; ++r)
    threads.emplace_back([&shared, r] { LwWorker(shared, r).run(); });
  for (auto& t : threads) t.join();
  if (leader.joinable()) leader.join();
}

}  // namespace a2ws::detail
