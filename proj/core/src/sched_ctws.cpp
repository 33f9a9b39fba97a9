#include <algorithm>
#include <chrono>
#include <thread>
#include <vector>

#include "sched_common.hpp"

// Cyclic token-based work-stealing. One token circulates the ring carrying
// per-rank remaining-task counts; only the holder may steal. A holder whose
// deque is empty raids the rank with the maximum known count for half of its
// available tasks (speed is never considered), then passes the token on; a
// holder with work passes it immediately. A rank leaves once it is empty and
// the token shows no positive count anywhere.

namespace a2ws::detail {

namespace {

constexpr osc::Word kNoHolder = ~osc::Word{0};

struct CtwsShared {
  RunContext& ctx;
  osc::WindowHandle token;
};

class CtwsWorker {
 public:
  CtwsWorker(CtwsShared& shared, int rank)
      : sh_(shared),
        rank_(rank),
        ranks_(shared.ctx.comm.size()),
        sampler_(shared.ctx.params.cluster.nodes[static_cast<std::size_t>(rank)],
                 shared.ctx.params.workload, rank),
        stats_(shared.ctx.stats[static_cast<std::size_t>(rank)]) {}

  void run() {
    osc::Communicator::RankBinding bind(sh_.ctx.comm, rank_);
    WorkerClock& clock = sh_.ctx.clock;
    for (;;) {
      clock.step_begin(rank_);
      if (!exited_) check_token();

      GetOutcome got = sh_.ctx.deques.get_task(rank_);
      if (got.task) {
        double start = clock.now(rank_);
        clock.execute(rank_, sampler_.next());
        double end = clock.now(rank_);
        stats_.executed.push_back({*got.task, start, end - start});
        stats_.finish_time = end;
        clock.step_end(rank_);
        continue;
      }
      if (stats_.first_empty_time < 0) stats_.first_empty_time = clock.now(rank_);
      if (exited_) {
        clock.finish(rank_);
        return;
      }
      // Empty without the token: the token is the only way forward.
      if (clock.is_virtual()) clock.board()->block(rank_);
      clock.step_end(rank_);
      if (!clock.is_virtual())
        std::this_thread::sleep_for(std::chrono::microseconds(20));
    }
  }

 private:
  void check_token() {
    osc::Communicator& comm = sh_.ctx.comm;
    bool mine = comm.with_lock(sh_.token, 0, osc::LockMode::shared, [&] {
      osc::Word holder;
      comm.get(sh_.token, 0, 0, std::span<osc::Word>(&holder, 1));
      return holder == static_cast<osc::Word>(rank_);
    });
    if (!mine) return;

    int next = -1;
    WorkerClock& clock = sh_.ctx.clock;
    comm.with_lock(sh_.token, 0, osc::LockMode::exclusive, [&] {
      std::vector<osc::Word> cells = comm.get(sh_.token, 0, 0, 2 + 2 * ranks_);
      std::uint64_t seq = cells[1];
      auto count_of = [&](int r) {
        return static_cast<std::int64_t>(cells[static_cast<std::size_t>(2 + r)]);
      };
      auto set_count = [&](int r, std::int64_t v) {
        cells[static_cast<std::size_t>(2 + r)] = static_cast<osc::Word>(v);
      };
      auto is_exited = [&](int r) {
        return cells[static_cast<std::size_t>(2 + ranks_ + r)] != 0;
      };

      set_count(rank_, sh_.ctx.deques.load_cursors(rank_).available());

      if (count_of(rank_) == 0) {
        int victim = -1;
        for (int r = 0; r < ranks_; ++r) {
          if (r == rank_ || is_exited(r) || count_of(r) <= 0) continue;
          if (victim < 0 || count_of(r) > count_of(victim)) victim = r;
        }
        if (victim >= 0) {
          std::int64_t half = (count_of(victim) + 1) / 2;
          ++stats_.steals_attempted;
          double begin = clock.now(rank_);
          StealOutcome out = sh_.ctx.deques.steal_tasks(
              rank_, victim, static_cast<int>(half));
          double end = clock.now(rank_);
          set_count(victim,
                    std::max<std::int64_t>(out.observed.available() - out.adjusted, 0));
          set_count(rank_, count_of(rank_) + out.adjusted);
          if (out.adjusted > 0) {
            ++stats_.steals_succeeded;
            stats_.tasks_stolen += out.adjusted;
            sh_.ctx.record_steal(
                {rank_, victim, out.requested, out.adjusted, begin, end, seq});
          }
        } else {
          // Nothing stealable anywhere: this rank is done.
          cells[static_cast<std::size_t>(2 + ranks_ + rank_)] = 1;
          exited_ = true;
        }
      }

      for (int s = 1; s <= ranks_; ++s) {
        int cand = (rank_ + s) % ranks_;
        if (!is_exited(cand)) {
          next = cand;
          break;
        }
      }
      cells[0] = next >= 0 ? static_cast<osc::Word>(next) : kNoHolder;
      cells[1] = seq + 1;
      comm.put(sh_.token, 0, 0, cells);
    });

    if (clock.is_virtual() && next >= 0 && next != rank_)
      clock.board()->wake(next, clock.now(rank_));
  }

  CtwsShared& sh_;
  int rank_;
  int ranks_;
  DurationSampler sampler_;
  WorkerStats& stats_;
  bool exited_ = false;
};

}  // namespace

void run_ctws(RunContext& ctx) {
  int ranks = ctx.comm.size();
  osc::WindowHandle token =
      ctx.comm.create_window("ctws.token", 2 + 2 * ranks, osc::CellKind::scalar_word);
  std::vector<osc::Word> init(static_cast<std::size_t>(2 + 2 * ranks), 0);
  init[0] = 0;  // token starts at rank 0
  for (int r = 0; r < ranks; ++r)
    init[static_cast<std::size_t>(2 + r)] =
        static_cast<osc::Word>(ctx.initial_count(r));
  ctx.comm.with_lock(token, 0, osc::LockMode::exclusive,
                     [&] { ctx.comm.put(token, 0, 0, init); });

  CtwsShared shared{ctx, token};
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(ranks));
  for (int r = 0; r < ranks; ++r)
    threads.emplace_back([&shared, r] { CtwsWorker(shared, r).run(); });
  for (auto& t : threads) t.join();
}

}  // namespace a2ws::detail
