#pragma once

#include <condition_variable>
#include <memory>
#include <mutex>
#include <vector>

// Coordinator for virtual-duration accounting. Worker threads carry per-rank
// virtual clocks and execute one loop step at a time: the board grants the
// step to the runnable rank with the smallest (clock, rank), so a run is a
// deterministic serialization in virtual-time order regardless of OS
// scheduling. A rank waiting on an external event (e.g. a circulating token)
// blocks off the board until another rank wakes it, advancing its clock to
// the waker's time.

namespace a2ws {

class VirtualClockBoard {
 public:
  explicit VirtualClockBoard(int ranks);

  // Blocks until this rank holds the step right.
  void step_begin(int rank);
  // Ends the step and hands the right to the next minimal runnable rank.
  void step_end(int rank);

  void advance(int rank, double seconds);
  double now(int rank) const;

  // Must be called while holding the step right.
  void block(int rank);            // releases the right; waits for wake()
  void wake(int rank, double at);  // clock = max(clock, at); runnable again
  void finish(int rank);           // terminal; releases the right

  double max_finished_clock() const;

 private:
  enum class State { runnable, running, blocked, finished };

  struct Slot {
    double clock = 0.0;
    State state = State::runnable;
    std::unique_ptr<std::condition_variable> cv =
        std::make_unique<std::condition_variable>();
    bool woken = false;
  };

  int pick_next_locked() const;  // -1 when none runnable
  void grant_locked(std::unique_lock<std::mutex>& lock);

  mutable std::mutex mutex_;
  std::vector<Slot> slots_;
  int running_ = -1;  // rank currently holding the step right
};

}  // namespace a2ws
