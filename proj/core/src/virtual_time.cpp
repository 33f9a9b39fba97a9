#include "a2ws/virtual_time.hpp"

#include <algorithm>

#include "a2ws/check.hpp"

namespace a2ws {

VirtualClockBoard::VirtualClockBoard(int ranks)
    : slots_(static_cast<std::size_t>(ranks)) {
  A2WS_CHECK(ranks >= 1);
}

int VirtualClockBoard::pick_next_locked() const {
  int best = -1;
  for (int r = 0; r < static_cast<int>(slots_.size()); ++r) {
    const Slot& s = slots_[static_cast<std::size_t>(r)];
    if (s.state != State::runnable) continue;
    if (best < 0 || s.clock < slots_[static_cast<std::size_t>(best)].clock)
      best = r;  // ties resolve to the lowest rank by scan order
  }
  return best;
}

void VirtualClockBoard::grant_locked(std::unique_lock<std::mutex>& /*lock*/) {
  int next = pick_next_locked();
  if (next >= 0) {
    slots_[static_cast<std::size_t>(next)].cv->notify_one();
    return;
  }
  bool all_done = std::all_of(slots_.begin(), slots_.end(), [](const Slot& s) {
    return s.state == State::finished;
  });
  A2WS_CHECK_MSG(all_done || running_ >= 0,
                 "virtual-time deadlock: every remaining rank is blocked");
}

void VirtualClockBoard::step_begin(int rank) {
  std::unique_lock<std::mutex> lock(mutex_);
  Slot& slot = slots_[static_cast<std::size_t>(rank)];
  A2WS_CHECK(slot.state == State::runnable);
  slot.cv->wait(lock, [&] { return running_ < 0 && pick_next_locked() == rank; });
  slot.state = State::running;
  running_ = rank;
}

void VirtualClockBoard::step_end(int rank) {
  std::unique_lock<std::mutex> lock(mutex_);
  Slot& slot = slots_[static_cast<std::size_t>(rank)];
  A2WS_CHECK(slot.state == State::running && running_ == rank);
  slot.state = State::runnable;
  running_ = -1;
  grant_locked(lock);
}

void VirtualClockBoard::advance(int rank, double seconds) {
  std::unique_lock<std::mutex> lock(mutex_);
  slots_[static_cast<std::size_t>(rank)].clock += seconds;
}

double VirtualClockBoard::now(int rank) const {
  std::unique_lock<std::mutex> lock(mutex_);
  return slots_[static_cast<std::size_t>(rank)].clock;
}

void VirtualClockBoard::block(int rank) {
  std::unique_lock<std::mutex> lock(mutex_);
  Slot& slot = slots_[static_cast<std::size_t>(rank)];
  A2WS_CHECK(slot.state == State::running && running_ == rank);
  slot.state = State::blocked;
  slot.woken = false;
  running_ = -1;
  grant_locked(lock);
  slot.cv->wait(lock, [&] { return slot.woken; });
  // wake() already made us runnable; take the step right back before
  // returning, so callers stay inside their step across a block.
  slot.cv->wait(lock, [&] { return running_ < 0 && pick_next_locked() == rank; });
  slot.state = State::running;
  running_ = rank;
}

void VirtualClockBoard::wake(int rank, double at) {
  std::unique_lock<std::mutex> lock(mutex_);
  Slot& slot = slots_[static_cast<std::size_t>(rank)];
  if (slot.state != State::blocked) return;  // busy ranks notice on their own
  slot.clock = std::max(slot.clock, at);
  // Flip to runnable here so the deadlock detector and step grants see the
  // wake immediately, not when the woken thread next gets CPU time.
  slot.state = State::runnable;
  slot.woken = true;
  slot.cv->notify_one();
}

void VirtualClockBoard::finish(int rank) {
  std::unique_lock<std::mutex> lock(mutex_);
  Slot& slot = slots_[static_cast<std::size_t>(rank)];
  A2WS_CHECK(slot.state == State::running && running_ == rank);
  slot.state = State::finished;
  running_ = -1;
  grant_locked(lock);
}

double VirtualClockBoard::max_finished_clock() const {
  std::unique_lock<std::mutex> lock(mutex_);
  double best = 0.0;
  for (const Slot& s : slots_) best = std::max(best, s.clock);
  return best;
}

}  // namespace a2ws
