#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "a2ws/osc.hpp"

// Per-rank task deques over shared windows. The owner consumes at the head,
// remote thieves take from the tail, and both sides reserve slots through the
// single packed head-tail word, so every slot is claimed exactly once.
//
// Lock choreography:
//   get_task    owner only: shared own-deque lock around the head reservation
//               and slot read; an empty observation is compensated in place.
//   steal_tasks thief: shared victim-deque lock around the tail reservation,
//               the occasional compensation and the slot copy, then (with the
//               victim lock released) an exclusive own-deque lock for the
//               append. The shared/exclusive split is what lets a victim keep
//               consuming while it cannot append.
// The tail reservation and its compensation stay inside the victim-deque
// lock: an owner append moves the same tail lane, and only the exclusive
// lock keeps an in-flight undershoot from straddling it.

namespace a2ws {

using TaskId = std::int64_t;

struct GetOutcome {
  std::optional<TaskId> task;
  osc::HeadTail observed;  // cursors before the head reservation
};

struct StealOutcome {
  std::vector<TaskId> stolen;
  int requested = 0;
  int adjusted = 0;        // == stolen.size(); min(requested, victim availability)
  osc::HeadTail observed;  // victim cursors before the tail reservation
};

// Contiguous [begin, end) task ranges, remainder spread over the lowest ranks.
std::vector<std::pair<std::int64_t, std::int64_t>> block_partition(
    std::int64_t n_tasks, int ranks);

class DequeSpace {
 public:
  // Collective: every rank gets `capacity` slots and one packed cursor cell.
  DequeSpace(osc::Communicator& comm, int capacity);

  // head = 0, tail = |tasks| - 1. Once per rank, before workers start.
  void init_deque(int rank, std::span<const TaskId> tasks);

  // Owner-only consumption from the head. Empty is a normal return.
  GetOutcome get_task(int rank);

  // Steals up to k tasks from the victim's tail and appends them to the
  // thief's deque. k >= 1; victim != thief.
  StealOutcome steal_tasks(int thief_rank, int victim_rank, int k);

  osc::HeadTail load_cursors(int rank) const;
  static std::int64_t available(osc::HeadTail ht) { return ht.available(); }

  int capacity() const { return capacity_; }
  int ranks() const;

 private:
  void slot_range(int rank, std::int64_t first, std::span<osc::Word> io,
                  bool write);

  osc::Communicator& comm_;
  int capacity_;
  osc::WindowHandle slots_;
  osc::WindowHandle cursors_;
};

}  // namespace a2ws
