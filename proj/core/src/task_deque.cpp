#include "a2ws/task_deque.hpp"

#include <algorithm>
#include <stdexcept>

namespace a2ws {

using osc::HeadTail;
using osc::LockMode;
using osc::Word;

std::vector<std::pair<std::int64_t, std::int64_t>> block_partition(
    std::int64_t n_tasks, int ranks) {
  A2WS_CHECK(ranks >= 1 && n_tasks >= 0);
  std::vector<std::pair<std::int64_t, std::int64_t>> parts;
  parts.reserve(static_cast<std::size_t>(ranks));
  std::int64_t quota = n_tasks / ranks;
  std::int64_t remainder = n_tasks % ranks;
  std::int64_t begin = 0;
  for (int r = 0; r < ranks; ++r) {
    std::int64_t size = quota + (r < remainder ? 1 : 0);
    parts.emplace_back(begin, begin + size);
    begin += size;
  }
  return parts;
}

DequeSpace::DequeSpace(osc::Communicator& comm, int capacity)
    : comm_(comm), capacity_(capacity) {
  if (capacity < 0) throw std::invalid_argument("negative deque capacity");
  slots_ = comm.create_window("deque.slots", std::max(capacity, 1),
                              osc::CellKind::scalar_word);
  cursors_ = comm.create_window("deque.cursors", 1, osc::CellKind::packed_headtail);
}

// Cursor values are absolute positions; slots are addressed modulo the
// capacity. At most `capacity` cells are ever live at once (a rank cannot
// hold more than every task), and appends are excluded while any reserved
// range is still being copied, so wrapped ranges never collide.
void DequeSpace::slot_range(int rank, std::int64_t first, std::span<Word> io,
                            bool write) {
  int cap = std::max(capacity_, 1);
  std::size_t done = 0;
  while (done < io.size()) {
    int at = static_cast<int>((first + static_cast<std::int64_t>(done)) % cap);
    std::size_t len = std::min(io.size() - done, static_cast<std::size_t>(cap - at));
    if (write)
      comm_.put(slots_, rank, at, io.subspan(done, len));
    else
      comm_.get(slots_, rank, at, io.subspan(done, len));
    done += len;
  }
}

int DequeSpace::ranks() const { return comm_.size(); }

void DequeSpace::init_deque(int rank, std::span<const TaskId> tasks) {
  A2WS_CHECK(static_cast<int>(tasks.size()) <= capacity_);
  HeadTail fresh = comm_.read_headtail(cursors_, rank);
  A2WS_CHECK_MSG((fresh == HeadTail{0, 0}), "deque already initialized");
  if (!tasks.empty()) {
    std::vector<Word> words(tasks.size());
    for (std::size_t i = 0; i < tasks.size(); ++i)
      words[i] = static_cast<Word>(tasks[i]);
    comm_.with_lock(slots_, rank, LockMode::exclusive,
                    [&] { slot_range(rank, 0, words, /*write=*/true); });
  }
  // Zero-init reads (0, 0); shift the tail to |tasks| - 1.
  comm_.fetch_add_packed(cursors_, rank,
                         0, static_cast<std::int32_t>(tasks.size()) - 1);
}

GetOutcome DequeSpace::get_task(int rank) {
  return comm_.with_lock(slots_, rank, LockMode::shared, [&]() -> GetOutcome {
    HeadTail old = comm_.fetch_add_packed(cursors_, rank, +1, 0);
    if (old.head > old.tail) {
      comm_.fetch_add_packed(cursors_, rank, -1, 0);  // restore; deque is empty
      return {std::nullopt, old};
    }
    Word cell;
    slot_range(rank, old.head, std::span<Word>(&cell, 1), /*write=*/false);
    return {static_cast<TaskId>(cell), old};
  });
}

StealOutcome DequeSpace::steal_tasks(int thief_rank, int victim_rank, int k) {
  A2WS_CHECK_MSG(k >= 1, "steal amount must be at least 1");
  A2WS_CHECK_MSG(victim_rank != thief_rank, "a rank cannot steal from itself");
  if (victim_rank < 0 || victim_rank >= comm_.size())
    throw std::invalid_argument("victim rank out of range");

  StealOutcome out;
  out.requested = k;

  comm_.with_lock(slots_, victim_rank, LockMode::shared, [&] {
    HeadTail old = comm_.fetch_add_packed(cursors_, victim_rank, 0,
                                          -static_cast<std::int32_t>(k));
    out.observed = old;
    std::int64_t avail = old.available();
    out.adjusted = static_cast<int>(std::clamp<std::int64_t>(avail, 0, k));
    if (out.adjusted < k) {
      // The occasional accumulate: give back what was not actually there.
      comm_.fetch_add_packed(cursors_, victim_rank, 0,
                             static_cast<std::int32_t>(k - out.adjusted));
    }
    if (out.adjusted > 0) {
      std::vector<Word> copy(static_cast<std::size_t>(out.adjusted));
      slot_range(victim_rank, old.tail - out.adjusted + 1, std::span<Word>(copy),
                 /*write=*/false);
      out.stolen.reserve(copy.size());
      for (Word w : copy) out.stolen.push_back(static_cast<TaskId>(w));
    }
  });

  if (out.adjusted > 0) {
    comm_.with_lock(slots_, thief_rank, LockMode::exclusive, [&] {
      HeadTail mine = comm_.fetch_add_packed(
          cursors_, thief_rank, 0, static_cast<std::int32_t>(out.adjusted));
      std::vector<Word> words(out.stolen.size());
      for (std::size_t i = 0; i < out.stolen.size(); ++i)
        words[i] = static_cast<Word>(out.stolen[i]);
      slot_range(thief_rank, mine.tail + 1, words, /*write=*/true);
    });
  }
  return out;
}

osc::HeadTail DequeSpace::load_cursors(int rank) const {
  return comm_.read_headtail(cursors_, rank);
}

}  // namespace a2ws
