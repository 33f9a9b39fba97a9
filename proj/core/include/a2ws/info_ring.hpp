#pragma once

#include <cstdint>
#include <vector>

#include "a2ws/osc.hpp"

// Radius-limited bidirectional-ring propagation of per-process load
// information. Every rank keeps an information vector with one entry per
// rank; only the entries within ring distance R of the owner are ever
// maintained or read. Entry j of rank i's vector has exactly one writer:
// p_{i-1} for i-R <= j <= i-1, p_i itself for j = i, p_{i+1} for
// i+1 <= j <= i+R (mod P). Because writers never overlap, relays are plain
// puts with no mutual exclusion; a per-entry version written before and
// after the payload (seqlock style) gives readers whole-entry snapshots and
// makes stale relays detectable.

namespace a2ws {

struct ProcessInfo {
  std::int64_t n = 0;         // tasks owned: executed + queued
  double mean_runtime = 0.0;  // mean task seconds; <= 0 means not yet known
  std::int64_t completed = 0;
  std::uint64_t version = 0;

  bool runtime_known() const { return mean_runtime > 0.0; }
};

enum class OutdateCause {
  self_runtime_update,
  thief_stole,
  steal_attempt_failed,
  victim_detected_theft,
};

enum class RingDirection { left, right };

// Positions rank i forwards to the given neighbor: the receiver's
// writer-exclusivity rule inverted, so the payload to p_{i+1} covers
// (i-R+1 .. i) and the payload to p_{i-1} covers (i .. i+R-1), mod P.
std::vector<int> neighbor_send_positions(int rank, RingDirection direction,
                                         int radius, int ranks);

class InfoRing {
 public:
  InfoRing(osc::Communicator& comm, int radius);

  int radius() const { return radius_; }
  int ranks() const;
  // min(2R+1, P) entries, the window (i-R .. i+R) mod P in ring order.
  std::vector<int> window_positions(int rank) const;

  // Pre-run fill: every rank that maintains `position` stores the static
  // task count there (version 0, not dirty).
  void init_static(const std::vector<std::int64_t>& initial_counts);

  // Rank updates its own entry. Bumps the version when anything changed;
  // marks the entry dirty when n or the mean runtime changed.
  void update_self(int rank, std::int64_t n, double mean_runtime,
                   std::int64_t completed);

  // Sets the dirty flag at `position` of `rank`'s vector. The cause must be
  // legal for the position: self rows mark self, thief rows mark the victim
  // (and self on success).
  void mark_outdated(int rank, int position, OutdateCause cause);

  // Forwards dirty entries that fall inside a neighbor's interest region,
  // then clears all flags. Returns the number of entries sent.
  int info_communication(int rank);

  // Consistent snapshot of an entry in `rank`'s own vector.
  ProcessInfo read(int rank, int position) const;

  bool dirty(int rank, int position) const;

  // Writer-exclusivity breaches observed by the debug tagging; stays 0.
  std::uint64_t writer_violations() const {
    return writer_violations_.load(std::memory_order_relaxed);
  }

 private:
  static constexpr int kEntryWords = 5;  // [ver, n, t, completed, ver]

  int neighbor(int rank, RingDirection direction) const;
  ProcessInfo read_entry(int owner_rank, int position) const;
  void write_entry(int writer_rank, int owner_rank, int position,
                   const ProcessInfo& info);

  osc::Communicator& comm_;
  int radius_;
  osc::WindowHandle win_;
  std::vector<std::vector<char>> dirty_;                  // [rank][position]
  std::vector<std::vector<std::uint64_t>> last_seen_;     // relay detection
  mutable std::atomic<std::uint64_t> writer_violations_{0};
  std::vector<std::atomic<int>> writer_tags_;             // debug shadow
};

}  // namespace a2ws
