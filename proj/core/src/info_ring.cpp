#include "a2ws/info_ring.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

namespace a2ws {

using osc::LockMode;
using osc::Word;

namespace {

int wrap(int value, int ranks) {
  int m = value % ranks;
  return m < 0 ? m + ranks : m;
}

}  // namespace

std::vector<int> neighbor_send_positions(int rank, RingDirection direction,
                                         int radius, int ranks) {
  A2WS_CHECK(radius >= 1 && ranks >= 2);
  std::vector<int> positions;
  positions.reserve(static_cast<std::size_t>(radius));
  for (int step = 0; step < radius; ++step) {
    // right neighbor receives (i-R+1 .. i); left neighbor receives (i .. i+R-1)
    int pos = direction == RingDirection::right
                  ? wrap(rank - radius + 1 + step, ranks)
                  : wrap(rank + step, ranks);
    if (std::find(positions.begin(), positions.end(), pos) == positions.end())
      positions.push_back(pos);
  }
  return positions;
}

InfoRing::InfoRing(osc::Communicator& comm, int radius)
    : comm_(comm), radius_(radius) {
  int p = comm.size();
  A2WS_CHECK_MSG(radius >= 1, "radius must be at least 1");
  if (p == 2 && radius != 1)
    throw std::invalid_argument("a two-rank ring supports radius 1 only");
  if (p > 2 && 2 * radius + 1 > p)
    throw std::invalid_argument(
        "radius too large: writer regions of the two neighbors would overlap");

  win_ = comm.create_window("info.vector", p * kEntryWords,
                            osc::CellKind::scalar_word);
  dirty_.assign(static_cast<std::size_t>(p),
                std::vector<char>(static_cast<std::size_t>(p), 0));
  last_seen_.assign(static_cast<std::size_t>(p),
                    std::vector<std::uint64_t>(static_cast<std::size_t>(p), 0));
  writer_tags_ = std::vector<std::atomic<int>>(static_cast<std::size_t>(p) *
                                               static_cast<std::size_t>(p));
}

int InfoRing::ranks() const { return comm_.size(); }

int InfoRing::neighbor(int rank, RingDirection direction) const {
  int p = comm_.size();
  return direction == RingDirection::right ? wrap(rank + 1, p) : wrap(rank - 1, p);
}

std::vector<int> InfoRing::window_positions(int rank) const {
  int p = comm_.size();
  std::vector<int> positions;
  for (int offset = -radius_; offset <= radius_; ++offset) {
    int pos = wrap(rank + offset, p);
    if (std::find(positions.begin(), positions.end(), pos) == positions.end())
      positions.push_back(pos);
  }
  return positions;
}

ProcessInfo InfoRing::read_entry(int owner_rank, int position) const {
  int base = position * kEntryWords;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Word raw[kEntryWords];
    comm_.with_lock(win_, owner_rank, LockMode::shared, [&] {
      comm_.get(win_, owner_rank, base, std::span<Word>(raw, kEntryWords));
    });
    if (raw[0] == raw[4]) {
      ProcessInfo info;
      info.version = raw[0];
      info.n = static_cast<std::int64_t>(raw[1]);
      info.mean_runtime = std::bit_cast<double>(raw[2]);
      info.completed = static_cast<std::int64_t>(raw[3]);
      return info;
    }
  }
  A2WS_CHECK_MSG(false, "info entry update never settled");
  return {};
}

void InfoRing::write_entry(int writer_rank, int owner_rank, int position,
                           const ProcessInfo& info) {
  int p = comm_.size();
  // Debug tagging of the partition rule: each position of each vector has a
  // unique legitimate writer.
  bool allowed = false;
  if (position == owner_rank) {
    allowed = writer_rank == owner_rank;
  } else {
    int behind = wrap(owner_rank - position, p);
    int ahead = wrap(position - owner_rank, p);
    if (behind >= 1 && behind <= radius_ && writer_rank == wrap(owner_rank - 1, p))
      allowed = true;
    if (ahead >= 1 && ahead <= radius_ && writer_rank == wrap(owner_rank + 1, p))
      allowed = true;
  }
  std::atomic<int>& tag =
      writer_tags_[static_cast<std::size_t>(owner_rank) * static_cast<std::size_t>(p) +
                   static_cast<std::size_t>(position)];
  int seen = tag.exchange(writer_rank + 1, std::memory_order_relaxed);
  if (!allowed || (seen != 0 && seen != writer_rank + 1)) {
    writer_violations_.fetch_add(1, std::memory_order_relaxed);
    A2WS_CHECK_MSG(allowed, "info vector write outside the writer partition");
  }

  Word raw[kEntryWords];
  raw[0] = info.version;
  raw[1] = static_cast<Word>(info.n);
  raw[2] = std::bit_cast<Word>(info.mean_runtime);
  raw[3] = static_cast<Word>(info.completed);
  raw[4] = info.version;
  comm_.with_lock(win_, owner_rank, LockMode::shared, [&] {
    comm_.put(win_, owner_rank, position * kEntryWords,
              std::span<const Word>(raw, kEntryWords));
  });
}

void InfoRing::init_static(const std::vector<std::int64_t>& initial_counts) {
  int p = comm_.size();
  A2WS_CHECK(static_cast<int>(initial_counts.size()) == p);
  for (int rank = 0; rank < p; ++rank) {
    for (int pos : window_positions(rank)) {
      ProcessInfo info;
      info.n = initial_counts[static_cast<std::size_t>(pos)];
      Word raw[kEntryWords];
      raw[0] = 0;
      raw[1] = static_cast<Word>(info.n);
      raw[2] = std::bit_cast<Word>(info.mean_runtime);
      raw[3] = 0;
      raw[4] = 0;
      comm_.with_lock(win_, rank, LockMode::shared, [&] {
        comm_.put(win_, rank, pos * kEntryWords,
                  std::span<const Word>(raw, kEntryWords));
      });
    }
  }
}

void InfoRing::update_self(int rank, std::int64_t n, double mean_runtime,
                           std::int64_t completed) {
  ProcessInfo current = read_entry(rank, rank);
  bool relevant = current.n != n || current.mean_runtime != mean_runtime;
  if (!relevant && current.completed == completed) return;

  ProcessInfo next;
  next.n = n;
  next.mean_runtime = mean_runtime;
  next.completed = completed;
  next.version = current.version + 1;
  write_entry(rank, rank, rank, next);
  last_seen_[static_cast<std::size_t>(rank)][static_cast<std::size_t>(rank)] =
      next.version;
  if (relevant)
    dirty_[static_cast<std::size_t>(rank)][static_cast<std::size_t>(rank)] = 1;
}

void InfoRing::mark_outdated(int rank, int position, OutdateCause cause) {
  int p = comm_.size();
  A2WS_CHECK(position >= 0 && position < p);
  auto window = window_positions(rank);
  A2WS_CHECK_MSG(std::find(window.begin(), window.end(), position) != window.end(),
                 "cannot mark a position outside the rank's window");
  switch (cause) {
    case OutdateCause::self_runtime_update:
    case OutdateCause::victim_detected_theft:
      A2WS_CHECK_MSG(position == rank, "self causes mark the rank's own entry");
      break;
    case OutdateCause::steal_attempt_failed:
      A2WS_CHECK_MSG(position != rank, "a failed steal marks the victim only");
      break;
    case OutdateCause::thief_stole:
      break;  // thief marks both itself and the victim
  }
  dirty_[static_cast<std::size_t>(rank)][static_cast<std::size_t>(position)] = 1;
}

int InfoRing::info_communication(int rank) {
  int p = comm_.size();
  auto& dirty = dirty_[static_cast<std::size_t>(rank)];
  auto& seen = last_seen_[static_cast<std::size_t>(rank)];

  // A relayed change keeps travelling: flag any position whose version moved
  // since this rank last looked.
  for (int pos : window_positions(rank)) {
    if (pos == rank) continue;
    ProcessInfo e = read_entry(rank, pos);
    if (e.version > seen[static_cast<std::size_t>(pos)]) {
      seen[static_cast<std::size_t>(pos)] = e.version;
      dirty[static_cast<std::size_t>(pos)] = 1;
    }
  }

  int sends = 0;
  if (p >= 2) {
    for (RingDirection dir : {RingDirection::right, RingDirection::left}) {
      int nb = neighbor(rank, dir);
      if (nb == rank) continue;
      for (int pos : neighbor_send_positions(rank, dir, radius_, p)) {
        if (!dirty[static_cast<std::size_t>(pos)]) continue;
        ProcessInfo mine = read_entry(rank, pos);
        ProcessInfo theirs = read_entry(nb, pos);
        if (mine.version > theirs.version) {
          write_entry(rank, nb, pos, mine);
          ++sends;
        }
      }
    }
  }
  std::fill(dirty.begin(), dirty.end(), 0);
  return sends;
}

ProcessInfo InfoRing::read(int rank, int position) const {
  return read_entry(rank, position);
}

bool InfoRing::dirty(int rank, int position) const {
  return dirty_[static_cast<std::size_t>(rank)][static_cast<std::size_t>(position)] !=
         0;
}

}  // namespace a2ws
