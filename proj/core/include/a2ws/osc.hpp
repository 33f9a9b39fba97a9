#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "a2ws/check.hpp"

// In-process emulation of one-sided communication. Ranks are worker threads;
// each logical window owns one zero-initialized cell array per rank, and any
// rank can put/get/atomically-update any other rank's instance. Shared and
// exclusive locks protect instances the way MPI passive-target epochs do:
// values written under a lock become visible to readers that lock afterwards
// (release/acquire), and individual cells are atomic words so concurrent
// access never yields a torn value.

namespace a2ws::osc {

using Word = std::uint64_t;

enum class CellKind { scalar_word, packed_headtail };
enum class LockMode { shared, exclusive };

// Deque cursors packed into one atomically-updatable word. `head` is the
// index of the next task the owner executes, `tail` the index of the last
// stealable task. Empty iff tail < head; tail can transiently undershoot
// below head while an over-steal awaits compensation.
struct HeadTail {
  std::int32_t head = 0;
  std::int32_t tail = 0;

  static HeadTail unpack(Word w) {
    return {static_cast<std::int32_t>(w >> 32),
            static_cast<std::int32_t>(w & 0xffffffffULL)};
  }
  Word pack() const {
    return (static_cast<Word>(static_cast<std::uint32_t>(head)) << 32) |
           static_cast<Word>(static_cast<std::uint32_t>(tail));
  }
  bool empty() const { return tail < head; }
  // Number of occupied slots; zero when empty or undershot.
  std::int64_t available() const {
    std::int64_t n = static_cast<std::int64_t>(tail) - head + 1;
    return n > 0 ? n : 0;
  }
  friend bool operator==(const HeadTail&, const HeadTail&) = default;
};

struct WindowHandle {
  int id = -1;
  bool valid() const { return id >= 0; }
};

struct CommunicatorOptions {
  // Uniform random [0, latency_us] microseconds charged per remote operation
  // (a data op or lock acquisition whose target is not the calling rank).
  // 0 disables injection entirely.
  unsigned latency_us = 0;
  // Detect lock-ordering hazards and slow acquisitions.
  bool lock_watchdog = false;
  // Throw on a watchdog ordering violation instead of only counting it.
  bool watchdog_throws = true;
  std::uint64_t latency_seed = 1;

  // Reads A2WS_LATENCY_US and A2WS_LOCK_WATCHDOG.
  static CommunicatorOptions from_env();
};

class Communicator {
 public:
  explicit Communicator(int ranks,
                        CommunicatorOptions opts = CommunicatorOptions::from_env());
  ~Communicator();

  Communicator(const Communicator&) = delete;
  Communicator& operator=(const Communicator&) = delete;

  int size() const { return ranks_; }
  const CommunicatorOptions& options() const { return opts_; }

  // Collective creation: one instance of `cell_count` zeroed cells per rank,
  // addressable by every rank. packed_headtail windows hold exactly one cell.
  WindowHandle create_window(std::string_view name, int cell_count, CellKind kind);

  int cell_count(WindowHandle w) const;
  CellKind cell_kind(WindowHandle w) const;

  // Data ops require the caller to hold a lock (any mode) on (w, target_rank).
  void put(WindowHandle w, int target_rank, int offset, std::span<const Word> values);
  void get(WindowHandle w, int target_rank, int offset, std::span<Word> out) const;
  std::vector<Word> get(WindowHandle w, int target_rank, int offset, int length) const;

  // Atomically replaces (h, t) with (h+dh, t+dt) and returns the prior value.
  // Lane-wise arithmetic: tail deltas never borrow into the head lane. All
  // such operations on one cell are totally ordered. No lock required.
  HeadTail fetch_add_packed(WindowHandle w, int target_rank,
                            std::int32_t delta_head, std::int32_t delta_tail);

  // Unordered atomic snapshot of a packed cell. No lock required.
  HeadTail read_headtail(WindowHandle w, int target_rank) const;

  // Runs `body` while holding the requested lock; released on all exit paths.
  // Re-requesting a (window, target) pair already held by this thread is a
  // contract fault.
  template <class Body>
  auto with_lock(WindowHandle w, int target_rank, LockMode mode, Body&& body)
      -> decltype(body()) {
    LockGuard guard(*this, w, target_rank, mode);
    return body();
  }

  // Threads acting as ranks register themselves so the watchdog and latency
  // injection know the caller's identity. -1 = unbound (setup code).
  class RankBinding {
   public:
    RankBinding(Communicator& comm, int rank);
    ~RankBinding();
    RankBinding(const RankBinding&) = delete;
    RankBinding& operator=(const RankBinding&) = delete;

   private:
    int previous_;
  };
  static int current_rank();

  // Replaces the default latency sink (a calibrated spin) — the virtual-time
  // harness advances the rank's virtual clock instead.
  using RemoteCostHook = std::function<void(int rank, double seconds)>;
  void set_remote_cost_hook(RemoteCostHook hook);

  std::uint64_t watchdog_violations() const {
    return watchdog_violations_.load(std::memory_order_relaxed);
  }

 private:
  struct Instance;
  struct WindowData;

  class LockGuard {
   public:
    LockGuard(Communicator& comm, WindowHandle w, int target, LockMode mode);
    ~LockGuard();
    LockGuard(const LockGuard&) = delete;
    LockGuard& operator=(const LockGuard&) = delete;

   private:
    Communicator& comm_;
    Instance* instance_;
    int window_id_;
    int target_;
    LockMode mode_;
  };

  const WindowData& window(WindowHandle w) const;
  Instance& instance(WindowHandle w, int target_rank) const;
  void charge_remote(int target_rank) const;
  void note_acquire(int window_id, int target, LockMode mode);
  void note_release(int window_id, int target);
  void check_ordering(int window_id, int target, LockMode mode);

  int ranks_;
  CommunicatorOptions opts_;
  RemoteCostHook remote_cost_hook_;
  mutable std::atomic<std::uint64_t> watchdog_violations_{0};
  mutable std::vector<std::uint64_t> latency_rng_;  // one stream per rank

  std::vector<std::unique_ptr<WindowData>> windows_;
  mutable std::mutex registry_mutex_;
};

}  // namespace a2ws::osc
