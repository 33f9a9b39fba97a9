#include "a2ws/osc.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <mutex>
#include <shared_mutex>
#include <stdexcept>
#include <thread>

#include "a2ws/rng.hpp"

namespace a2ws::osc {

namespace {

thread_local int tls_rank = -1;

struct HeldLock {
  const void* comm;
  int window_id;
  int target;
  LockMode mode;
};

thread_local std::vector<HeldLock> tls_held;

bool holds_any(const void* comm, int window_id, int target) {
  return std::any_of(tls_held.begin(), tls_held.end(), [&](const HeldLock& h) {
    return h.comm == comm && h.window_id == window_id && h.target == target;
  });
}

void spin_for(double seconds) {
  auto until = std::chrono::steady_clock::now() +
               std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                   std::chrono::duration<double>(seconds));
  while (std::chrono::steady_clock::now() < until) {
  }
}

unsigned env_unsigned(const char* name, unsigned fallback) {
  const char* v = std::getenv(name);
  if (!v || !*v) return fallback;
  return static_cast<unsigned>(std::strtoul(v, nullptr, 10));
}

}  // namespace

struct Communicator::Instance {
  std::unique_ptr<std::atomic<Word>[]> cells;
  std::shared_timed_mutex mutex;
};

struct Communicator::WindowData {
  int id = -1;
  std::string name;
  CellKind kind = CellKind::scalar_word;
  int cell_count = 0;
  std::vector<Instance> per_rank;
};

CommunicatorOptions CommunicatorOptions::from_env() {
  CommunicatorOptions opts;
  opts.latency_us = env_unsigned("A2WS_LATENCY_US", 0);
  opts.lock_watchdog = env_unsigned("A2WS_LOCK_WATCHDOG", 0) != 0;
  return opts;
}

Communicator::Communicator(int ranks, CommunicatorOptions opts)
    : ranks_(ranks), opts_(opts) {
  if (ranks < 1) throw std::invalid_argument("communicator needs at least one rank");
  latency_rng_.resize(static_cast<std::size_t>(ranks));
  for (int r = 0; r < ranks; ++r)
    latency_rng_[static_cast<std::size_t>(r)] =
        mix_seed(opts_.latency_seed, static_cast<std::uint64_t>(r) + 0x51edULL);
}

Communicator::~Communicator() = default;

WindowHandle Communicator::create_window(std::string_view name, int cell_count,
                                         CellKind kind) {
  if (cell_count <= 0)
    throw std::invalid_argument("window cell count must be positive");
  if (kind == CellKind::packed_headtail && cell_count != 1)
    throw std::invalid_argument("packed head-tail windows hold exactly one cell");

  std::lock_guard<std::mutex> lock(registry_mutex_);
  for (const auto& w : windows_)
    if (w->name == name)
      throw std::invalid_argument("duplicate window id: " + std::string(name));

  auto data = std::make_unique<WindowData>();
  data->id = static_cast<int>(windows_.size());
  data->name = std::string(name);
  data->kind = kind;
  data->cell_count = cell_count;
  data->per_rank = std::vector<Instance>(static_cast<std::size_t>(ranks_));
  for (auto& inst : data->per_rank) {
    inst.cells = std::make_unique<std::atomic<Word>[]>(
        static_cast<std::size_t>(cell_count));
    for (int c = 0; c < cell_count; ++c)
      inst.cells[static_cast<std::size_t>(c)].store(0, std::memory_order_relaxed);
  }
  windows_.push_back(std::move(data));
  return WindowHandle{windows_.back()->id};
}

const Communicator::WindowData& Communicator::window(WindowHandle w) const {
  A2WS_CHECK_MSG(w.valid() && w.id < static_cast<int>(windows_.size()),
                 "invalid window handle");
  return *windows_[static_cast<std::size_t>(w.id)];
}

Communicator::Instance& Communicator::instance(WindowHandle w, int target_rank) const {
  const WindowData& data = window(w);
  if (target_rank < 0 || target_rank >= ranks_)
    throw std::invalid_argument("target rank out of range");
  return const_cast<Instance&>(data.per_rank[static_cast<std::size_t>(target_rank)]);
}

int Communicator::cell_count(WindowHandle w) const { return window(w).cell_count; }
CellKind Communicator::cell_kind(WindowHandle w) const { return window(w).kind; }

void Communicator::charge_remote(int target_rank) const {
  if (opts_.latency_us == 0) return;
  int rank = tls_rank;
  if (rank < 0 || rank == target_rank) return;
  std::uint64_t& state = latency_rng_[static_cast<std::size_t>(rank)];
  double us = static_cast<double>(splitmix64(state) % (opts_.latency_us + 1));
  double seconds = us * 1e-6;
  if (remote_cost_hook_)
    remote_cost_hook_(rank, seconds);
  else
    spin_for(seconds);
}

void Communicator::set_remote_cost_hook(RemoteCostHook hook) {
  remote_cost_hook_ = std::move(hook);
}

void Communicator::put(WindowHandle w, int target_rank, int offset,
                       std::span<const Word> values) {
  const WindowData& data = window(w);
  Instance& inst = instance(w, target_rank);
  if (offset < 0 || values.size() > static_cast<std::size_t>(data.cell_count) ||
      offset > data.cell_count - static_cast<int>(values.size()))
    throw std::out_of_range("put outside window bounds");
  A2WS_CHECK_MSG(holds_any(this, data.id, target_rank),
                 "put requires a lock on the target window");
  charge_remote(target_rank);
  for (std::size_t i = 0; i < values.size(); ++i)
    inst.cells[static_cast<std::size_t>(offset) + i].store(values[i],
                                                           std::memory_order_seq_cst);
}

void Communicator::get(WindowHandle w, int target_rank, int offset,
                       std::span<Word> out) const {
  const WindowData& data = window(w);
  Instance& inst = instance(w, target_rank);
  if (offset < 0 || out.size() > static_cast<std::size_t>(data.cell_count) ||
      offset > data.cell_count - static_cast<int>(out.size()))
    throw std::out_of_range("get outside window bounds");
  A2WS_CHECK_MSG(holds_any(this, data.id, target_rank),
                 "get requires a lock on the target window");
  charge_remote(target_rank);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = inst.cells[static_cast<std::size_t>(offset) + i].load(
        std::memory_order_seq_cst);
}

std::vector<Word> Communicator::get(WindowHandle w, int target_rank, int offset,
                                    int length) const {
  if (length < 0) throw std::out_of_range("negative get length");
  std::vector<Word> out(static_cast<std::size_t>(length));
  get(w, target_rank, offset, std::span<Word>(out));
  return out;
}

HeadTail Communicator::fetch_add_packed(WindowHandle w, int target_rank,
                                        std::int32_t delta_head,
                                        std::int32_t delta_tail) {
  const WindowData& data = window(w);
  A2WS_CHECK_MSG(data.kind == CellKind::packed_headtail,
                 "fetch_add_packed needs a packed head-tail window");
  Instance& inst = instance(w, target_rank);
  charge_remote(target_rank);
  std::atomic<Word>& cell = inst.cells[0];
  Word old = cell.load(std::memory_order_seq_cst);
  for (;;) {
    HeadTail ht = HeadTail::unpack(old);
    HeadTail next{ht.head + delta_head, ht.tail + delta_tail};
    if (cell.compare_exchange_weak(old, next.pack(), std::memory_order_seq_cst,
                                   std::memory_order_seq_cst))
      return ht;
  }
}

HeadTail Communicator::read_headtail(WindowHandle w, int target_rank) const {
  const WindowData& data = window(w);
  A2WS_CHECK_MSG(data.kind == CellKind::packed_headtail,
                 "read_headtail needs a packed head-tail window");
  Instance& inst = instance(w, target_rank);
  return HeadTail::unpack(inst.cells[0].load(std::memory_order_seq_cst));
}

void Communicator::check_ordering(int window_id, int target, LockMode /*mode*/) {
  if (!opts_.lock_watchdog) return;
  int rank = tls_rank;
  if (rank < 0) return;
  // Holding an exclusive lock on one's own instance of a window and then
  // requesting any other lock on the same window is the symmetric-steal
  // deadlock pattern the protocol forbids.
  for (const HeldLock& h : tls_held) {
    if (h.comm == this && h.window_id == window_id && h.target == rank &&
        h.mode == LockMode::exclusive && h.target != target) {
      watchdog_violations_.fetch_add(1, std::memory_order_relaxed);
      if (opts_.watchdog_throws)
        throw ContractError("lock ordering violation: second lock requested on "
                            "a window whose own instance is held exclusively");
    }
  }
}

void Communicator::note_acquire(int window_id, int target, LockMode mode) {
  tls_held.push_back(HeldLock{this, window_id, target, mode});
}

void Communicator::note_release(int window_id, int target) {
  for (auto it = tls_held.rbegin(); it != tls_held.rend(); ++it) {
    if (it->comm == this && it->window_id == window_id && it->target == target) {
      tls_held.erase(std::next(it).base());
      return;
    }
  }
  A2WS_CHECK_MSG(false, "released a lock that was not held");
}

Communicator::LockGuard::LockGuard(Communicator& comm, WindowHandle w, int target,
                                   LockMode mode)
    : comm_(comm), instance_(nullptr), window_id_(-1), target_(target), mode_(mode) {
  const WindowData& data = comm.window(w);
  Instance& inst = comm.instance(w, target);
  A2WS_CHECK_MSG(!holds_any(&comm, data.id, target),
                 "recursive lock on the same (window, rank) pair");
  comm.check_ordering(data.id, target, mode);
  comm.charge_remote(target);

  if (comm.opts_.lock_watchdog) {
    constexpr auto kTimeout = std::chrono::seconds(15);
    bool ok = mode == LockMode::exclusive ? inst.mutex.try_lock_for(kTimeout)
                                          : inst.mutex.try_lock_shared_for(kTimeout);
    if (!ok) {
      comm.watchdog_violations_.fetch_add(1, std::memory_order_relaxed);
      throw ContractError("lock watchdog: acquisition timed out (deadlock?)");
    }
  } else {
    if (mode == LockMode::exclusive)
      inst.mutex.lock();
    else
      inst.mutex.lock_shared();
  }
  instance_ = &inst;
  window_id_ = data.id;
  comm.note_acquire(window_id_, target_, mode_);
}

Communicator::LockGuard::~LockGuard() {
  if (!instance_) return;
  comm_.note_release(window_id_, target_);
  if (mode_ == LockMode::exclusive)
    instance_->mutex.unlock();
  else
    instance_->mutex.unlock_shared();
}

Communicator::RankBinding::RankBinding(Communicator& comm, int rank) {
  A2WS_CHECK(rank >= 0 && rank < comm.size());
  previous_ = tls_rank;
  tls_rank = rank;
}

Communicator::RankBinding::~RankBinding() { tls_rank = previous_; }

int Communicator::current_rank() { return tls_rank; }

}  // namespace a2ws::osc
