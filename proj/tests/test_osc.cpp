#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <functional>
#include <set>
#include <thread>
#include <vector>

#include "a2ws/osc.hpp"

using namespace a2ws;
using osc::CellKind;
using osc::Communicator;
using osc::HeadTail;
using osc::LockMode;
using osc::Word;

namespace {

osc::CommunicatorOptions quiet_options() {
  osc::CommunicatorOptions opts;
  opts.latency_us = 0;
  opts.lock_watchdog = false;
  return opts;
}

void run_ranks(Communicator& comm, int n, const std::function<void(int)>& body) {
  std::vector<std::thread> threads;
  for (int r = 0; r < n; ++r)
    threads.emplace_back([&comm, &body, r] {
      Communicator::RankBinding bind(comm, r);
      body(r);
    });
  for (auto& t : threads) t.join();
}

}  // namespace

TEST_SUITE_BEGIN("osc");

TEST_CASE("windows start zeroed and are addressable from every rank") {
  Communicator comm(4, quiet_options());
  auto w = comm.create_window("scratch", 8, CellKind::scalar_word);
  for (int rank = 0; rank < 4; ++rank) {
    auto snapshot = comm.with_lock(w, rank, LockMode::shared,
                                   [&] { return comm.get(w, rank, 0, 8); });
    CHECK(std::all_of(snapshot.begin(), snapshot.end(),
                      [](Word v) { return v == 0; }));
  }
  auto ht = comm.create_window("cursors", 1, CellKind::packed_headtail);
  CHECK(comm.read_headtail(ht, 3) == HeadTail{0, 0});
}

TEST_CASE("window creation faults") {
  Communicator comm(2, quiet_options());
  CHECK_THROWS_AS(comm.create_window("w", 0, CellKind::scalar_word),
                  std::invalid_argument);
  CHECK_THROWS_AS(comm.create_window("w", -3, CellKind::scalar_word),
                  std::invalid_argument);
  comm.create_window("w", 4, CellKind::scalar_word);
  CHECK_THROWS_AS(comm.create_window("w", 4, CellKind::scalar_word),
                  std::invalid_argument);
  CHECK_THROWS_AS(comm.create_window("p", 2, CellKind::packed_headtail),
                  std::invalid_argument);
}

TEST_CASE("put then get round-trips through a remote instance") {
  Communicator comm(4, quiet_options());
  auto w = comm.create_window("data", 8, CellKind::scalar_word);
  std::vector<Word> values{7, 9};
  comm.with_lock(w, 2, LockMode::exclusive, [&] { comm.put(w, 2, 4, values); });
  auto read = comm.with_lock(w, 2, LockMode::shared,
                             [&] { return comm.get(w, 2, 4, 2); });
  CHECK(read == values);

  auto full = comm.with_lock(w, 2, LockMode::shared,
                             [&] { return comm.get(w, 2, 0, 8); });
  CHECK(full == std::vector<Word>{0, 0, 0, 0, 7, 9, 0, 0});
}

TEST_CASE("bounds and lock preconditions") {
  Communicator comm(2, quiet_options());
  auto w = comm.create_window("data", 8, CellKind::scalar_word);
  Word one = 1;
  comm.with_lock(w, 0, LockMode::exclusive, [&] {
    CHECK_THROWS_AS(comm.put(w, 0, 8, std::span<const Word>(&one, 1)),
                    std::out_of_range);
    CHECK_THROWS_AS(comm.put(w, 0, -1, std::span<const Word>(&one, 1)),
                    std::out_of_range);
    CHECK_THROWS_AS(comm.get(w, 0, 5, 4), std::out_of_range);
    CHECK_THROWS_AS(comm.put(w, 2, 0, std::span<const Word>(&one, 1)),
                    std::invalid_argument);  // rank out of range
  });
  // Unlocked access is a contract fault.
  CHECK_THROWS_AS(comm.put(w, 0, 0, std::span<const Word>(&one, 1)), ContractError);
  CHECK_THROWS_AS(comm.get(w, 0, 0, 1), ContractError);
  // Holding rank 1's instance does not license access to rank 0's.
  comm.with_lock(w, 1, LockMode::exclusive, [&] {
    CHECK_THROWS_AS(comm.get(w, 0, 0, 1), ContractError);
  });
}

TEST_CASE("fetch_add_packed arithmetic contract") {
  Communicator comm(2, quiet_options());
  auto w = comm.create_window("ht", 1, CellKind::packed_headtail);
  comm.fetch_add_packed(w, 0, 0, 9);  // state (0, 9)

  HeadTail old = comm.fetch_add_packed(w, 0, 0, -3);
  CHECK(old == HeadTail{0, 9});
  CHECK(comm.read_headtail(w, 0) == HeadTail{0, 6});

  comm.fetch_add_packed(w, 1, 5, 4);  // state (5, 4): tail < head signals empty
  HeadTail empty = comm.fetch_add_packed(w, 1, 1, 0);
  CHECK(empty == HeadTail{5, 4});
  CHECK(empty.empty());
  CHECK(empty.available() == 0);

  auto scalar = comm.create_window("s", 1, CellKind::scalar_word);
  CHECK_THROWS_AS(comm.fetch_add_packed(scalar, 0, 0, 1), ContractError);
  CHECK_THROWS_AS(comm.read_headtail(scalar, 0), ContractError);
}

TEST_CASE("negative tail lanes never borrow into the head lane") {
  Communicator comm(1, quiet_options());
  auto w = comm.create_window("ht", 1, CellKind::packed_headtail);
  comm.fetch_add_packed(w, 0, 3, 0);  // (3, 0)
  comm.fetch_add_packed(w, 0, 0, -5);
  CHECK(comm.read_headtail(w, 0) == HeadTail{3, -5});
  comm.fetch_add_packed(w, 0, 0, 5);
  CHECK(comm.read_headtail(w, 0) == HeadTail{3, 0});
}

TEST_CASE("concurrent decrements are linearizable with distinct old tails") {
  Communicator comm(8, quiet_options());
  auto w = comm.create_window("ht", 1, CellKind::packed_headtail);
  comm.fetch_add_packed(w, 0, 0, 999);  // (0, 999)

  std::vector<std::vector<std::int32_t>> seen(8);
  run_ranks(comm, 8, [&](int rank) {
    for (int i = 0; i < 125; ++i)
      seen[static_cast<std::size_t>(rank)].push_back(
          comm.fetch_add_packed(w, 0, 0, -1).tail);
  });

  std::set<std::int32_t> tails;
  for (const auto& v : seen) tails.insert(v.begin(), v.end());
  CHECK(tails.size() == 1000);  // every op saw a distinct prior tail
  CHECK(*tails.begin() == 0);
  CHECK(*tails.rbegin() == 999);
  CHECK(comm.read_headtail(w, 0) == HeadTail{0, -1});
}

TEST_CASE("concurrent puts to disjoint offsets under shared locks both land") {
  Communicator comm(4, quiet_options());
  auto w = comm.create_window("data", 64, CellKind::scalar_word);
  run_ranks(comm, 4, [&](int rank) {
    std::vector<Word> mine(16);
    for (int i = 0; i < 16; ++i)
      mine[static_cast<std::size_t>(i)] = static_cast<Word>(rank * 1000 + i);
    for (int iter = 0; iter < 200; ++iter)
      comm.with_lock(w, 0, LockMode::shared,
                     [&] { comm.put(w, 0, rank * 16, mine); });
  });
  auto all = comm.with_lock(w, 0, LockMode::shared,
                            [&] { return comm.get(w, 0, 0, 64); });
  for (int rank = 0; rank < 4; ++rank)
    for (int i = 0; i < 16; ++i)
      CHECK(all[static_cast<std::size_t>(rank * 16 + i)] ==
            static_cast<Word>(rank * 1000 + i));
}

TEST_CASE("reads racing a writer on another cell never observe a torn word") {
  Communicator comm(2, quiet_options());
  auto w = comm.create_window("data", 2, CellKind::scalar_word);
  constexpr Word kA = 0x1111111111111111ULL;
  constexpr Word kB = 0xffffffffffffffffULL;

  std::atomic<bool> stop{false};
  std::atomic<bool> bad{false};
  std::thread writer([&] {
    Communicator::RankBinding bind(comm, 0);
    Word v[2] = {kA, kB};
    int flip = 0;
    while (!stop.load(std::memory_order_relaxed)) {
      Word payload = v[flip ^= 1];
      comm.with_lock(w, 0, LockMode::shared,
                     [&] { comm.put(w, 0, 1, std::span<const Word>(&payload, 1)); });
    }
  });
  std::thread reader([&] {
    Communicator::RankBinding bind(comm, 1);
    for (int i = 0; i < 20000; ++i) {
      auto words = comm.with_lock(w, 0, LockMode::shared,
                                  [&] { return comm.get(w, 0, 0, 2); });
      if (words[0] != 0) bad = true;
      if (words[1] != 0 && words[1] != kA && words[1] != kB) bad = true;
    }
  });
  reader.join();
  stop = true;
  writer.join();
  CHECK_FALSE(bad.load());
}

TEST_CASE("exclusive sections never interleave") {
  Communicator comm(4, quiet_options());
  auto w = comm.create_window("data", 1, CellKind::scalar_word);
  int unprotected = 0;
  std::atomic<int> in_section{0};
  std::atomic<bool> overlap{false};
  run_ranks(comm, 4, [&](int) {
    for (int i = 0; i < 2000; ++i) {
      comm.with_lock(w, 0, LockMode::exclusive, [&] {
        if (in_section.fetch_add(1) != 0) overlap = true;
        ++unprotected;
        in_section.fetch_sub(1);
      });
    }
  });
  CHECK_FALSE(overlap.load());
  CHECK(unprotected == 8000);
}

TEST_CASE("shared holders proceed together; distinct instances are independent") {
  Communicator comm(2, quiet_options());
  auto w = comm.create_window("data", 1, CellKind::scalar_word);
  std::atomic<int> concurrent{0};
  std::atomic<int> peak{0};
  run_ranks(comm, 2, [&](int rank) {
    comm.with_lock(w, 0, LockMode::shared, [&] {
      int now = concurrent.fetch_add(1) + 1;
      int best = peak.load();
      while (now > best && !peak.compare_exchange_weak(best, now)) {
      }
      // Exclusive on the *other* instance does not block shared holders of
      // this one.
      comm.with_lock(w, 1, rank == 0 ? LockMode::exclusive : LockMode::shared,
                     [] {});
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
      concurrent.fetch_sub(1);
    });
  });
  CHECK(peak.load() == 2);
}

TEST_CASE("recursive locking is rejected") {
  Communicator comm(2, quiet_options());
  auto w = comm.create_window("data", 1, CellKind::scalar_word);
  comm.with_lock(w, 0, LockMode::shared, [&] {
    CHECK_THROWS_AS(comm.with_lock(w, 0, LockMode::shared, [] {}), ContractError);
    CHECK_THROWS_AS(comm.with_lock(w, 0, LockMode::exclusive, [] {}), ContractError);
  });
}

TEST_CASE("watchdog flags a second lock while holding own instance exclusively") {
  osc::CommunicatorOptions opts = quiet_options();
  opts.lock_watchdog = true;
  opts.watchdog_throws = true;
  Communicator comm(2, opts);
  auto w = comm.create_window("deque", 4, CellKind::scalar_word);

  std::thread t([&] {
    Communicator::RankBinding bind(comm, 0);
    comm.with_lock(w, 0, LockMode::exclusive, [&] {
      CHECK_THROWS_AS(comm.with_lock(w, 1, LockMode::shared, [] {}), ContractError);
    });
    // The steal order (victim shared, then own exclusive after release)
    // stays legal.
    comm.with_lock(w, 1, LockMode::shared, [] {});
    comm.with_lock(w, 0, LockMode::exclusive, [] {});
  });
  t.join();
  CHECK(comm.watchdog_violations() == 1);
}

TEST_SUITE_END();
