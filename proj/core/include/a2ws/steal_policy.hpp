#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "a2ws/info_ring.hpp"

// The smart-stealing math. A rank's steal rate is its signed task deficit
// relative to a speed-weighted fair share of the tasks visible in its radius
// window; positive means the rank should acquire tasks, negative that others
// should take from it. All functions are pure over a snapshot view.

namespace a2ws::policy {

struct RateEntry {
  int rank = 0;
  double n = 0.0;             // tasks owned (executed + queued)
  double runtime = 0.0;       // effective mean task seconds, > 0
  double completed = 0.0;
  // Stealable-task estimate; defaults to n - completed when the caller has
  // no fresher evidence.
  double avail = 0.0;
};

struct RateView {
  std::vector<RateEntry> entries;  // the (i-R .. i+R) window, self included
  int self_rank = 0;
  double elapsed = 0.0;            // wall seconds since run start on self
};

enum class VictimCriterion { closest_rate, in_pair };

struct StealDecision {
  int victim = -1;
  std::int64_t amount = 0;  // >= 1
  VictimCriterion criterion = VictimCriterion::closest_rate;
};

// A rank with no finished task yet is modelled as if its first task takes
// the caller's elapsed wall time.
double effective_runtime(const ProcessInfo& entry, double elapsed);

// S_target over the window: sum(n) / (t_target * sum(1/t)) - n_target.
double steal_rate(const RateView& view, int target_rank);

// Predicted completion time of a rank holding n + s tasks at t seconds each.
double pair_runtime(double n, double t, double s);

// Rounds a fractional steal rate to the integer that minimizes the worse of
// the victim's and the thief's predicted completion times (ties keep the
// floor: fewer tasks moved). Never negative.
std::int64_t round_steal(double s, double thief_n, double thief_t,
                         double victim_n, double victim_t);

// Two-rank steal rate: (n_i + n_j) * t_j / (t_i + t_j) - n_i. Equals
// steal_rate over the pair window.
double pair_rate(double thief_n, double thief_t, double victim_n, double victim_t);

// Probabilistic victim selection. Criterion 1 samples ranks whose rate is
// negative with weight 1 / (1 + |s_self + s_j|), peaking when the two rates
// cancel. When no such candidate survives, criterion 2 samples ranks with a
// positive pair rate, weight proportional to it. Either way the amount is
// capped by the victim's estimated availability minus one, and candidates
// whose amount would drop below 1 are discarded. nullopt when s_self <= 0 or
// both criteria come up empty.
std::optional<StealDecision> select_victim(const RateView& view, double s_self,
                                           std::mt19937_64& rng);

}  // namespace a2ws::policy
