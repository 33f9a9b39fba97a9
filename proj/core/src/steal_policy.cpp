#include "a2ws/steal_policy.hpp"

#include <algorithm>
#include <cmath>

#include "a2ws/rng.hpp"

namespace a2ws::policy {

namespace {

const RateEntry* find_entry(const RateView& view, int rank) {
  for (const RateEntry& e : view.entries)
    if (e.rank == rank) return &e;
  return nullptr;
}

// Weighted sample over candidate indices; weights strictly positive.
std::size_t sample_index(const std::vector<double>& weights, std::mt19937_64& rng) {
  double total = 0.0;
  for (double w : weights) total += w;
  double pick = uniform_unit(rng) * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (pick < acc) return i;
  }
  return weights.size() - 1;
}

}  // namespace

double effective_runtime(const ProcessInfo& entry, double elapsed) {
  if (entry.completed >= 1 && entry.runtime_known()) return entry.mean_runtime;
  return elapsed;
}

double steal_rate(const RateView& view, int target_rank) {
  A2WS_CHECK_MSG(!view.entries.empty(), "steal rate needs a non-empty window");
  const RateEntry* target = find_entry(view, target_rank);
  A2WS_CHECK_MSG(target != nullptr, "target rank not in the window");
  double total_tasks = 0.0;
  double total_speed = 0.0;
  for (const RateEntry& e : view.entries) {
    A2WS_CHECK_MSG(e.runtime > 0.0, "effective runtimes must be positive");
    total_tasks += e.n;
    total_speed += 1.0 / e.runtime;
  }
  return total_tasks / (target->runtime * total_speed) - target->n;
}

double pair_runtime(double n, double t, double s) { return (n + s) * t; }

std::int64_t round_steal(double s, double thief_n, double thief_t,
                         double victim_n, double victim_t) {
  if (!(s > 0.0)) return 0;
  double fl = std::floor(s);
  if (fl == s) return static_cast<std::int64_t>(s);
  double ce = std::ceil(s);
  auto worse = [&](double amount) {
    return std::max(pair_runtime(victim_n, victim_t, -amount),
                    pair_runtime(thief_n, thief_t, +amount));
  };
  double chosen = worse(fl) <= worse(ce) ? fl : ce;
  return static_cast<std::int64_t>(std::max(chosen, 0.0));
}

double pair_rate(double thief_n, double thief_t, double victim_n, double victim_t) {
  A2WS_CHECK(thief_t > 0.0 && victim_t > 0.0);
  return (thief_n + victim_n) * victim_t / (victim_t + thief_t) - thief_n;
}

std::optional<StealDecision> select_victim(const RateView& view, double s_self,
                                           std::mt19937_64& rng) {
  if (!(s_self > 0.0)) return std::nullopt;
  const RateEntry* self = find_entry(view, view.self_rank);
  A2WS_CHECK_MSG(self != nullptr, "self rank not in the window");

  auto capped_amount = [&](std::int64_t amount, const RateEntry& victim) {
    // Leave the victim its in-progress share.
    std::int64_t cap = static_cast<std::int64_t>(std::floor(victim.avail)) - 1;
    return std::min(amount, cap);
  };

  struct Candidate {
    int victim;
    std::int64_t amount;
    double weight;
  };
  std::vector<Candidate> candidates;

  // Criterion 1: ranks that should give tasks away (negative rate), weighted
  // towards the rate that cancels ours.
  for (const RateEntry& e : view.entries) {
    if (e.rank == view.self_rank) continue;
    if (!(e.avail > 0.0)) continue;
    double s_j = steal_rate(view, e.rank);
    if (!(s_j < 0.0)) continue;
    std::int64_t amount =
        std::min(round_steal(s_self, self->n, self->runtime, e.n, e.runtime),
                 static_cast<std::int64_t>(std::llround(-s_j)));
    amount = capped_amount(amount, e);
    if (amount < 1) continue;
    candidates.push_back({e.rank, amount, 1.0 / (1.0 + std::abs(s_self + s_j))});
  }
  VictimCriterion criterion = VictimCriterion::closest_rate;

  if (candidates.empty()) {
    // Criterion 2: the window looks balanced but tasks are still available;
    // compare pair by pair.
    criterion = VictimCriterion::in_pair;
    for (const RateEntry& e : view.entries) {
      if (e.rank == view.self_rank) continue;
      if (!(e.avail > 0.0)) continue;
      double p = pair_rate(self->n, self->runtime, e.n, e.runtime);
      if (!(p > 0.0)) continue;
      std::int64_t amount =
          round_steal(p, self->n, self->runtime, e.n, e.runtime);
      amount = capped_amount(amount, e);
      if (amount < 1) continue;
      candidates.push_back({e.rank, amount, p});
    }
  }

  if (candidates.empty()) return std::nullopt;
  std::vector<double> weights;
  weights.reserve(candidates.size());
  for (const Candidate& c : candidates) weights.push_back(c.weight);
  const Candidate& chosen = candidates[sample_index(weights, rng)];
  return StealDecision{chosen.victim, chosen.amount, criterion};
}

}  // namespace a2ws::policy
