#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "bfs3/types.hpp"

namespace bfs3 {

/// Capped next-state histograms per (s,a) plus the first reward observed at
/// each pair.
///
/// Values are immutable in spirit: `updated` returns a new statistic. A
/// statistic is a shared, flattened base plus a short sorted list of
/// increments, so the copies made while searching belief space cost a
/// pointer copy and a handful of small vectors. Equality and hashing are on
/// the logical content, independent of how it is split between base and
/// increments.
class SuffStats {
 public:
  SuffStats() : SuffStats(1, 1, 1) {}
  /// `cap` is the knownness limit N: once a pair has N observations, further
  /// transitions from it are forgotten.
  SuffStats(int num_states, int num_actions, int cap);

  int num_states() const { return base_->num_states; }
  int num_actions() const { return base_->num_actions; }
  int cap() const { return base_->cap; }

  int count(StateId s, ActionId a, StateId next) const;
  int total(StateId s, ActionId a) const;
  bool saturated(StateId s, ActionId a) const { return total(s, a) >= cap(); }
  std::optional<double> reward(StateId s, ActionId a) const;
  /// Sorted (next, count) pairs with count > 0.
  std::vector<std::pair<StateId, int>> histogram(StateId s, ActionId a) const;
  /// Number of updates that changed the statistic (sum of all histograms).
  long long discoveries() const { return base_->discoveries + static_cast<long long>(increments_.size()); }

  /// The k-th observed next state of (s,a), k in [0, total(s,a)), in an
  /// unspecified but deterministic order. Used to draw from the empirical
  /// histogram without materializing it.
  StateId observation(StateId s, ActionId a, int k) const;

  /// Pairs with a pinned reward; indexable for Chinese-restaurant draws.
  int pinned_count() const { return static_cast<int>(base_->pinned.size() + pins_.size()); }
  double pinned_value(int k) const;

  /// Applies one observed transition in place. Returns false (and leaves
  /// the statistic untouched) when the pair is already saturated.
  bool update(StateId s, ActionId a, StateId next, double r);
  SuffStats updated(StateId s, ActionId a, StateId next, double r) const {
    SuffStats out = *this;
    out.update(s, a, next, r);
    return out;
  }

  /// Same logical content with every increment folded into a fresh base.
  SuffStats flattened() const;

  std::uint64_t hash() const { return hash_; }
  bool operator==(const SuffStats& other) const;

  /// Nonempty pairs as (s, a) in ascending order.
  std::vector<std::pair<StateId, ActionId>> nonempty_pairs() const;

 private:
  struct PairEntry {
    std::vector<std::pair<StateId, int>> hist;  // sorted by next state
    int total = 0;
    bool has_reward = false;
    double reward = 0.0;
  };
  struct Base {
    int num_states = 1;
    int num_actions = 1;
    int cap = 1;
    std::unordered_map<int, PairEntry> pairs;
    long long discoveries = 0;
    std::vector<double> pinned;  // ascending pair order
  };
  struct Increment {
    int pair;
    StateId next;
    auto operator<=>(const Increment&) const = default;
  };
  struct Pin {
    int pair;
    double reward;
    bool operator==(const Pin& o) const { return pair == o.pair && reward == o.reward; }
  };

  int pair_index(StateId s, ActionId a) const { return s * base_->num_actions + a; }
  const PairEntry* base_entry(int pair) const;
  int count_pair(int pair, StateId next) const;
  int total_pair(int pair) const;
  std::unordered_map<int, PairEntry> materialize() const;

  std::shared_ptr<const Base> base_;
  std::vector<Increment> increments_;  // sorted
  std::vector<Pin> pins_;              // sorted by pair
  std::uint64_t hash_ = 0;
};

/// Text form: header `S A N`, then one line per nonempty pair:
/// `s a r_obs n0 n1 ... n_{S-1}` with r_obs written as `nan` when unset.
void write_suff_stats(std::ostream& out, const SuffStats& stats);
SuffStats read_suff_stats(std::istream& in);

}  // namespace bfs3

template <>
struct std::hash<bfs3::SuffStats> {
  std::size_t operator()(const bfs3::SuffStats& s) const noexcept { return static_cast<std::size_t>(s.hash()); }
};
