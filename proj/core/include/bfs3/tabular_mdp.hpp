#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "bfs3/types.hpp"

namespace bfs3 {

/// Explicit finite MDP with deterministic per-(s,a) rewards and sparse
/// next-state rows.
///
/// A freshly constructed model has every row set to a self-loop. Terminal
/// states always self-loop with reward 0, whatever rows were set before.
class TabularMDP final : public GenerativeMDP {
 public:
  struct Outcome {
    StateId next;
    double prob;
  };

  TabularMDP(int num_states, int num_actions, double gamma, double r_min, double r_max);

  /// Throws std::invalid_argument unless the row is a distribution over
  /// valid states (sum 1 within 1e-9, entries >= 0) and the reward lies in
  /// [r_min, r_max]. Duplicate next states are merged.
  void set_transition(StateId s, ActionId a, std::vector<Outcome> row, double reward);
  void set_terminal(StateId s);

  int num_states() const { return num_states_; }
  int num_actions() const override { return num_actions_; }
  double discount() const override { return gamma_; }
  ValueBounds value_bounds() const override {
    return intersect(geometric_value_bounds(r_min_, r_max_, gamma_), value_cap_);
  }
  ValueBounds horizon_bounds(int steps) const override {
    return intersect(geometric_horizon_bounds(r_min_, r_max_, gamma_, steps), value_cap_);
  }
  /// Domain knowledge tighter than r / (1 - gamma), e.g. a reward that can
  /// only be collected once. Must hold for every policy.
  void set_value_cap(ValueBounds cap) { value_cap_ = cap; }
  ValueBounds value_cap() const { return value_cap_; }
  bool is_terminal(const StateId& s) const override { return terminal_[static_cast<std::size_t>(s)]; }
  TransitionSample sample(const StateId& s, ActionId a, Rng& rng) const override;

  double r_min() const { return r_min_; }
  double r_max() const { return r_max_; }
  double reward(StateId s, ActionId a) const { return reward_[index(s, a)]; }
  std::span<const Outcome> row(StateId s, ActionId a) const { return rows_[index(s, a)]; }
  double probability(StateId s, ActionId a, StateId next) const;

  bool operator==(const TabularMDP& other) const;

 private:
  std::size_t index(StateId s, ActionId a) const {
    return static_cast<std::size_t>(s) * static_cast<std::size_t>(num_actions_) + static_cast<std::size_t>(a);
  }
  void check_state(StateId s) const;
  void check_action(ActionId a) const;
  void set_row_unchecked(std::size_t idx, std::vector<Outcome> row, double reward);

  int num_states_;
  int num_actions_;
  double gamma_;
  double r_min_;
  double r_max_;
  ValueBounds value_cap_ = kUnbounded;
  std::vector<std::vector<Outcome>> rows_;
  std::vector<std::vector<double>> cumulative_;
  std::vector<double> reward_;
  std::vector<bool> terminal_;
};

struct ValueTable {
  int num_actions = 0;
  std::vector<double> V;
  std::vector<double> Q;  // row-major [s * num_actions + a]

  double q(StateId s, ActionId a) const {
    return Q[static_cast<std::size_t>(s) * static_cast<std::size_t>(num_actions) + static_cast<std::size_t>(a)];
  }
};

using Policy = std::vector<ActionId>;

/// R(s,a) + gamma * sum_s' T(s,a)(s') V(s').
double bellman_q(const TabularMDP& mdp, std::span<const double> V, StateId s, ActionId a);

/// Bellman optimality iteration; stops once a sweep moves V by less than
/// epsilon * (1 - gamma) / gamma in max-norm. Rejects gamma >= 1 and
/// epsilon <= 0.
ValueTable value_iteration(const TabularMDP& mdp, double epsilon);

/// Lowest-index maximizer of bellman_q at every state.
Policy greedy_policy(const TabularMDP& mdp, std::span<const double> V);

/// Exact value of a stationary policy, by solving (I - gamma P) V = R.
/// Intended for small models (dense O(S^3) elimination).
std::vector<double> evaluate_policy(const TabularMDP& mdp, const Policy& policy);

/// Random instance: every (s,a) row has `sparsity` distinct successors with
/// Dirichlet(1) probabilities; rewards uniform in [0, 1); no terminals.
TabularMDP random_tabular_mdp(int num_states, int num_actions, std::uint64_t seed, int sparsity,
                              double gamma = 0.8);

/// Text format:
///   S A gamma r_min r_max
///   s a r t0 p0 t1 p1 ...      (one line per (s,a))
///   terminal s0 s1 ...         (optional)
void write_tabular_mdp(std::ostream& out, const TabularMDP& mdp);
TabularMDP read_tabular_mdp(std::istream& in);

}  // namespace bfs3
