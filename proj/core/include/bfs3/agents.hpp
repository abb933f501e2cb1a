#pragma once

#include <memory>
#include <optional>
#include <unordered_map>
#include <vector>

#include "bfs3/belief_mdp.hpp"
#include "bfs3/fsss.hpp"
#include "bfs3/priors.hpp"
#include "bfs3/tabular_mdp.hpp"
#include "bfs3/types.hpp"

namespace bfs3 {

/// Per-decision instrumentation.
struct DecisionInfo {
  long long queries = 0;
  bool cache_hit = false;
};

/// An agent acting on observations of type Obs.
template <class Obs>
class Agent {
 public:
  virtual ~Agent() = default;

  virtual void begin_episode(const Obs& /*start*/) {}
  virtual ActionId act(const Obs& s, Rng& rng) = 0;
  virtual void observe(const Obs& s, ActionId a, const Obs& next, double r) = 0;

  virtual DecisionInfo last_decision() const { return {}; }
  /// Cumulative number of observations that changed what the agent knows.
  virtual long long discoveries() const { return 0; }
};

using TabularAgent = Agent<StateId>;

/// Algorithm 3: for each action, C sampled successors, each valued by a
/// fresh FSSS search; the argmax is memoized per state forever.
template <class State, class Hash = std::hash<State>>
class Bfs3Planner {
 public:
  struct Decision {
    ActionId action = 0;
    long long queries = 0;
    bool cache_hit = false;
    std::vector<double> q_upper;  // empty on cache hits
    std::vector<double> q_lower;
  };

  Bfs3Planner(const GenerativeModel<State>& model, FsssParams params) : model_(&model), params_(params) {
    params_.validate();
  }

  Decision decide(const State& s, Rng& rng) {
    Decision d;
    if (auto it = solved_.find(s); it != solved_.end()) {
      d.action = it->second;
      d.cache_hit = true;
      ++cache_hits_;
      return d;
    }
    const int A = model_->num_actions();
    const int C = params_.samples;
    const double gamma = model_->discount();
    d.q_upper.assign(static_cast<std::size_t>(A), 0.0);
    d.q_lower.assign(static_cast<std::size_t>(A), 0.0);
    for (ActionId a = 0; a < A; ++a) {
      for (int c = 0; c < C; ++c) {
        auto [next, r] = model_->sample(s, a, rng);
        ++d.queries;
        // Each child search draws from its own stream so the outer samples
        // do not depend on how many rollouts the inner searches used.
        Rng sub(rng());
        Fsss<State, Hash> search(*model_, params_, next);
        search.run(sub);
        d.queries += search.tree().query_count();
        const auto* root = search.tree().root();
        const double hi = root->terminal ? 0.0 : root->upper;
        const double lo = root->terminal ? 0.0 : root->lower;
        d.q_upper[static_cast<std::size_t>(a)] += (r + gamma * hi) / C;
        d.q_lower[static_cast<std::size_t>(a)] += (r + gamma * lo) / C;
      }
    }
    // argmax of the upper estimate; ties go to the better lower estimate,
    // then to the lowest index.
    for (ActionId a = 1; a < A; ++a) {
      const auto i = static_cast<std::size_t>(a);
      const auto b = static_cast<std::size_t>(d.action);
      if (d.q_upper[i] > d.q_upper[b] || (d.q_upper[i] == d.q_upper[b] && d.q_lower[i] > d.q_lower[b])) {
        d.action = a;
      }
    }
    solved_.emplace(s, d.action);
    queries_ += d.queries;
    ++fresh_decisions_;
    return d;
  }

  /// Oracle queries allowed per fresh decision: t * d * A^2 * C^2.
  long long decision_budget() const {
    const long long AC = static_cast<long long>(model_->num_actions()) * params_.samples;
    return static_cast<long long>(params_.trajectories) * params_.depth * AC * AC;
  }

  const FsssParams& params() const { return params_; }
  std::size_t cache_size() const { return solved_.size(); }
  long long total_queries() const { return queries_; }
  long long fresh_decisions() const { return fresh_decisions_; }
  long long cache_hits() const { return cache_hits_; }
  std::optional<ActionId> cached(const State& s) const {
    auto it = solved_.find(s);
    if (it == solved_.end()) return std::nullopt;
    return it->second;
  }

 private:
  const GenerativeModel<State>* model_;
  FsssParams params_;
  std::unordered_map<State, ActionId, Hash> solved_;
  long long queries_ = 0;
  long long fresh_decisions_ = 0;
  long long cache_hits_ = 0;
};

/// BFS3 on a tabular domain: plans in the belief-MDP of a prior and carries
/// the real history forward through observe.
class Bfs3Agent final : public TabularAgent {
 public:
  Bfs3Agent(std::shared_ptr<const BeliefMDP> mdp, FsssParams params);

  void begin_episode(const StateId& start) override;
  ActionId act(const StateId& s, Rng& rng) override;
  void observe(const StateId& s, ActionId a, const StateId& next, double r) override;
  DecisionInfo last_decision() const override { return last_; }
  long long discoveries() const override { return belief_.stats.discoveries(); }

  const BeliefState& belief() const { return belief_; }
  const Bfs3Planner<BeliefState>& planner() const { return planner_; }
  const Bfs3Planner<BeliefState>::Decision& last_full_decision() const { return last_full_; }

 private:
  std::shared_ptr<const BeliefMDP> mdp_;
  Bfs3Planner<BeliefState> planner_;
  BeliefState belief_;
  DecisionInfo last_;
  Bfs3Planner<BeliefState>::Decision last_full_;
};

/// Optimistic model-based learner: pairs seen fewer than M times lead to an
/// absorbing state worth V_max.
class RmaxAgent final : public TabularAgent {
 public:
  RmaxAgent(int num_states, int num_actions, double gamma, double r_max, int M, std::vector<bool> terminal);

  ActionId act(const StateId& s, Rng& rng) override;
  void observe(const StateId& s, ActionId a, const StateId& next, double r) override;
  long long discoveries() const override { return discoveries_; }

  int count(StateId s, ActionId a) const { return counts_[index(s, a)]; }
  bool known(StateId s, ActionId a) const { return count(s, a) >= M_; }
  /// The optimistic model planned in (state S is the absorbing V_max state).
  TabularMDP optimistic_model() const;
  const ValueTable& values();

 private:
  std::size_t index(StateId s, ActionId a) const {
    return static_cast<std::size_t>(s) * static_cast<std::size_t>(A_) + static_cast<std::size_t>(a);
  }
  void replan();

  int S_;
  int A_;
  double gamma_;
  double r_max_;
  int M_;
  std::vector<bool> terminal_;
  std::vector<int> counts_;
  std::vector<double> reward_sums_;
  std::vector<std::unordered_map<StateId, int>> next_counts_;
  long long discoveries_ = 0;
  bool dirty_ = true;
  ValueTable values_;
  Policy policy_;
};

/// R(s,a) + beta / (1 + n(s,a)).
inline double beb_bonus_reward(double R, int n, double beta) { return R + beta / (1.0 + static_cast<double>(n)); }

/// Bayesian Exploration Bonus: greedy on the maximum-likelihood model with a
/// count bonus added to the known rewards. Unvisited pairs self-loop.
class BebAgent final : public TabularAgent {
 public:
  /// Throws std::invalid_argument for an unknown-reward configuration.
  BebAgent(int num_states, int num_actions, double gamma, const RewardModel& rewards, double beta,
           std::vector<bool> terminal);

  ActionId act(const StateId& s, Rng& rng) override;
  void observe(const StateId& s, ActionId a, const StateId& next, double r) override;

  int visits(StateId s, ActionId a) const { return counts_[index(s, a)]; }
  TabularMDP bonus_model() const;

 private:
  std::size_t index(StateId s, ActionId a) const {
    return static_cast<std::size_t>(s) * static_cast<std::size_t>(A_) + static_cast<std::size_t>(a);
  }

  int S_;
  int A_;
  double gamma_;
  KnownRewards rewards_;
  double beta_;
  std::vector<bool> terminal_;
  std::vector<int> counts_;
  std::vector<std::unordered_map<StateId, int>> next_counts_;
};

template <class Obs>
class RandomAgent final : public Agent<Obs> {
 public:
  explicit RandomAgent(int num_actions) : num_actions_(num_actions) {}
  ActionId act(const Obs&, Rng& rng) override {
    return std::uniform_int_distribution<ActionId>(0, num_actions_ - 1)(rng);
  }
  void observe(const Obs&, ActionId, const Obs&, double) override {}

 private:
  int num_actions_;
};

}  // namespace bfs3
