#include "bfs3/agents.hpp"

#include <stdexcept>

namespace bfs3 {
namespace {

constexpr double kPlanningEpsilon = 1e-6;

}  // namespace

Bfs3Agent::Bfs3Agent(std::shared_ptr<const BeliefMDP> mdp, FsssParams params)
    : mdp_(std::move(mdp)), planner_(*mdp_, params), belief_(mdp_->initial_belief(0)) {}

void Bfs3Agent::begin_episode(const StateId& start) { belief_.real_state = start; }

ActionId Bfs3Agent::act(const StateId& s, Rng& rng) {
  belief_.real_state = s;
  last_full_ = planner_.decide(belief_, rng);
  last_ = {last_full_.queries, last_full_.cache_hit};
  return last_full_.action;
}

void Bfs3Agent::observe(const StateId& s, ActionId a, const StateId& next, double r) {
  belief_.real_state = s;
  belief_ = mdp_->advance(belief_, a, next, r);
  belief_.stats = belief_.stats.flattened();
}

RmaxAgent::RmaxAgent(int num_states, int num_actions, double gamma, double r_max, int M, std::vector<bool> terminal)
    : S_(num_states),
      A_(num_actions),
      gamma_(gamma),
      r_max_(r_max),
      M_(M),
      terminal_(std::move(terminal)),
      counts_(static_cast<std::size_t>(num_states) * static_cast<std::size_t>(num_actions), 0),
      reward_sums_(counts_.size(), 0.0),
      next_counts_(counts_.size()) {
  if (M < 1) throw std::invalid_argument("RmaxAgent: M must be >= 1");
  if (terminal_.size() != static_cast<std::size_t>(num_states)) {
    throw std::invalid_argument("RmaxAgent: terminal mask size mismatch");
  }
}

TabularMDP RmaxAgent::optimistic_model() const {
  const StateId heaven = S_;
  double lo = std::min(0.0, r_max_);
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    if (counts_[i] > 0) lo = std::min(lo, reward_sums_[i] / counts_[i]);
  }
  TabularMDP m(S_ + 1, A_, gamma_, lo, std::max(0.0, r_max_));
  for (ActionId a = 0; a < A_; ++a) m.set_transition(heaven, a, {{heaven, 1.0}}, r_max_);
  for (StateId s = 0; s < S_; ++s) {
    if (terminal_[static_cast<std::size_t>(s)]) {
      m.set_terminal(s);
      continue;
    }
    for (ActionId a = 0; a < A_; ++a) {
      const auto i = index(s, a);
      if (counts_[i] < M_) {
        m.set_transition(s, a, {{heaven, 1.0}}, r_max_);
        continue;
      }
      std::vector<TabularMDP::Outcome> row;
      for (const auto& [next, c] : next_counts_[i]) {
        row.push_back({next, static_cast<double>(c) / counts_[i]});
      }
      m.set_transition(s, a, std::move(row), reward_sums_[i] / counts_[i]);
    }
  }
  return m;
}

void RmaxAgent::replan() {
  const auto m = optimistic_model();
  values_ = value_iteration(m, kPlanningEpsilon);
  policy_ = greedy_policy(m, values_.V);
  dirty_ = false;
}

const ValueTable& RmaxAgent::values() {
  if (dirty_) replan();
  return values_;
}

ActionId RmaxAgent::act(const StateId& s, Rng&) {
  if (dirty_) replan();
  return policy_[static_cast<std::size_t>(s)];
}

void RmaxAgent::observe(const StateId& s, ActionId a, const StateId& next, double r) {
  const auto i = index(s, a);
  if (counts_[i] >= M_) return;  // known pairs keep their frozen estimate
  ++counts_[i];
  ++discoveries_;
  reward_sums_[i] += r;
  ++next_counts_[i][next];
  if (counts_[i] == M_) dirty_ = true;
}

BebAgent::BebAgent(int num_states, int num_actions, double gamma, const RewardModel& rewards, double beta,
                   std::vector<bool> terminal)
    : S_(num_states),
      A_(num_actions),
      gamma_(gamma),
      beta_(beta),
      terminal_(std::move(terminal)),
      counts_(static_cast<std::size_t>(num_states) * static_cast<std::size_t>(num_actions), 0),
      next_counts_(counts_.size()) {
  const auto* known = std::get_if<KnownRewards>(&rewards);
  if (known == nullptr) throw std::invalid_argument("BebAgent: requires a known reward function");
  if (beta < 0.0) throw std::invalid_argument("BebAgent: beta must be >= 0");
  if (terminal_.size() != static_cast<std::size_t>(num_states)) {
    throw std::invalid_argument("BebAgent: terminal mask size mismatch");
  }
  rewards_ = *known;
}

TabularMDP BebAgent::bonus_model() const {
  double lo = 0.0;
  double hi = 0.0;
  for (StateId s = 0; s < S_; ++s) {
    for (ActionId a = 0; a < A_; ++a) {
      const double r = beb_bonus_reward(rewards_(s, a), counts_[index(s, a)], beta_);
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
  }
  TabularMDP m(S_, A_, gamma_, lo, hi);
  for (StateId s = 0; s < S_; ++s) {
    if (terminal_[static_cast<std::size_t>(s)]) {
      m.set_terminal(s);
      continue;
    }
    for (ActionId a = 0; a < A_; ++a) {
      const auto i = index(s, a);
      const double r = beb_bonus_reward(rewards_(s, a), counts_[i], beta_);
      if (counts_[i] == 0) {
        m.set_transition(s, a, {{s, 1.0}}, r);
        continue;
      }
      std::vector<TabularMDP::Outcome> row;
      for (const auto& [next, c] : next_counts_[i]) row.push_back({next, static_cast<double>(c) / counts_[i]});
      m.set_transition(s, a, std::move(row), r);
    }
  }
  return m;
}

ActionId BebAgent::act(const StateId& s, Rng&) {
  const auto m = bonus_model();
  const auto values = value_iteration(m, kPlanningEpsilon);
  ActionId best = 0;
  double best_q = 0.0;
  for (ActionId a = 0; a < A_; ++a) {
    const double q = bellman_q(m, values.V, s, a);
    if (a == 0 || q > best_q) {
      best = a;
      best_q = q;
    }
  }
  return best;
}

void BebAgent::observe(const StateId& s, ActionId a, const StateId& next, double) {
  const auto i = index(s, a);
  ++counts_[i];
  ++next_counts_[i][next];
}

}  // namespace bfs3
