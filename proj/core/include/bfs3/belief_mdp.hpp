#pragma once

#include <memory>
#include <vector>

#include "bfs3/priors.hpp"
#include "bfs3/suff_stats.hpp"
#include "bfs3/tabular_mdp.hpp"
#include "bfs3/types.hpp"

namespace bfs3 {

/// A real state paired with the statistic summarizing history so far.
struct BeliefState {
  StateId real_state = 0;
  SuffStats stats;

  bool operator==(const BeliefState& o) const { return real_state == o.real_state && stats == o.stats; }
};

/// What the belief-MDP needs to know about the domain beyond the prior.
struct DomainSpec {
  int num_actions = 1;
  double gamma = 0.95;
  double r_min = 0.0;
  double r_max = 1.0;
  ValueBounds value_cap = kUnbounded;
  std::vector<bool> terminal;  // one entry per real state

  static DomainSpec from(const TabularMDP& mdp);
};

enum class BeliefSampling {
  kPredictive,    // closed-form posterior predictive
  kPosteriorMdp,  // draw a whole MDP from the posterior, step it once, drop it
};

/// The MDP over belief-states induced by a prior: one step samples (s', r)
/// from the posterior given the current statistic and folds it in.
class BeliefMDP final : public GenerativeModel<BeliefState> {
 public:
  /// Throws std::invalid_argument when the spec and prior disagree on sizes.
  BeliefMDP(std::shared_ptr<const ModelPrior> prior, DomainSpec spec,
            BeliefSampling mode = BeliefSampling::kPredictive);

  Transition<BeliefState> sample(const BeliefState& b, ActionId a, Rng& rng) const override;
  bool is_terminal(const BeliefState& b) const override { return is_terminal_state(b.real_state); }
  int num_actions() const override { return spec_.num_actions; }
  double discount() const override { return spec_.gamma; }
  ValueBounds value_bounds() const override {
    return intersect(geometric_value_bounds(spec_.r_min, spec_.r_max, spec_.gamma), spec_.value_cap);
  }
  ValueBounds horizon_bounds(int steps) const override {
    return intersect(geometric_horizon_bounds(spec_.r_min, spec_.r_max, spec_.gamma, steps), spec_.value_cap);
  }

  bool is_terminal_state(StateId s) const { return spec_.terminal[static_cast<std::size_t>(s)]; }
  BeliefState initial_belief(StateId s) const { return {s, prior_->empty_stats()}; }
  /// The belief after really observing (s, a, s', r).
  BeliefState advance(const BeliefState& b, ActionId a, StateId next, double r) const;

  const ModelPrior& prior() const { return *prior_; }
  const DomainSpec& spec() const { return spec_; }

 private:
  std::shared_ptr<const ModelPrior> prior_;
  DomainSpec spec_;
  BeliefSampling mode_;
};

/// One belief transition; a terminal belief is returned unchanged with r = 0.
inline Transition<BeliefState> belief_step(const BeliefMDP& mdp, const BeliefState& b, ActionId a, Rng& rng) {
  return mdp.sample(b, a, rng);
}

inline BeliefMDP make_belief_mdp(std::shared_ptr<const ModelPrior> prior, DomainSpec spec,
                                 BeliefSampling mode = BeliefSampling::kPredictive) {
  return BeliefMDP(std::move(prior), std::move(spec), mode);
}

}  // namespace bfs3

template <>
struct std::hash<bfs3::BeliefState> {
  std::size_t operator()(const bfs3::BeliefState& b) const noexcept {
    return static_cast<std::size_t>(bfs3::hash_combine(b.stats.hash(), static_cast<std::uint64_t>(b.real_state)));
  }
};
