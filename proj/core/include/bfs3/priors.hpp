#pragma once

#include <memory>
#include <variant>
#include <vector>

#include "bfs3/suff_stats.hpp"
#include "bfs3/tabular_mdp.hpp"
#include "bfs3/types.hpp"

namespace bfs3 {

/// Rewards fixed to the domain's true R(s,a).
struct KnownRewards {
  int num_actions = 1;
  std::vector<double> table;  // [s * num_actions + a]

  static KnownRewards from(const TabularMDP& mdp);
  double operator()(StateId s, ActionId a) const {
    return table[static_cast<std::size_t>(s) * static_cast<std::size_t>(num_actions) + static_cast<std::size_t>(a)];
  }
};

/// R(s,a) ~ DP(alpha, Unif(r_min, r_max)): deterministic per pair once
/// seen, with one restaurant shared by every pair (each pinned pair holds
/// one seat).
struct DpRewardPrior {
  double alpha = 1.0;
  double r_min = 0.0;
  double r_max = 1.0;
};

using RewardModel = std::variant<KnownRewards, DpRewardPrior>;

/// Closed-form CRP predictive for an unpinned pair: atoms are the distinct
/// pinned values with probability n_v / (n + alpha); `fresh` is the mass
/// alpha / (n + alpha) of a new Unif(r_min, r_max) draw. A pinned pair
/// returns a single atom with probability 1.
struct DpPredictive {
  std::vector<std::pair<double, double>> atoms;  // (value, probability), ascending value
  double fresh = 0.0;
};

double dp_reward_sample(StateId s, ActionId a, const SuffStats& stats, const DpRewardPrior& prior, Rng& rng);
DpPredictive dp_reward_predictive(StateId s, ActionId a, const SuffStats& stats, const DpRewardPrior& prior);

/// Posterior-sampling interface over a sufficient statistic.
class ModelPrior {
 public:
  virtual ~ModelPrior() = default;

  virtual int num_states() const = 0;
  virtual int num_actions() const = 0;
  virtual SuffStats empty_stats() const = 0;

  /// One (s', r) from the posterior predictive: M ~ prior | stats, then a
  /// step of M, with M marginalized out.
  virtual TransitionSample predictive_sample(StateId s, ActionId a, const SuffStats& stats, Rng& rng) const = 0;
  /// A whole MDP drawn from the posterior.
  virtual TabularMDP sample_mdp(const SuffStats& stats, Rng& rng) const = 0;
  /// Folds one observed transition into `stats`; false when nothing changed.
  virtual bool update(SuffStats& stats, StateId s, ActionId a, StateId next, double r) const = 0;

  SuffStats updated(const SuffStats& stats, StateId s, ActionId a, StateId next, double r) const {
    SuffStats out = stats;
    update(out, s, a, next, r);
    return out;
  }
};

/// Draws from Dirichlet(alpha) via normalized Gamma variates (computed in
/// log space so tiny concentrations do not underflow).
std::vector<double> sample_dirichlet(const std::vector<double>& alpha, Rng& rng);

/// Flat-Dirichlet-Multinomial: theta_{s,a} ~ Dir(alpha) independently per pair.
class FdmPrior final : public ModelPrior {
 public:
  /// `terminal` (may be empty) marks known terminal states of sampled MDPs.
  FdmPrior(int num_states, int num_actions, std::vector<double> alpha, RewardModel rewards, int cap,
           std::vector<bool> terminal = {}, double gamma = 0.95);

  static std::vector<double> symmetric_alpha(int num_states, double per_state) {
    return std::vector<double>(static_cast<std::size_t>(num_states), per_state);
  }

  int num_states() const override { return num_states_; }
  int num_actions() const override { return num_actions_; }
  SuffStats empty_stats() const override { return SuffStats(num_states_, num_actions_, cap_); }
  TransitionSample predictive_sample(StateId s, ActionId a, const SuffStats& stats, Rng& rng) const override;
  TabularMDP sample_mdp(const SuffStats& stats, Rng& rng) const override;
  bool update(SuffStats& stats, StateId s, ActionId a, StateId next, double r) const override;

  /// Next state only, from (C(s') + alpha_s') / sum_x (C(x) + alpha_x).
  StateId sample_next_state(StateId s, ActionId a, const SuffStats& stats, Rng& rng) const;
  double sample_reward(StateId s, ActionId a, const SuffStats& stats, Rng& rng) const;

  const std::vector<double>& alpha() const { return alpha_; }
  double alpha_sum() const { return alpha_sum_; }
  const RewardModel& rewards() const { return rewards_; }

 private:
  int num_states_;
  int num_actions_;
  std::vector<double> alpha_;
  std::vector<double> alpha_cumulative_;
  double alpha_sum_ = 0.0;
  bool symmetric_ = false;
  RewardModel rewards_;
  int cap_;
  std::vector<bool> terminal_;
  double gamma_;
};

/// (C_{s,a}(s') + alpha_s') / sum_x (C_{s,a}(x) + alpha_x).
double fdm_predictive_prob(StateId s, ActionId a, StateId next, const SuffStats& stats, const FdmPrior& prior);

/// Dirichlet(alpha + counts) draw for every (s,a); rewards from the prior's
/// reward model.
inline TabularMDP fdm_sample_mdp(const SuffStats& stats, const FdmPrior& prior, Rng& rng) {
  return prior.sample_mdp(stats, rng);
}

/// Identical independent objects sharing one FDM posterior over their local
/// dynamics.
///
/// Global states pack `num_objects` local states base `local_states`
/// (object 0 least significant). Actions encode (target object, object
/// action) as object * local_actions + object_action. An action changes only
/// its target's local state; rewards are known.
class FactoredObjectPrior final : public ModelPrior {
 public:
  FactoredObjectPrior(int num_objects, int local_states, int local_actions, std::vector<double> alpha,
                      KnownRewards rewards, int cap, std::vector<bool> terminal = {}, double gamma = 0.95);

  int num_objects() const { return num_objects_; }
  int local_states() const { return local_.num_states(); }
  int local_actions() const { return local_.num_actions(); }

  int num_states() const override { return num_states_; }
  int num_actions() const override { return num_objects_ * local_.num_actions(); }
  /// The shared statistic lives in the local (object) space.
  SuffStats empty_stats() const override { return local_.empty_stats(); }
  TransitionSample predictive_sample(StateId s, ActionId a, const SuffStats& stats, Rng& rng) const override;
  TabularMDP sample_mdp(const SuffStats& stats, Rng& rng) const override;
  bool update(SuffStats& stats, StateId s, ActionId a, StateId next, double r) const override;

  struct DecodedAction {
    int object;
    ActionId object_action;
  };
  /// Throws std::invalid_argument for actions outside the encoding.
  DecodedAction decode_action(ActionId a) const;
  StateId local_state(StateId global, int object) const;
  StateId with_local(StateId global, int object, StateId local) const;

 private:
  int num_objects_;
  int num_states_;
  FdmPrior local_;
  KnownRewards rewards_;
  std::vector<bool> terminal_;
  double gamma_;
};

/// The true model, whatever the statistic says. Updates never change the
/// belief, which makes the belief-MDP over it the wrapped MDP itself.
class PointMassPrior final : public ModelPrior {
 public:
  explicit PointMassPrior(TabularMDP mdp) : mdp_(std::move(mdp)) {}

  int num_states() const override { return mdp_.num_states(); }
  int num_actions() const override { return mdp_.num_actions(); }
  SuffStats empty_stats() const override { return SuffStats(mdp_.num_states(), mdp_.num_actions(), 1); }
  TransitionSample predictive_sample(StateId s, ActionId a, const SuffStats&, Rng& rng) const override {
    return mdp_.sample(s, a, rng);
  }
  TabularMDP sample_mdp(const SuffStats&, Rng&) const override { return mdp_; }
  bool update(SuffStats&, StateId, ActionId, StateId, double) const override { return false; }

  const TabularMDP& mdp() const { return mdp_; }

 private:
  TabularMDP mdp_;
};

}  // namespace bfs3
