#include "bfs3/belief_mdp.hpp"

#include <stdexcept>

namespace bfs3 {

DomainSpec DomainSpec::from(const TabularMDP& mdp) {
  DomainSpec spec;
  spec.num_actions = mdp.num_actions();
  spec.gamma = mdp.discount();
  spec.r_min = mdp.r_min();
  spec.r_max = mdp.r_max();
  spec.value_cap = mdp.value_cap();
  spec.terminal.resize(static_cast<std::size_t>(mdp.num_states()));
  for (StateId s = 0; s < mdp.num_states(); ++s) spec.terminal[static_cast<std::size_t>(s)] = mdp.is_terminal(s);
  return spec;
}

BeliefMDP::BeliefMDP(std::shared_ptr<const ModelPrior> prior, DomainSpec spec, BeliefSampling mode)
    : prior_(std::move(prior)), spec_(std::move(spec)), mode_(mode) {
  if (!prior_) throw std::invalid_argument("BeliefMDP: null prior");
  if (spec_.num_actions != prior_->num_actions()) {
    throw std::invalid_argument("BeliefMDP: action count differs from the prior's");
  }
  if (spec_.terminal.size() != static_cast<std::size_t>(prior_->num_states())) {
    throw std::invalid_argument("BeliefMDP: terminal mask size differs from the prior's state count");
  }
  if (!(spec_.gamma >= 0.0 && spec_.gamma < 1.0) || !(spec_.r_min <= spec_.r_max)) {
    throw std::invalid_argument("BeliefMDP: bad discount or reward bounds");
  }
}

Transition<BeliefState> BeliefMDP::sample(const BeliefState& b, ActionId a, Rng& rng) const {
  if (is_terminal(b)) return {b, 0.0};
  TransitionSample step;
  if (mode_ == BeliefSampling::kPredictive) {
    step = prior_->predictive_sample(b.real_state, a, b.stats, rng);
  } else {
    step = prior_->sample_mdp(b.stats, rng).sample(b.real_state, a, rng);
  }
  return {advance(b, a, step.next, step.reward), step.reward};
}

BeliefState BeliefMDP::advance(const BeliefState& b, ActionId a, StateId next, double r) const {
  BeliefState out{next, b.stats};
  prior_->update(out.stats, b.real_state, a, next, r);
  return out;
}

}  // namespace bfs3
