#include <gtest/gtest.h>

#include <memory>

#include "bfs3/belief_mdp.hpp"
#include "bfs3/fsss.hpp"

namespace bfs3 {
namespace {

std::shared_ptr<const BeliefMDP> fdm_belief(const TabularMDP& mdp, int cap) {
  const int S = mdp.num_states();
  auto prior = std::make_shared<const FdmPrior>(S, mdp.num_actions(), FdmPrior::symmetric_alpha(S, 1.0),
                                                KnownRewards::from(mdp), cap);
  return std::make_shared<const BeliefMDP>(prior, DomainSpec::from(mdp));
}

std::shared_ptr<const BeliefMDP> point_mass_belief(const TabularMDP& mdp) {
  return std::make_shared<const BeliefMDP>(std::make_shared<const PointMassPrior>(mdp), DomainSpec::from(mdp));
}

TEST(BeliefMdp, PointMassDeterministicFollowsTruth) {
  TabularMDP mdp(3, 2, 0.9, 0.0, 1.0);
  mdp.set_transition(0, 0, {{1, 1.0}}, 0.1);
  mdp.set_transition(0, 1, {{2, 1.0}}, 0.2);
  mdp.set_transition(1, 0, {{2, 1.0}}, 0.3);
  const auto belief = point_mass_belief(mdp);
  Rng rng(1);
  BeliefState b = belief->initial_belief(0);
  auto t = belief_step(*belief, b, 0, rng);
  EXPECT_EQ(t.next.real_state, 1);
  EXPECT_EQ(t.reward, 0.1);
  t = belief_step(*belief, t.next, 0, rng);
  EXPECT_EQ(t.next.real_state, 2);
  EXPECT_EQ(t.reward, 0.3);
}

TEST(BeliefMdp, FdmEmptyStatsUniformNextState) {
  TabularMDP mdp(4, 1, 0.9, 0.0, 1.0);
  const auto belief = fdm_belief(mdp, 10);
  Rng rng(2);
  constexpr int kDraws = 100000;
  std::vector<int> n(4, 0);
  const BeliefState b = belief->initial_belief(0);
  for (int k = 0; k < kDraws; ++k) ++n[static_cast<std::size_t>(belief_step(*belief, b, 0, rng).next.real_state)];
  for (int x : n) EXPECT_NEAR(x / double(kDraws), 0.25, 0.02);
}

TEST(BeliefMdp, NextStatsAreTheUpdate) {
  const auto mdp = random_tabular_mdp(4, 2, 3, 2);
  const auto belief = fdm_belief(mdp, 3);
  Rng rng(3);
  BeliefState b = belief->initial_belief(0);
  for (int k = 0; k < 40; ++k) {
    const ActionId a = k % 2;
    const auto t = belief_step(*belief, b, a, rng);
    EXPECT_EQ(t.next.stats, belief->prior().updated(b.stats, b.real_state, a, t.next.real_state, t.reward));
    EXPECT_EQ(t.next, belief->advance(b, a, t.next.real_state, t.reward));
    b = t.next;
  }
}

TEST(BeliefMdp, SaturatedPairLeavesBeliefUnchanged) {
  TabularMDP mdp(2, 1, 0.9, 0.0, 1.0);
  mdp.set_transition(0, 0, {{0, 1.0}}, 0.5);
  const auto belief = fdm_belief(mdp, 2);
  BeliefState b = belief->initial_belief(0);
  b = belief->advance(b, 0, 0, 0.5);
  b = belief->advance(b, 0, 0, 0.5);
  EXPECT_EQ(belief->advance(b, 0, 0, 0.5), b);
}

TEST(BeliefMdp, TerminalBeliefIsAbsorbing) {
  TabularMDP mdp(2, 1, 0.9, 0.0, 1.0);
  mdp.set_terminal(1);
  const auto belief = fdm_belief(mdp, 5);
  Rng rng(4);
  const BeliefState b = belief->initial_belief(1);
  const auto t = belief_step(*belief, b, 0, rng);
  EXPECT_EQ(t.next, b);
  EXPECT_EQ(t.reward, 0.0);
}

TEST(BeliefMdp, RejectsMismatchedSpec) {
  TabularMDP small(2, 1, 0.9, 0.0, 1.0);
  TabularMDP big(3, 1, 0.9, 0.0, 1.0);
  EXPECT_THROW(BeliefMDP(std::make_shared<const PointMassPrior>(small), DomainSpec::from(big)),
               std::invalid_argument);
}

TEST(BeliefMdp, FsssOnPointMassMatchesRawMdp) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto mdp = random_tabular_mdp(5, 3, seed, 2, 0.8);
    const auto belief = point_mass_belief(mdp);
    const FsssParams p{4, 30, 2, true};
    Rng r1(seed), r2(seed);
    const auto raw = fsss_estimate<StateId>(0, p, mdp, r1);
    const auto bayes = fsss_estimate<BeliefState>(belief->initial_belief(0), p, *belief, r2);
    EXPECT_EQ(raw.value, bayes.value);
    EXPECT_EQ(raw.tree.query_count(), bayes.tree.query_count());
  }
}

TEST(BeliefMdp, PointMassTrajectoryDistributionMatches) {
  const auto mdp = random_tabular_mdp(4, 2, 11, 3, 0.8);
  const auto belief = point_mass_belief(mdp);
  constexpr int kTrajectories = 10000;
  constexpr int kDepth = 5;
  // Per-step state marginals under a fixed action sequence, separate streams.
  std::vector<std::vector<int>> raw(kDepth, std::vector<int>(4, 0)), bel(kDepth, std::vector<int>(4, 0));
  Rng r1(100), r2(200);
  for (int k = 0; k < kTrajectories; ++k) {
    StateId s = 0;
    BeliefState b = belief->initial_belief(0);
    for (int d = 0; d < kDepth; ++d) {
      const ActionId a = d % 2;
      s = mdp.sample(s, a, r1).next;
      b = belief->sample(b, a, r2).next;
      ++raw[static_cast<std::size_t>(d)][static_cast<std::size_t>(s)];
      ++bel[static_cast<std::size_t>(d)][static_cast<std::size_t>(b.real_state)];
    }
  }
  for (int d = 0; d < kDepth; ++d) {
    double tv = 0.0;
    for (int x = 0; x < 4; ++x) {
      tv += std::abs(raw[static_cast<std::size_t>(d)][static_cast<std::size_t>(x)] -
                     bel[static_cast<std::size_t>(d)][static_cast<std::size_t>(x)]) /
            double(kTrajectories);
    }
    EXPECT_LE(tv / 2, 0.02) << "depth " << d;
  }
}

TEST(BeliefMdp, PosteriorMdpModeMatchesPredictiveMode) {
  TabularMDP mdp(3, 1, 0.9, 0.0, 1.0);
  auto prior = std::make_shared<const FdmPrior>(3, 1, std::vector<double>{0.5, 0.5, 1.0}, KnownRewards::from(mdp), 10);
  const BeliefMDP predictive(prior, DomainSpec::from(mdp), BeliefSampling::kPredictive);
  const BeliefMDP posterior(prior, DomainSpec::from(mdp), BeliefSampling::kPosteriorMdp);
  BeliefState b = predictive.initial_belief(0);
  b = predictive.advance(b, 0, 2, 0.0);
  b = predictive.advance(b, 0, 1, 0.0);
  Rng r1(5), r2(6);
  std::vector<int> n1(3, 0), n2(3, 0);
  constexpr int kDraws = 20000;
  for (int k = 0; k < kDraws; ++k) {
    ++n1[static_cast<std::size_t>(predictive.sample(b, 0, r1).next.real_state)];
    ++n2[static_cast<std::size_t>(posterior.sample(b, 0, r2).next.real_state)];
  }
  for (int x = 0; x < 3; ++x) EXPECT_NEAR(n1[static_cast<std::size_t>(x)] / double(kDraws), n2[static_cast<std::size_t>(x)] / double(kDraws), 0.02);
}

}  // namespace
}  // namespace bfs3
