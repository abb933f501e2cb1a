#pragma once

#include <vector>

#include "bfs3/tabular_mdp.hpp"

namespace bfs3 {

/// Per-can feature bits.
enum CanFeature : int { kPainted = 1, kPolished = 2, kScratched = 4, kDone = 8 };

/// Per-can actions; the global action for can i is i * kCanActions + action.
enum CanAction : ActionId { kPaint = 0, kPolish = 1, kShortcut = 2, kFinish = 3 };

inline constexpr int kCanStates = 16;
inline constexpr int kCanActions = 4;

/// Cans to paint and polish without a scratch, one action per step:
///   paint     sets painted, clears polished, scratches w.p. paint_scratch
///   polish    on a painted can: sets polished, buffs out scratches
///   shortcut  sets painted and polished; scratched w.p. shortcut_scratch
///   finish    marks a painted, polished, unscratched can done
/// Done cans ignore every action. Each step costs step_reward, except the
/// finish that completes the last can, which pays finish_reward instead.
struct PaintPolishConfig {
  int cans = 1;
  double paint_scratch = 0.2;
  double shortcut_scratch = 0.5;
  double step_reward = -1.0;
  double finish_reward = 10.0;
  double gamma = 0.95;
};

/// Next local states of one can, with probabilities.
std::vector<TabularMDP::Outcome> can_transition(int local, ActionId action, const PaintPolishConfig& config);

inline int can_local_state(StateId s, int can) { return (s >> (4 * can)) & 0xF; }
inline StateId with_can_state(StateId s, int can, int local) {
  return (s & ~(0xF << (4 * can))) | (local << (4 * can));
}

/// Global MDP over 16^cans states; start state 0, terminal when all done.
TabularMDP make_paint_polish(const PaintPolishConfig& config);

/// Throws std::invalid_argument for an action whose can index is out of range.
TransitionSample paintpolish_step(const TabularMDP& world, int cans, StateId s, ActionId a, Rng& rng);

}  // namespace bfs3
