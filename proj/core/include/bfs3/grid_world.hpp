#pragma once

#include "bfs3/tabular_mdp.hpp"

namespace bfs3 {

enum GridAction : ActionId { kNorth = 0, kEast = 1, kSouth = 2, kWest = 3 };

/// Slippery grid: start at (0,0), terminal goal at (width-1, height-1).
/// Every step costs `step_reward`; the intended move happens with
/// probability 1 - slip, each perpendicular move with slip / 2. Moves off
/// the grid leave the agent in place.
struct GridWorldConfig {
  int width = 5;
  int height = 5;
  double slip = 0.2;
  double step_reward = -1.0;
  double gamma = 0.95;
};

inline StateId grid_state(int x, int y, int width) { return y * width + x; }

TabularMDP make_grid_world(const GridWorldConfig& config = {});

/// Shortcut for a one-off step of the grid dynamics.
inline TransitionSample grid_step(const TabularMDP& grid, StateId s, ActionId a, Rng& rng) {
  return grid.sample(s, a, rng);
}

/// Deterministic chain of `length` states: action 0 advances, action 1
/// returns to the start. Reaching the last state pays 1 and ends the
/// episode. Only the one correct combination is rewarded, so shallow search
/// cannot tell the actions apart.
TabularMDP make_lock(int length, double gamma = 0.95);

}  // namespace bfs3
