#pragma once

#include <cstdint>
#include <functional>

#include "bfs3/types.hpp"

namespace bfs3 {

/// 4x4 Wumpus World as an MDP over information states.
///
/// The agent starts in cell 0 (x = 0, y = 0) with one arrow. Hidden layout:
/// each non-start cell holds a pit with probability pit_prob; the Wumpus and
/// the gold sit on distinct non-start cells chosen uniformly. Entering a pit
/// or the live Wumpus's cell kills the agent; entering the gold cell takes
/// the gold and ends the attempt. Breeze is felt next to a pit, stench next
/// to the live Wumpus. Shooting kills the Wumpus if it is anywhere along the
/// line of fire; a miss (or shooting into the wall) ends the attempt.
inline constexpr int kWumpusSide = 4;
inline constexpr int kWumpusCells = kWumpusSide * kWumpusSide;
inline constexpr int kWumpusActions = 8;

enum WumpusAction : ActionId {
  kMoveNorth = 0,
  kMoveEast = 1,
  kMoveSouth = 2,
  kMoveWest = 3,
  kShootNorth = 4,
  kShootEast = 5,
  kShootSouth = 6,
  kShootWest = 7,
};

struct WumpusConfig {
  double pit_prob = 0.2;
  double gold_reward = 1.0;
  double kill_reward = 0.0;
  double death_reward = -1.0;
  double gamma = 0.95;
};

struct WumpusLayout {
  std::uint16_t pits = 0;
  int wumpus = 1;
  int gold = 2;
};

enum class WumpusStatus : std::uint8_t { kActive, kInPit, kEaten, kGold, kMissed };

/// Everything the agent knows: position, visited cells with the percepts
/// felt there, the arrow, and what a shot revealed.
struct WumpusInfo {
  std::uint8_t pos = 0;
  WumpusStatus status = WumpusStatus::kActive;
  bool arrow = true;
  bool wumpus_alive = true;
  std::uint16_t visited = 1;
  std::uint16_t breeze = 0;      // subset of visited
  std::uint16_t stench = 0;      // subset of heard_from
  std::uint16_t heard_from = 1;  // cells visited while the Wumpus lived
  std::uint16_t kill_line = 0;   // line of the fatal shot, if any

  bool terminal() const { return status != WumpusStatus::kActive; }
  bool operator==(const WumpusInfo&) const = default;
  std::uint64_t hash() const;
};

/// Neighbor mask of a cell (4-connected).
std::uint16_t wumpus_neighbors(int cell);
/// Cells strictly beyond `cell` in the firing direction (0..3 = N,E,S,W).
std::uint16_t wumpus_line_of_fire(int cell, int direction);

WumpusLayout sample_wumpus_layout(const WumpusConfig& config, Rng& rng);
/// Information state at the start of an attempt (percepts at cell 0).
WumpusInfo wumpus_reset(const WumpusLayout& layout);
/// Deterministic step given the layout. Throws std::logic_error after the
/// attempt has ended.
Transition<WumpusInfo> wumpus_step(const WumpusInfo& info, const WumpusLayout& layout, ActionId a,
                                   const WumpusConfig& config);
/// True when the layout could have produced everything recorded in `info`.
bool wumpus_consistent(const WumpusInfo& info, const WumpusLayout& layout);
/// Exact posterior draw of a layout given the information state.
WumpusLayout sample_consistent_layout(const WumpusInfo& info, const WumpusConfig& config, Rng& rng);

/// Information-state MDP: a step samples a layout from the posterior and
/// applies the real dynamics to it. Values are bounded by the one-shot
/// rewards, since at most one kill and one terminal payoff can occur.
class WumpusBeliefModel final : public GenerativeModel<WumpusInfo> {
 public:
  explicit WumpusBeliefModel(WumpusConfig config = {}) : config_(config) {}

  Transition<WumpusInfo> sample(const WumpusInfo& s, ActionId a, Rng& rng) const override;
  bool is_terminal(const WumpusInfo& s) const override { return s.terminal(); }
  int num_actions() const override { return kWumpusActions; }
  double discount() const override { return config_.gamma; }
  ValueBounds value_bounds() const override;

  const WumpusConfig& config() const { return config_; }

 private:
  WumpusConfig config_;
};

}  // namespace bfs3

template <>
struct std::hash<bfs3::WumpusInfo> {
  std::size_t operator()(const bfs3::WumpusInfo& s) const noexcept { return static_cast<std::size_t>(s.hash()); }
};
