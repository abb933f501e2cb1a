#include "bfs3/paint_polish.hpp"

#include <algorithm>
#include <stdexcept>

namespace bfs3 {

std::vector<TabularMDP::Outcome> can_transition(int local, ActionId action, const PaintPolishConfig& config) {
  if (local & kDone) return {{local, 1.0}};
  const bool painted = local & kPainted;
  const bool polished = local & kPolished;
  const bool scratched = local & kScratched;
  switch (action) {
    case kPaint: {
      const int base = (local | kPainted) & ~kPolished;
      if (scratched || config.paint_scratch <= 0.0) return {{base, 1.0}};
      return {{base, 1.0 - config.paint_scratch}, {base | kScratched, config.paint_scratch}};
    }
    case kPolish:
      if (!painted) return {{local, 1.0}};
      return {{(local | kPolished) & ~kScratched, 1.0}};
    case kShortcut: {
      const int base = (local | kPainted | kPolished) & ~kScratched;
      return {{base, 1.0 - config.shortcut_scratch}, {base | kScratched, config.shortcut_scratch}};
    }
    case kFinish:
      if (painted && polished && !scratched) return {{local | kDone, 1.0}};
      return {{local, 1.0}};
    default:
      throw std::invalid_argument("can_transition: unknown can action");
  }
}

TabularMDP make_paint_polish(const PaintPolishConfig& config) {
  if (config.cans < 1 || config.cans > 7) throw std::invalid_argument("make_paint_polish: cans must be in [1, 7]");
  const int n = config.cans;
  const int S = 1 << (4 * n);
  const int A = n * kCanActions;
  const double lo = std::min({config.step_reward, config.finish_reward, 0.0});
  const double hi = std::max({config.step_reward, config.finish_reward, 0.0});
  TabularMDP mdp(S, A, config.gamma, lo, hi);
  auto all_done = [n](StateId s) {
    for (int i = 0; i < n; ++i) {
      if (!(can_local_state(s, i) & kDone)) return false;
    }
    return true;
  };
  for (StateId s = 0; s < S; ++s) {
    if (all_done(s)) continue;
    for (ActionId a = 0; a < A; ++a) {
      const int can = a / kCanActions;
      const ActionId ca = a % kCanActions;
      std::vector<TabularMDP::Outcome> row;
      for (const auto& o : can_transition(can_local_state(s, can), ca, config)) {
        row.push_back({with_can_state(s, can, o.next), o.prob});
      }
      // Finishing is deterministic, so "this finish completes the job" is a
      // function of (s, a) alone.
      const bool completes = ca == kFinish && all_done(row.front().next);
      mdp.set_transition(s, a, std::move(row), completes ? config.finish_reward : config.step_reward);
    }
  }
  for (StateId s = 0; s < S; ++s) {
    if (all_done(s)) mdp.set_terminal(s);
  }
  // The finish reward ends the episode, so it is collected at most once.
  const double g = 1.0 / (1.0 - config.gamma);
  mdp.set_value_cap({std::min(config.step_reward, 0.0) * g + std::min(config.finish_reward, 0.0),
                     std::max(config.step_reward, 0.0) * g + std::max(config.finish_reward, 0.0)});
  return mdp;
}

TransitionSample paintpolish_step(const TabularMDP& world, int cans, StateId s, ActionId a, Rng& rng) {
  if (a < 0 || a / kCanActions >= cans) throw std::invalid_argument("paintpolish_step: can index out of range");
  return world.sample(s, a, rng);
}

}  // namespace bfs3
