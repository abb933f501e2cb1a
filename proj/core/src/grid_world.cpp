#include "bfs3/grid_world.hpp"

#include <algorithm>
#include <stdexcept>

namespace bfs3 {
namespace {

constexpr int kDx[4] = {0, 1, 0, -1};
constexpr int kDy[4] = {1, 0, -1, 0};

}  // namespace

TabularMDP make_grid_world(const GridWorldConfig& config) {
  const int W = config.width;
  const int H = config.height;
  if (W < 1 || H < 1 || W * H < 2) throw std::invalid_argument("make_grid_world: grid needs at least two cells");
  if (!(config.slip >= 0.0 && config.slip <= 1.0)) throw std::invalid_argument("make_grid_world: slip outside [0,1]");
  const double r = config.step_reward;
  TabularMDP mdp(W * H, 4, config.gamma, std::min(r, 0.0), std::max(r, 0.0));
  auto move = [&](int x, int y, int dir) {
    const int nx = x + kDx[dir];
    const int ny = y + kDy[dir];
    if (nx < 0 || nx >= W || ny < 0 || ny >= H) return grid_state(x, y, W);
    return grid_state(nx, ny, W);
  };
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      for (ActionId a = 0; a < 4; ++a) {
        mdp.set_transition(grid_state(x, y, W), a,
                           {{move(x, y, a), 1.0 - config.slip},
                            {move(x, y, (a + 1) % 4), config.slip / 2},
                            {move(x, y, (a + 3) % 4), config.slip / 2}},
                           r);
      }
    }
  }
  mdp.set_terminal(grid_state(W - 1, H - 1, W));
  return mdp;
}

TabularMDP make_lock(int length, double gamma) {
  if (length < 2) throw std::invalid_argument("make_lock: length must be >= 2");
  TabularMDP mdp(length, 2, gamma, 0.0, 1.0);
  for (StateId s = 0; s + 1 < length; ++s) {
    mdp.set_transition(s, 0, {{s + 1, 1.0}}, s + 2 == length ? 1.0 : 0.0);
    mdp.set_transition(s, 1, {{0, 1.0}}, 0.0);
  }
  mdp.set_terminal(length - 1);
  return mdp;
}

}  // namespace bfs3
