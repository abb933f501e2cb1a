#include "bfs3/wumpus.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace bfs3 {
namespace {

constexpr std::uint16_t kAllCells = 0xFFFF;
constexpr std::uint16_t kStartCell = 1;
constexpr int kDx[4] = {0, 1, 0, -1};
constexpr int kDy[4] = {1, 0, -1, 0};

constexpr std::uint16_t bit(int cell) { return static_cast<std::uint16_t>(1u << cell); }

int neighbor(int cell, int dir) {
  const int x = cell % kWumpusSide + kDx[dir];
  const int y = cell / kWumpusSide + kDy[dir];
  if (x < 0 || x >= kWumpusSide || y < 0 || y >= kWumpusSide) return -1;
  return y * kWumpusSide + x;
}

const std::array<std::uint16_t, kWumpusCells>& neighbor_table() {
  static const auto table = [] {
    std::array<std::uint16_t, kWumpusCells> t{};
    for (int c = 0; c < kWumpusCells; ++c) {
      for (int d = 0; d < 4; ++d) {
        if (const int n = neighbor(c, d); n >= 0) t[static_cast<std::size_t>(c)] |= bit(n);
      }
    }
    return t;
  }();
  return table;
}

bool breeze_ok(std::uint16_t pits, const WumpusInfo& info) {
  const auto& nb = neighbor_table();
  for (std::uint16_t v = info.visited; v != 0; v &= static_cast<std::uint16_t>(v - 1)) {
    const int c = std::countr_zero(v);
    const bool felt = info.breeze & bit(c);
    if (felt != ((pits & nb[static_cast<std::size_t>(c)]) != 0)) return false;
  }
  return true;
}

bool wumpus_ok(int w, const WumpusInfo& info) {
  if (w == 0 || (info.heard_from & bit(w))) return false;
  if (!info.wumpus_alive && !(info.kill_line & bit(w))) return false;
  const auto& nb = neighbor_table();
  for (std::uint16_t v = info.heard_from; v != 0; v &= static_cast<std::uint16_t>(v - 1)) {
    const int c = std::countr_zero(v);
    const bool felt = info.stench & bit(c);
    if (felt != ((nb[static_cast<std::size_t>(c)] & bit(w)) != 0)) return false;
  }
  return true;
}

// Cells that may still hold the gold once the Wumpus is placed at w.
std::uint16_t gold_candidates(int w, const WumpusInfo& info) {
  return static_cast<std::uint16_t>(kAllCells & ~kStartCell & ~info.visited & ~bit(w));
}

void enter(WumpusInfo& info, const WumpusLayout& layout, int cell) {
  const auto& nb = neighbor_table();
  info.pos = static_cast<std::uint8_t>(cell);
  if (!(info.visited & bit(cell))) {
    info.visited |= bit(cell);
    if (layout.pits & nb[static_cast<std::size_t>(cell)]) info.breeze |= bit(cell);
    if (info.wumpus_alive) {
      info.heard_from |= bit(cell);
      if (nb[static_cast<std::size_t>(cell)] & bit(layout.wumpus)) info.stench |= bit(cell);
    }
  }
}

std::uint16_t bernoulli_mask(std::uint16_t cells, double p, Rng& rng) {
  // rng() < p * 2^64, one draw per cell.
  const auto threshold = static_cast<std::uint64_t>(p * 18446744073709551616.0);
  std::uint16_t out = 0;
  for (std::uint16_t v = cells; v != 0; v &= static_cast<std::uint16_t>(v - 1)) {
    if (p >= 1.0 || rng() < threshold) out |= static_cast<std::uint16_t>(v & -v);
  }
  return out;
}

// What the evidence in an information state implies about the hidden layout.
// Only pits next to visited cells are tied to the breeze percepts; every
// other unknown cell stays i.i.d. under the prior. Wumpus and gold are
// enumerated outright.
struct LayoutPosterior {
  std::uint16_t frontier = 0;
  std::vector<std::uint16_t> pit_masks;  // consistent pit sets within the frontier
  std::vector<double> pit_cumulative;    // running sum of their prior weights
  std::array<int, kWumpusCells> wumpus_cumulative{};  // by Wumpus cell, weighted by gold choices
};

LayoutPosterior layout_posterior(const WumpusInfo& info, double p) {
  const auto& nb = neighbor_table();
  LayoutPosterior lp;
  std::uint16_t near = 0;
  for (std::uint16_t v = info.visited; v != 0; v &= static_cast<std::uint16_t>(v - 1)) {
    near |= nb[static_cast<std::size_t>(std::countr_zero(v))];
  }
  lp.frontier = static_cast<std::uint16_t>(near & kAllCells & ~kStartCell & ~info.visited);
  const int size = std::popcount(lp.frontier);
  double total = 0.0;
  // Submasks of the frontier, empty set included.
  std::uint16_t m = lp.frontier;
  while (true) {
    if (breeze_ok(m, info)) {
      const int k = std::popcount(m);
      total += std::pow(p, k) * std::pow(1.0 - p, size - k);
      lp.pit_masks.push_back(m);
      lp.pit_cumulative.push_back(total);
    }
    if (m == 0) break;
    m = static_cast<std::uint16_t>((m - 1) & lp.frontier);
  }
  int running = 0;
  for (int w = 0; w < kWumpusCells; ++w) {
    if (w > 0 && wumpus_ok(w, info)) running += std::popcount(gold_candidates(w, info));
    lp.wumpus_cumulative[static_cast<std::size_t>(w)] = running;
  }
  return lp;
}

// Memoized per thread on the evidence fields; a pure function, so caching
// cannot change any result.
const LayoutPosterior& cached_layout_posterior(const WumpusInfo& info, double p) {
  struct Key {
    std::uint64_t evidence;
    std::uint32_t extra;
    double p;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept {
      std::uint64_t h = k.evidence * 0x9E3779B97F4A7C15ull;
      h ^= (static_cast<std::uint64_t>(k.extra) + 0x632BE59BD9B4E019ull) + (h << 6) + (h >> 2);
      h ^= std::hash<double>{}(k.p) + (h << 6) + (h >> 2);
      return static_cast<std::size_t>(h);
    }
  };
  thread_local std::unordered_map<Key, LayoutPosterior, KeyHash> cache;
  const Key key{(static_cast<std::uint64_t>(info.visited) << 48) | (static_cast<std::uint64_t>(info.breeze) << 32) |
                    (static_cast<std::uint64_t>(info.stench) << 16) | info.heard_from,
                (static_cast<std::uint32_t>(info.kill_line) << 1) | (info.wumpus_alive ? 1u : 0u), p};
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  if (cache.size() > (1u << 16)) cache.clear();
  return cache.emplace(key, layout_posterior(info, p)).first->second;
}

int nth_set_bit(std::uint16_t mask, int k) {
  for (; k > 0; --k) mask &= static_cast<std::uint16_t>(mask - 1);
  return std::countr_zero(mask);
}

}  // namespace

std::uint64_t WumpusInfo::hash() const {
  const std::uint64_t lo = static_cast<std::uint64_t>(visited) | static_cast<std::uint64_t>(breeze) << 16 |
                           static_cast<std::uint64_t>(stench) << 32 | static_cast<std::uint64_t>(heard_from) << 48;
  const std::uint64_t hi = static_cast<std::uint64_t>(kill_line) | static_cast<std::uint64_t>(pos) << 16 |
                           static_cast<std::uint64_t>(status) << 24 | static_cast<std::uint64_t>(arrow) << 32 |
                           static_cast<std::uint64_t>(wumpus_alive) << 33;
  return hash_combine(mix64(lo), hi);
}

std::uint16_t wumpus_neighbors(int cell) { return neighbor_table()[static_cast<std::size_t>(cell)]; }

std::uint16_t wumpus_line_of_fire(int cell, int direction) {
  std::uint16_t line = 0;
  for (int c = neighbor(cell, direction); c >= 0; c = neighbor(c, direction)) line |= bit(c);
  return line;
}

WumpusLayout sample_wumpus_layout(const WumpusConfig& config, Rng& rng) {
  WumpusLayout layout;
  layout.pits = bernoulli_mask(static_cast<std::uint16_t>(kAllCells & ~kStartCell), config.pit_prob, rng);
  std::uniform_int_distribution<int> cell(1, kWumpusCells - 1);
  layout.wumpus = cell(rng);
  do {
    layout.gold = cell(rng);
  } while (layout.gold == layout.wumpus);
  return layout;
}

WumpusInfo wumpus_reset(const WumpusLayout& layout) {
  WumpusInfo info;
  info.visited = 0;
  info.heard_from = 0;
  enter(info, layout, 0);
  return info;
}

Transition<WumpusInfo> wumpus_step(const WumpusInfo& info, const WumpusLayout& layout, ActionId a,
                                   const WumpusConfig& config) {
  if (info.terminal()) throw std::logic_error("wumpus_step: the attempt has already ended");
  if (a < 0 || a >= kWumpusActions) throw std::invalid_argument("wumpus_step: action out of range");
  WumpusInfo next = info;
  if (a < 4) {
    const int cell = neighbor(info.pos, a);
    if (cell < 0) return {next, 0.0};
    next.pos = static_cast<std::uint8_t>(cell);
    if (layout.pits & bit(cell)) {
      next.status = WumpusStatus::kInPit;
      return {next, config.death_reward};
    }
    if (info.wumpus_alive && layout.wumpus == cell) {
      next.status = WumpusStatus::kEaten;
      return {next, config.death_reward};
    }
    if (layout.gold == cell) {
      next.status = WumpusStatus::kGold;
      return {next, config.gold_reward};
    }
    enter(next, layout, cell);
    return {next, 0.0};
  }
  if (!info.arrow) return {next, 0.0};
  next.arrow = false;
  const std::uint16_t line = wumpus_line_of_fire(info.pos, a - 4);
  if (info.wumpus_alive && (line & bit(layout.wumpus))) {
    next.wumpus_alive = false;
    next.kill_line = line;
    return {next, config.kill_reward};
  }
  next.status = WumpusStatus::kMissed;
  return {next, 0.0};
}

bool wumpus_consistent(const WumpusInfo& info, const WumpusLayout& layout) {
  if (layout.pits & info.visited) return false;
  if (!breeze_ok(layout.pits, info)) return false;
  if (!wumpus_ok(layout.wumpus, info)) return false;
  return layout.gold != layout.wumpus && (gold_candidates(layout.wumpus, info) & bit(layout.gold));
}

WumpusLayout sample_consistent_layout(const WumpusInfo& info, const WumpusConfig& config, Rng& rng) {
  // Pits are independent of the Wumpus and gold under the prior and under
  // the evidence, so the two parts are drawn separately.
  const auto& lp = cached_layout_posterior(info, config.pit_prob);
  const int wumpus_total = lp.wumpus_cumulative.back();
  if (lp.pit_masks.empty() || !(lp.pit_cumulative.back() > 0.0) || wumpus_total == 0) {
    throw std::runtime_error("sample_consistent_layout: evidence has no support");
  }
  WumpusLayout layout;
  const auto unknown = static_cast<std::uint16_t>(kAllCells & ~kStartCell & ~info.visited);
  const double u_pits = std::uniform_real_distribution<double>(0.0, lp.pit_cumulative.back())(rng);
  auto pick = std::upper_bound(lp.pit_cumulative.begin(), lp.pit_cumulative.end(), u_pits) - lp.pit_cumulative.begin();
  pick = std::min<std::ptrdiff_t>(pick, std::ssize(lp.pit_masks) - 1);
  layout.pits = static_cast<std::uint16_t>(lp.pit_masks[static_cast<std::size_t>(pick)] |
                                           bernoulli_mask(static_cast<std::uint16_t>(unknown & ~lp.frontier),
                                                          config.pit_prob, rng));

  const int u = std::uniform_int_distribution<int>(0, wumpus_total - 1)(rng);
  const auto w = std::upper_bound(lp.wumpus_cumulative.begin(), lp.wumpus_cumulative.end(), u) -
                 lp.wumpus_cumulative.begin();
  layout.wumpus = static_cast<int>(w);
  layout.gold = nth_set_bit(gold_candidates(layout.wumpus, info), u - lp.wumpus_cumulative[static_cast<std::size_t>(w - 1)]);
  return layout;
}

Transition<WumpusInfo> WumpusBeliefModel::sample(const WumpusInfo& s, ActionId a, Rng& rng) const {
  if (s.terminal()) return {s, 0.0};
  return wumpus_step(s, sample_consistent_layout(s, config_, rng), a, config_);
}

ValueBounds WumpusBeliefModel::value_bounds() const {
  const double lo = std::min({config_.death_reward, config_.kill_reward + config_.death_reward, 0.0});
  const double hi = std::max({config_.gold_reward + config_.kill_reward, config_.gold_reward, config_.kill_reward, 0.0});
  return {lo, hi};
}

}  // namespace bfs3
