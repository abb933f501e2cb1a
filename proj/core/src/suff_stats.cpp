#include "bfs3/suff_stats.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "bfs3/format.hpp"

namespace bfs3 {
namespace {

std::uint64_t count_term(int pair, StateId next, int count) {
  if (count == 0) return 0;
  return mix64(hash_combine(hash_combine(static_cast<std::uint64_t>(pair), static_cast<std::uint64_t>(next)),
                            static_cast<std::uint64_t>(count)));
}

std::uint64_t reward_term(int pair, double r) {
  return mix64(hash_combine(static_cast<std::uint64_t>(pair) ^ 0x5bd1e995ULL, std::bit_cast<std::uint64_t>(r)));
}

}  // namespace

SuffStats::SuffStats(int num_states, int num_actions, int cap) {
  if (num_states < 1 || num_actions < 1 || cap < 1) {
    throw std::invalid_argument("SuffStats: sizes and cap must be positive");
  }
  auto base = std::make_shared<Base>();
  base->num_states = num_states;
  base->num_actions = num_actions;
  base->cap = cap;
  base_ = std::move(base);
}

const SuffStats::PairEntry* SuffStats::base_entry(int pair) const {
  auto it = base_->pairs.find(pair);
  return it == base_->pairs.end() ? nullptr : &it->second;
}

int SuffStats::count_pair(int pair, StateId next) const {
  int c = 0;
  if (const auto* e = base_entry(pair)) {
    auto it = std::lower_bound(e->hist.begin(), e->hist.end(), std::pair<StateId, int>{next, 0});
    if (it != e->hist.end() && it->first == next) c = it->second;
  }
  auto [lo, hi] = std::equal_range(increments_.begin(), increments_.end(), Increment{pair, next});
  return c + static_cast<int>(hi - lo);
}

int SuffStats::total_pair(int pair) const {
  int t = 0;
  if (const auto* e = base_entry(pair)) t = e->total;
  auto lo = std::lower_bound(increments_.begin(), increments_.end(),
                             Increment{pair, std::numeric_limits<StateId>::min()});
  auto hi = std::lower_bound(lo, increments_.end(), Increment{pair + 1, std::numeric_limits<StateId>::min()});
  return t + static_cast<int>(hi - lo);
}

int SuffStats::count(StateId s, ActionId a, StateId next) const { return count_pair(pair_index(s, a), next); }

int SuffStats::total(StateId s, ActionId a) const { return total_pair(pair_index(s, a)); }

std::optional<double> SuffStats::reward(StateId s, ActionId a) const {
  const int p = pair_index(s, a);
  if (const auto* e = base_entry(p); e && e->has_reward) return e->reward;
  auto it = std::lower_bound(pins_.begin(), pins_.end(), p, [](const Pin& x, int v) { return x.pair < v; });
  if (it != pins_.end() && it->pair == p) return it->reward;
  return std::nullopt;
}

std::vector<std::pair<StateId, int>> SuffStats::histogram(StateId s, ActionId a) const {
  const int p = pair_index(s, a);
  std::vector<std::pair<StateId, int>> out;
  if (const auto* e = base_entry(p)) out = e->hist;
  auto lo = std::lower_bound(increments_.begin(), increments_.end(), Increment{p, std::numeric_limits<StateId>::min()});
  for (auto it = lo; it != increments_.end() && it->pair == p; ++it) {
    auto pos = std::lower_bound(out.begin(), out.end(), std::pair<StateId, int>{it->next, 0});
    if (pos != out.end() && pos->first == it->next) {
      ++pos->second;
    } else {
      out.insert(pos, {it->next, 1});
    }
  }
  return out;
}

StateId SuffStats::observation(StateId s, ActionId a, int k) const {
  const int p = pair_index(s, a);
  if (const auto* e = base_entry(p)) {
    if (k < e->total) {
      for (const auto& [next, c] : e->hist) {
        if (k < c) return next;
        k -= c;
      }
    }
    k -= e->total;
  }
  auto lo = std::lower_bound(increments_.begin(), increments_.end(), Increment{p, std::numeric_limits<StateId>::min()});
  auto it = lo + k;
  if (k < 0 || it >= increments_.end() || it->pair != p) {
    throw std::out_of_range("SuffStats::observation: index past the histogram total");
  }
  return it->next;
}

double SuffStats::pinned_value(int k) const {
  const auto nb = static_cast<int>(base_->pinned.size());
  if (k < nb) return base_->pinned[static_cast<std::size_t>(k)];
  return pins_[static_cast<std::size_t>(k - nb)].reward;
}

bool SuffStats::update(StateId s, ActionId a, StateId next, double r) {
  if (s < 0 || s >= num_states() || a < 0 || a >= num_actions() || next < 0 || next >= num_states()) {
    throw std::invalid_argument("SuffStats::update: index out of range");
  }
  const int p = pair_index(s, a);
  if (total_pair(p) >= cap()) return false;
  const int c = count_pair(p, next);
  hash_ += count_term(p, next, c + 1) - count_term(p, next, c);
  const Increment inc{p, next};
  increments_.insert(std::upper_bound(increments_.begin(), increments_.end(), inc), inc);
  if (!reward(s, a)) {
    auto it = std::lower_bound(pins_.begin(), pins_.end(), p, [](const Pin& x, int v) { return x.pair < v; });
    pins_.insert(it, Pin{p, r});
    hash_ += reward_term(p, r);
  }
  return true;
}

std::unordered_map<int, SuffStats::PairEntry> SuffStats::materialize() const {
  auto pairs = base_->pairs;
  for (const auto& inc : increments_) {
    auto& e = pairs[inc.pair];
    auto pos = std::lower_bound(e.hist.begin(), e.hist.end(), std::pair<StateId, int>{inc.next, 0});
    if (pos != e.hist.end() && pos->first == inc.next) {
      ++pos->second;
    } else {
      e.hist.insert(pos, {inc.next, 1});
    }
    ++e.total;
  }
  for (const auto& pin : pins_) {
    auto& e = pairs[pin.pair];
    e.has_reward = true;
    e.reward = pin.reward;
  }
  return pairs;
}

SuffStats SuffStats::flattened() const {
  if (increments_.empty() && pins_.empty()) return *this;
  auto base = std::make_shared<Base>();
  base->num_states = base_->num_states;
  base->num_actions = base_->num_actions;
  base->cap = base_->cap;
  base->pairs = materialize();
  base->discoveries = discoveries();
  std::vector<int> keys;
  keys.reserve(base->pairs.size());
  for (const auto& [k, e] : base->pairs) {
    if (e.has_reward) keys.push_back(k);
  }
  std::sort(keys.begin(), keys.end());
  for (int k : keys) base->pinned.push_back(base->pairs.at(k).reward);

  SuffStats out = *this;
  out.base_ = std::move(base);
  out.increments_.clear();
  out.pins_.clear();
  return out;
}

bool SuffStats::operator==(const SuffStats& other) const {
  if (hash_ != other.hash_ || num_states() != other.num_states() || num_actions() != other.num_actions() ||
      cap() != other.cap()) {
    return false;
  }
  if (base_ == other.base_) {
    return increments_ == other.increments_ && pins_ == other.pins_;
  }
  if (discoveries() != other.discoveries()) return false;
  const auto mine = materialize();
  const auto theirs = other.materialize();
  if (mine.size() != theirs.size()) return false;
  for (const auto& [k, e] : mine) {
    auto it = theirs.find(k);
    if (it == theirs.end()) return false;
    const auto& f = it->second;
    if (e.hist != f.hist || e.has_reward != f.has_reward || (e.has_reward && e.reward != f.reward)) return false;
  }
  return true;
}

std::vector<std::pair<StateId, ActionId>> SuffStats::nonempty_pairs() const {
  std::vector<int> keys;
  for (const auto& [k, e] : base_->pairs) {
    if (e.total > 0) keys.push_back(k);
  }
  for (const auto& inc : increments_) keys.push_back(inc.pair);
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  std::vector<std::pair<StateId, ActionId>> out;
  out.reserve(keys.size());
  for (int k : keys) out.emplace_back(k / num_actions(), k % num_actions());
  return out;
}

void write_suff_stats(std::ostream& out, const SuffStats& stats) {
  out << stats.num_states() << ' ' << stats.num_actions() << ' ' << stats.cap() << '\n';
  for (const auto& [s, a] : stats.nonempty_pairs()) {
    const auto r = stats.reward(s, a);
    out << s << ' ' << a << ' ' << (r ? format_double(*r) : std::string("nan"));
    const auto hist = stats.histogram(s, a);
    auto it = hist.begin();
    for (StateId n = 0; n < stats.num_states(); ++n) {
      int c = 0;
      if (it != hist.end() && it->first == n) {
        c = it->second;
        ++it;
      }
      out << ' ' << c;
    }
    out << '\n';
  }
}

SuffStats read_suff_stats(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("read_suff_stats: missing header");
  std::istringstream header(line);
  int S = 0, A = 0, N = 0;
  if (!(header >> S >> A >> N)) throw std::runtime_error("read_suff_stats: malformed header");
  SuffStats stats(S, A, N);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    StateId s;
    ActionId a;
    std::string r_text;
    if (!(ls >> s >> a >> r_text)) throw std::runtime_error("read_suff_stats: malformed row: " + line);
    const double r = r_text == "nan" ? std::numeric_limits<double>::quiet_NaN() : std::stod(r_text);
    std::vector<int> counts(static_cast<std::size_t>(S));
    for (auto& c : counts) {
      if (!(ls >> c) || c < 0) throw std::runtime_error("read_suff_stats: bad count in row: " + line);
    }
    // The first increment pins the reward, so only empty rows may lack one.
    for (StateId n = 0; n < S; ++n) {
      for (int k = 0; k < counts[static_cast<std::size_t>(n)]; ++k) {
        if (std::isnan(r)) throw std::runtime_error("read_suff_stats: nonempty pair without reward");
        if (!stats.update(s, a, n, r)) throw std::runtime_error("read_suff_stats: histogram exceeds cap");
      }
    }
  }
  return stats.flattened();
}

}  // namespace bfs3
