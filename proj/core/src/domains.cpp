#include "bfs3/domains.hpp"

#include <charconv>
#include <stdexcept>
#include <vector>

#include "bfs3/grid_world.hpp"
#include "bfs3/paint_polish.hpp"

namespace bfs3 {
namespace {

template <class T>
T parse_number(std::string_view text, const std::string& name) {
  T value{};
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size()) {
    throw std::invalid_argument("bad number in domain '" + name + "'; expected one of: " + domain_names());
  }
  return value;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  for (std::size_t pos = 0;;) {
    const auto next = s.find(sep, pos);
    out.push_back(s.substr(pos, next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

}  // namespace

std::string domain_names() { return "grid5, paintpolish:N, wumpus4, lock:N, random:S,A,seed"; }

DomainId parse_domain(const std::string& name) {
  DomainId id;
  if (name == "grid5") {
    id.kind = DomainKind::kGrid;
    return id;
  }
  if (name == "wumpus4") {
    id.kind = DomainKind::kWumpus;
    return id;
  }
  const auto colon = name.find(':');
  if (colon == std::string::npos) {
    throw std::invalid_argument("unknown domain '" + name + "'; expected one of: " + domain_names());
  }
  const std::string_view head = std::string_view(name).substr(0, colon);
  const std::string_view args = std::string_view(name).substr(colon + 1);
  if (head == "paintpolish") {
    id.kind = DomainKind::kPaintPolish;
    id.size = parse_number<int>(args, name);
    if (id.size < 1 || id.size > 3) throw std::invalid_argument("paintpolish:N supports 1 <= N <= 3");
    return id;
  }
  if (head == "lock") {
    id.kind = DomainKind::kLock;
    id.size = parse_number<int>(args, name);
    if (id.size < 2) throw std::invalid_argument("lock:N needs N >= 2");
    return id;
  }
  if (head == "random") {
    const auto parts = split(args, ',');
    if (parts.size() != 3) throw std::invalid_argument("random domain takes S,A,seed");
    id.kind = DomainKind::kRandom;
    id.size = parse_number<int>(parts[0], name);
    id.actions = parse_number<int>(parts[1], name);
    id.seed = parse_number<std::uint64_t>(parts[2], name);
    if (id.size < 1 || id.actions < 1) throw std::invalid_argument("random domain needs S, A >= 1");
    return id;
  }
  throw std::invalid_argument("unknown domain '" + name + "'; expected one of: " + domain_names());
}

std::shared_ptr<const TabularMDP> build_tabular_domain(const DomainId& id, std::optional<double> gamma) {
  switch (id.kind) {
    case DomainKind::kGrid: {
      GridWorldConfig c;
      if (gamma) c.gamma = *gamma;
      return std::make_shared<const TabularMDP>(make_grid_world(c));
    }
    case DomainKind::kPaintPolish: {
      PaintPolishConfig c;
      c.cans = id.size;
      if (gamma) c.gamma = *gamma;
      return std::make_shared<const TabularMDP>(make_paint_polish(c));
    }
    case DomainKind::kLock:
      return std::make_shared<const TabularMDP>(make_lock(id.size, gamma.value_or(0.95)));
    case DomainKind::kRandom:
      return std::make_shared<const TabularMDP>(
          random_tabular_mdp(id.size, id.actions, id.seed, std::min(2, id.size), gamma.value_or(0.8)));
    case DomainKind::kWumpus:
      break;
  }
  throw std::invalid_argument("build_tabular_domain: wumpus4 is not a tabular domain");
}

WumpusConfig wumpus_config(std::optional<double> gamma) {
  WumpusConfig c;
  if (gamma) c.gamma = *gamma;
  return c;
}

std::shared_ptr<const ModelPrior> build_prior(const DomainId& id, const TabularMDP& mdp, const PriorOptions& options) {
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  std::vector<bool> terminal(static_cast<std::size_t>(S));
  for (StateId s = 0; s < S; ++s) terminal[static_cast<std::size_t>(s)] = mdp.is_terminal(s);
  switch (options.kind) {
    case PriorKind::kPointMass:
      return std::make_shared<const PointMassPrior>(mdp);
    case PriorKind::kFdm: {
      RewardModel rewards = KnownRewards::from(mdp);
      if (options.unknown_rewards) rewards = DpRewardPrior{options.dp_alpha, mdp.r_min(), mdp.r_max()};
      return std::make_shared<const FdmPrior>(S, A, FdmPrior::symmetric_alpha(S, options.alpha / S),
                                              std::move(rewards), options.cap, std::move(terminal), mdp.discount());
    }
    case PriorKind::kFactored: {
      if (id.kind != DomainKind::kPaintPolish) {
        throw std::invalid_argument("the factored prior needs an object-structured domain (paintpolish:N)");
      }
      if (options.unknown_rewards) throw std::invalid_argument("the factored prior supports known rewards only");
      return std::make_shared<const FactoredObjectPrior>(
          id.size, kCanStates, kCanActions, FdmPrior::symmetric_alpha(kCanStates, options.alpha / kCanStates),
          KnownRewards::from(mdp), options.cap, std::move(terminal), mdp.discount());
    }
  }
  throw std::invalid_argument("build_prior: unknown prior kind");
}

}  // namespace bfs3
