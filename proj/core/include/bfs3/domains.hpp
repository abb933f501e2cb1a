#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "bfs3/priors.hpp"
#include "bfs3/tabular_mdp.hpp"
#include "bfs3/wumpus.hpp"

namespace bfs3 {

enum class DomainKind { kGrid, kPaintPolish, kWumpus, kLock, kRandom };

/// A parsed domain name: `grid5`, `paintpolish:N`, `wumpus4`, `lock:N` or
/// `random:S,A,seed`.
struct DomainId {
  DomainKind kind = DomainKind::kGrid;
  int size = 0;  // cans for paintpolish, length for lock, S for random
  int actions = 0;
  std::uint64_t seed = 0;
};

/// Throws std::invalid_argument listing the accepted names.
DomainId parse_domain(const std::string& name);
std::string domain_names();

/// The explicit model of a tabular domain (everything but Wumpus). Episodes
/// start in state 0. `gamma` overrides the domain default.
std::shared_ptr<const TabularMDP> build_tabular_domain(const DomainId& id, std::optional<double> gamma = {});
WumpusConfig wumpus_config(std::optional<double> gamma = {});

enum class PriorKind { kFdm, kFactored, kPointMass };

struct PriorOptions {
  PriorKind kind = PriorKind::kFdm;
  bool unknown_rewards = false;  // DP reward prior instead of the true R
  double alpha = 1.0;            // total Dirichlet mass, spread evenly
  double dp_alpha = 1.0;
  int cap = 20;                  // knownness limit N
};

/// Throws std::invalid_argument for combinations the domain cannot support
/// (Factored-Object outside Paint/Polish, unknown rewards with it).
std::shared_ptr<const ModelPrior> build_prior(const DomainId& id, const TabularMDP& mdp, const PriorOptions& options);

}  // namespace bfs3
