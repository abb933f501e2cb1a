#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bfs3 {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

/// Criteria cheap enough for every selftest run, and the long experiments.
std::vector<int> fast_criteria();
std::vector<int> slow_criteria();

/// Throws std::invalid_argument for an unknown id.
CriterionResult run_criterion(int id);

/// Runs the given criteria, printing one `PASS|FAIL [id] name: detail`
/// line per criterion. Returns true when all passed.
bool run_criteria(const std::vector<int>& ids, std::ostream& out);

}  // namespace bfs3
