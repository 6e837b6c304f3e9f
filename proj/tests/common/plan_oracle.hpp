#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "goalrec/strips.hpp"

namespace oracle {

// Exhaustive depth-first count of loop-free plans of exactly `depth` actions
// that end in a goal state. Counting stops once `cap` plans are seen.
inline std::size_t count_plans(const goalrec::strips::GroundProblem& p,
                               const goalrec::strips::GroundState& goal, int depth, std::size_t cap) {
  using goalrec::strips::GroundState;
  std::vector<GroundState> path{p.init};
  std::size_t found = 0;
  auto rec = [&](auto&& self, int left) -> void {
    if (found >= cap) return;
    const GroundState s = path.back();
    if (left == 0) {
      if (std::includes(s.begin(), s.end(), goal.begin(), goal.end())) ++found;
      return;
    }
    for (const auto& a : p.actions) {
      if (!std::includes(s.begin(), s.end(), a.pre.begin(), a.pre.end())) continue;
      GroundState next;
      std::set_difference(s.begin(), s.end(), a.del.begin(), a.del.end(), std::back_inserter(next));
      GroundState merged;
      std::set_union(next.begin(), next.end(), a.add.begin(), a.add.end(), std::back_inserter(merged));
      if (std::find(path.begin(), path.end(), merged) != path.end()) continue;
      path.push_back(std::move(merged));
      self(self, left - 1);
      path.pop_back();
    }
  };
  rec(rec, depth);
  return found;
}

// Costs of the k cheapest distinct loop-free plans, by iterative deepening.
// Returns fewer when none exist up to max_depth.
inline std::vector<std::size_t> cheapest_costs(const goalrec::strips::GroundProblem& p,
                                               const goalrec::strips::GroundState& goal, int k,
                                               int max_depth = 16) {
  std::vector<std::size_t> costs;
  for (int d = 0; d <= max_depth && static_cast<int>(costs.size()) < k; ++d) {
    const std::size_t n = count_plans(p, goal, d, static_cast<std::size_t>(k) - costs.size());
    costs.insert(costs.end(), n, static_cast<std::size_t>(d));
  }
  return costs;
}

}  // namespace oracle
