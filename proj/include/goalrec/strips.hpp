#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "goalrec/recognizer.hpp"

namespace goalrec::strips {

using recognizer::GroundState;

struct TypedName {
  std::string name;
  std::string type = "object";
};

struct PredicateSchema {
  std::string name;
  std::vector<TypedName> params;
};

/// Predicate applied to variables (`?x`) or constants.
struct Atom {
  std::string predicate;
  std::vector<std::string> args;
  std::size_t line = 0;
};

struct ActionSchema {
  std::string name;
  std::vector<TypedName> params;
  std::vector<Atom> precondition;
  std::vector<Atom> add;
  std::vector<Atom> del;
};

struct DomainModel {
  std::string name;
  std::map<std::string, std::string> type_parent;  // child -> parent
  std::vector<TypedName> constants;
  std::vector<PredicateSchema> predicates;
  std::vector<ActionSchema> actions;

  bool is_subtype(const std::string& type, const std::string& ancestor) const;
  const PredicateSchema* find_predicate(const std::string& name) const;
};

struct GroundAction {
  std::string name;  // canonical "(stack a b)"
  std::vector<int> pre, add, del;  // sorted fact ids
};

/// Grounded problem. Facts and actions are ordered lexicographically by
/// their canonical names, so ids are stable across parses.
struct GroundProblem {
  std::string name;
  std::vector<std::string> facts;
  std::vector<GroundAction> actions;
  GroundState init;
  GroundState goal;

  int fact_id(const std::string& canonical) const;    // -1 if absent
  int action_id(const std::string& canonical) const;  // -1 if absent
  std::string state_string(const GroundState& s) const;

  std::unordered_map<std::string, int> fact_index;
  std::unordered_map<std::string, int> action_index;
};

struct Plan {
  std::vector<int> actions;
  std::size_t cost() const { return actions.size(); }
};

using StateTrajectory = std::vector<GroundState>;

DomainModel parse_domain(std::string_view text);
GroundProblem parse_problem(std::string_view text, const DomainModel& domain);

/// Throws InapplicableAction (step 1) when the precondition is unmet.
GroundState apply(const GroundState& s, const GroundAction& a);
bool satisfies(const GroundState& s, const GroundState& goal);
std::vector<int> applicable_actions(const GroundProblem& p, const GroundState& s);

/// States s_0..s_L. A failing action raises InapplicableAction with its
/// 1-based step index.
StateTrajectory rollout(const GroundProblem& p, const Plan& plan);

struct TopkOptions {
  bool optimal_only = false;
  /// Reachable-state cap for the exact goal-distance table; beyond it the
  /// enumeration runs blind.
  std::size_t max_states = 200000;
  std::size_t max_expansions = 5000000;
};

/// Up to k distinct loop-free plans (no state repeated along a plan) in
/// nondecreasing cost order. Throws Unsolvable when the goal is unreachable.
/// Each call counts as one planner invocation.
std::vector<Plan> topk_plans(const GroundProblem& p, const GroundState& goal, int k,
                             const TopkOptions& opts = {});

/// Progression states s_1..s_m after each observed action.
std::vector<GroundState> observed_states(const GroundProblem& p,
                                         std::span<const int> observed_actions);

/// Goal hypotheses: one conjunction per line, either `(and (p a) (q b))` or
/// a bare list of facts.
std::vector<GroundState> parse_hypotheses(std::string_view text, const GroundProblem& p);
/// One grounded action per line, `(name arg1 arg2)`.
std::vector<int> parse_observations(std::string_view text, const GroundProblem& p);

/// Plan text: one action per line plus a `; cost = N` trailer.
void write_plan(std::ostream& os, const GroundProblem& p, const Plan& plan);

std::string read_text_file(const std::string& path);

}  // namespace goalrec::strips
