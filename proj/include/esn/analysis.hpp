#pragma once

#include "esn/ast.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace esn {

/// Safety facts about one rule.
///
/// Head variables that no positive literal or assignment binds are
/// "demand-bound": they must be supplied by every call site of the head
/// predicate (as in `ego_braked_in_window(Ego, T_start)`, whose T_start is
/// fixed by the `not ego_braked_in_window(Ego, T_light)` that uses it).
struct RuleAnalysis {
    std::set<std::string> demand_vars;
    std::vector<std::size_t> demand_positions;

    bool demand_bound() const { return !demand_vars.empty(); }
};

/// Rewrites `Var = expr` comparisons into assignments when Var is unbound at
/// that point of the body, then checks range restriction. Throws SafetyError.
RuleAnalysis analyze_rule(Rule& rule);

/// Same checks without rewriting (the rule must already be disambiguated).
RuleAnalysis inspect_rule(const Rule& rule);

/// A call site of a demand-bound predicate: rule index and body position.
struct CallSite {
    std::size_t rule = 0;
    std::size_t literal = 0;
};

struct DemandPlan {
    /// Argument positions each demand-bound predicate needs from callers.
    std::map<PredicateKey, std::vector<std::size_t>> positions;
    std::map<PredicateKey, std::vector<CallSite>> call_sites;
    std::vector<RuleAnalysis> rules;
};

/// Program-level safety: every demand-bound predicate has at least one call
/// site and each call site binds the demanded positions from its own positive
/// literals. Throws SafetyError.
DemandPlan plan_demands(const std::vector<Rule>& rules);

/// Rejects functors that appear both as facts and as rule heads.
void check_mixed_predicates(const Program& program);

} // namespace esn
