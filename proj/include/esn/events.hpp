#pragma once

#include "esn/ast.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace esn {

/// Names of the shipped rule sets: geometry, kinematic_events, fusion.
const std::vector<std::string>& ruleset_names();

/// A shipped rule set by name, or a user rule set by `.esn` path.
/// Throws UnknownRuleset, or parse/safety errors.
Program load_ruleset(std::string_view name_or_path);

/// Concatenates rule sets. Throws RedefinitionError if two of them define
/// the same head predicate.
Program merge_rulesets(const std::vector<Program>& parts);

/// All shipped rule sets merged.
Program load_stdlib();

/// Rule sets named in a comma-separated list ("geometry,fusion").
Program load_rulesets(std::string_view comma_separated);

} // namespace esn
