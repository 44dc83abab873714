#pragma once

#include "esn/ast.hpp"
#include "esn/fact_base.hpp"
#include "esn/numeric.hpp"

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace esn {

/// Export policy. holds/occurs facts are classified by their inner fluent or
/// event (see fact_signature), so `#deny position/4.` covers
/// holds(position(V, X, Y, Z), T).
struct ExportPolicy {
    std::set<PredicateKey> allowed;
    std::set<PredicateKey> sensitive;
    Program abstraction_rules;
};

/// `#allow` / `#deny` directives plus abstraction rules. Throws PolicyError
/// when a predicate is both allowed and denied, or a rule head is not allowed.
ExportPolicy parse_policy(std::string_view source);
/// A shipped policy by name ("downtown") or an `.esn` path.
ExportPolicy load_policy(std::string_view name_or_path);

struct Region {
    std::string name;
    Numeric x_min, x_max, y_min, y_max;
};

struct RegionMap {
    std::vector<Region> regions;
};

/// One JSON object per line: {"name", "x_min", "x_max", "y_min", "y_max"}.
RegionMap parse_region_map(std::string_view jsonl);
RegionMap load_region_map(const std::string& path);

/// region_box(Name, X0, X1, Y0, Y1) with Name as a string.
std::vector<Fact> region_facts(const RegionMap& regions);

/// Evaluates the abstraction rules over fb plus region facts and keeps only
/// allowed predicates. Throws LeakError if a kept fact mentions a sensitive
/// predicate at any depth.
FactBase export_view(const FactBase& fb, const ExportPolicy& policy, const RegionMap& regions);

struct LeakReport {
    /// Facts mentioning a sensitive predicate anywhere, in canonical order.
    std::vector<Fact> findings;
    /// Fact count per signature ("in_region/2").
    std::map<std::string, std::size_t> counts;

    bool clean() const { return findings.empty(); }
};

LeakReport verify_no_leak(const FactBase& exported, const ExportPolicy& policy);

/// evaluate(rules, exported + supplement).derived
FactBase refine(const FactBase& exported, const Program& refinement_rules, const FactBase& supplement);

} // namespace esn
