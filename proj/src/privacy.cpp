#include "esn/privacy.hpp"

#include "esn/engine.hpp"
#include "esn/error.hpp"
#include "esn/parser.hpp"
#include "esn/resources.hpp"

#include <json.hpp>

#include <algorithm>
#include <sstream>

namespace esn {

namespace {

bool mentions(const Term& t, const std::set<PredicateKey>& keys) {
    if (!t.is_callable()) return false;
    if (keys.count(t.predicate())) return true;
    for (const auto& a : t.args()) {
        if (mentions(a, keys)) return true;
    }
    return false;
}

} // namespace

ExportPolicy parse_policy(std::string_view source) {
    Program p = parse_program(source);
    ExportPolicy policy;
    policy.allowed.insert(p.allows.begin(), p.allows.end());
    policy.sensitive.insert(p.denies.begin(), p.denies.end());
    for (const auto& k : policy.allowed) {
        if (policy.sensitive.count(k)) throw PolicyError(k.to_string() + " is both allowed and denied");
    }
    for (const auto& r : p.rules) {
        PredicateKey sig = fact_signature(r.head);
        if (!policy.allowed.count(sig))
            throw PolicyError("abstraction rule derives " + sig.to_string() + ", which the policy does not allow");
    }
    p.allows.clear();
    p.denies.clear();
    policy.abstraction_rules = std::move(p);
    return policy;
}

ExportPolicy load_policy(std::string_view name_or_path) {
    std::string name(name_or_path);
    if (auto shipped = embedded_file("policies/" + name + ".esn")) return parse_policy(*shipped);
    if (name.find('/') != std::string::npos || name.ends_with(".esn")) return parse_policy(read_file(name));
    throw PolicyError("unknown policy: " + name);
}

RegionMap parse_region_map(std::string_view jsonl) {
    RegionMap out;
    std::istringstream in{std::string(jsonl)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto fail = [&](const std::string& field, const std::string& detail) {
            throw SchemaError(lineno, field, detail);
        };
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception&) {
            fail("", "invalid JSON");
        }
        if (!j.is_object()) fail("", "expected an object");
        Region r;
        if (!j.contains("name") || !j["name"].is_string()) fail("name", "expected a string");
        r.name = j["name"].get<std::string>();
        auto num = [&](const char* field) {
            if (!j.contains(field) || !j[field].is_number()) fail(field, "expected a number");
            return j[field].is_number_integer() ? Numeric::from_int(j[field].get<std::int64_t>())
                                                : Numeric::from_double(j[field].get<double>());
        };
        r.x_min = num("x_min");
        r.x_max = num("x_max");
        r.y_min = num("y_min");
        r.y_max = num("y_max");
        if (r.x_max < r.x_min) fail("x_max", "smaller than x_min");
        if (r.y_max < r.y_min) fail("y_max", "smaller than y_min");
        out.regions.push_back(std::move(r));
    }
    return out;
}

RegionMap load_region_map(const std::string& path) { return parse_region_map(read_file(path)); }

std::vector<Fact> region_facts(const RegionMap& regions) {
    std::vector<Fact> out;
    for (const auto& r : regions.regions) {
        out.push_back(Term::compound("region_box", {Term::string(r.name), Term::number(r.x_min), Term::number(r.x_max),
                                                    Term::number(r.y_min), Term::number(r.y_max)}));
    }
    return out;
}

FactBase export_view(const FactBase& fb, const ExportPolicy& policy, const RegionMap& regions) {
    for (const auto& k : policy.allowed) {
        if (policy.sensitive.count(k)) throw PolicyError(k.to_string() + " is both allowed and denied");
    }
    FactBase input = fb;
    for (const auto& f : region_facts(regions)) input.insert(f);
    EvalResult r = evaluate(policy.abstraction_rules, input);

    std::vector<Fact> kept;
    for (const auto& f : r.derived.facts()) {
        if (policy.allowed.count(fact_signature(f))) kept.push_back(f);
    }
    std::sort(kept.begin(), kept.end(), TermLess{});
    FactBase out;
    for (const auto& f : kept) {
        if (mentions(f, policy.sensitive)) throw LeakError(f.to_string());
        out.insert(f);
    }
    return out;
}

LeakReport verify_no_leak(const FactBase& exported, const ExportPolicy& policy) {
    LeakReport report;
    for (const auto& f : exported.sorted()) {
        if (mentions(f, policy.sensitive)) report.findings.push_back(f);
        ++report.counts[fact_signature(f).to_string()];
    }
    return report;
}

FactBase refine(const FactBase& exported, const Program& refinement_rules, const FactBase& supplement) {
    FactBase input = exported;
    input.merge(supplement);
    return evaluate(refinement_rules, input).derived;
}

} // namespace esn
