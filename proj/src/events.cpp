#include "esn/events.hpp"

#include "esn/error.hpp"
#include "esn/parser.hpp"
#include "esn/resources.hpp"

#include <filesystem>
#include <map>
#include <set>

namespace esn {

const std::vector<std::string>& ruleset_names() {
    static const std::vector<std::string> names = {"geometry", "kinematic_events", "fusion"};
    return names;
}

Program load_ruleset(std::string_view name_or_path) {
    std::string name(name_or_path);
    if (auto text = embedded_file("stdlib/" + name + ".esn")) return parse_program(*text);
    bool looks_like_path = name.find('/') != std::string::npos || name.ends_with(".esn");
    if (looks_like_path && std::filesystem::exists(name)) return parse_program(read_file(name));
    throw UnknownRuleset(name);
}

Program merge_rulesets(const std::vector<Program>& parts) {
    Program out;
    std::map<PredicateKey, std::size_t> owner;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        std::set<PredicateKey> heads;
        for (const auto& r : parts[i].rules) heads.insert(r.head.predicate());
        for (const auto& h : heads) {
            auto [it, fresh] = owner.emplace(h, i);
            if (!fresh) throw RedefinitionError(h.to_string());
        }
        out.facts.insert(out.facts.end(), parts[i].facts.begin(), parts[i].facts.end());
        out.rules.insert(out.rules.end(), parts[i].rules.begin(), parts[i].rules.end());
        out.shows.insert(out.shows.end(), parts[i].shows.begin(), parts[i].shows.end());
    }
    return out;
}

Program load_stdlib() {
    std::vector<Program> parts;
    for (const auto& n : ruleset_names()) parts.push_back(load_ruleset(n));
    return merge_rulesets(parts);
}

Program load_rulesets(std::string_view comma_separated) {
    std::vector<Program> parts;
    std::size_t start = 0;
    while (start <= comma_separated.size()) {
        auto end = comma_separated.find(',', start);
        if (end == std::string_view::npos) end = comma_separated.size();
        auto item = comma_separated.substr(start, end - start);
        if (!item.empty()) parts.push_back(load_ruleset(item));
        start = end + 1;
    }
    return merge_rulesets(parts);
}

} // namespace esn
