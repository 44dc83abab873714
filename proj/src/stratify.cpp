#include "engine_internal.hpp"

#include "esn/analysis.hpp"
#include "esn/error.hpp"

#include <algorithm>
#include <functional>
#include <map>

namespace esn {

namespace {

const Term* literal_atom(const Literal& lit, bool* negative = nullptr) {
    if (const auto* p = std::get_if<PositiveLiteral>(&lit)) {
        if (negative) *negative = false;
        return &p->atom;
    }
    if (const auto* n = std::get_if<NegativeLiteral>(&lit)) {
        if (negative) *negative = true;
        return &n->atom;
    }
    return nullptr;
}

std::string cycle_name(const PredicateKey& key, const std::vector<PredicateKey>& members) {
    int same = 0;
    for (const auto& m : members) same += (m.name == key.name);
    return same > 1 ? key.to_string() : *key.name;
}

} // namespace

int Stratification::stratum_of(const PredicateKey& key) const {
    for (std::size_t i = 0; i < strata.size(); ++i) {
        if (std::find(strata[i].begin(), strata[i].end(), key) != strata[i].end()) return static_cast<int>(i);
    }
    return -1;
}

namespace detail {

Stratification stratify_rules(const std::vector<Rule>& rules, bool check_recursion) {
    Stratification out;
    std::map<PredicateKey, std::size_t> node;
    std::vector<PredicateKey> keys;
    for (const auto& r : rules) {
        auto k = r.head.predicate();
        if (!node.count(k)) {
            node.emplace(k, keys.size());
            keys.push_back(k);
        }
    }
    std::vector<std::vector<std::pair<std::size_t, bool>>> adj(keys.size());
    for (const auto& r : rules) {
        auto from = r.head.predicate();
        for (const auto& lit : r.body) {
            bool neg = false;
            const Term* atom = literal_atom(lit, &neg);
            if (!atom) continue;
            DependencyEdge e{from, atom->predicate(), neg};
            if (std::find(out.edges.begin(), out.edges.end(), e) == out.edges.end()) out.edges.push_back(e);
            auto it = node.find(e.to);
            if (it != node.end()) adj[node[from]].emplace_back(it->second, neg);
        }
    }

    // Tarjan; components come out dependencies first
    std::size_t n = keys.size(), counter = 0;
    std::vector<std::size_t> index(n, SIZE_MAX), low(n, 0), comp(n, SIZE_MAX);
    std::vector<char> on_stack(n, 0);
    std::vector<std::size_t> stack;
    std::vector<std::vector<std::size_t>> comps;
    std::function<void(std::size_t)> visit = [&](std::size_t v) {
        index[v] = low[v] = counter++;
        stack.push_back(v);
        on_stack[v] = 1;
        for (auto [w, neg] : adj[v]) {
            if (index[w] == SIZE_MAX) {
                visit(w);
                low[v] = std::min(low[v], low[w]);
            } else if (on_stack[w]) {
                low[v] = std::min(low[v], index[w]);
            }
        }
        if (low[v] == index[v]) {
            std::vector<std::size_t> c;
            std::size_t w;
            do {
                w = stack.back();
                stack.pop_back();
                on_stack[w] = 0;
                comp[w] = comps.size();
                c.push_back(w);
            } while (w != v);
            comps.push_back(std::move(c));
        }
    };
    for (std::size_t v = 0; v < n; ++v) {
        if (index[v] == SIZE_MAX) visit(v);
    }

    std::vector<std::size_t> level(comps.size(), 0);
    for (std::size_t c = 0; c < comps.size(); ++c) {
        for (auto v : comps[c]) {
            for (auto [w, neg] : adj[v]) {
                if (comp[w] == c) {
                    if (neg) {
                        std::vector<PredicateKey> members;
                        for (auto m : comps[c]) members.push_back(keys[m]);
                        std::sort(members.begin(), members.end());
                        std::vector<std::string> names;
                        for (const auto& m : members) names.push_back(cycle_name(m, members));
                        throw UnstratifiableError(names);
                    }
                    continue;
                }
                level[c] = std::max(level[c], level[comp[w]] + (neg ? 1 : 0));
            }
        }
    }

    if (check_recursion) {
        for (const auto& r : rules) {
            bool has_assignment = std::any_of(r.body.begin(), r.body.end(),
                                              [](const Literal& l) { return std::holds_alternative<Assignment>(l); });
            if (!has_assignment) continue;
            std::size_t c = comp[node[r.head.predicate()]];
            for (const auto& lit : r.body) {
                const Term* atom = literal_atom(lit);
                if (!atom) continue;
                auto it = node.find(atom->predicate());
                if (it != node.end() && comp[it->second] == c) throw NonTerminatingRiskError(format_rule_inline(r));
            }
        }
    }

    std::size_t depth = 0;
    for (auto l : level) depth = std::max(depth, l + 1);
    out.strata.assign(comps.empty() ? 0 : depth, {});
    for (std::size_t v = 0; v < n; ++v) out.strata[level[comp[v]]].push_back(keys[v]);
    for (auto& s : out.strata) std::sort(s.begin(), s.end());
    return out;
}

RewrittenRules rewrite_demands(const std::vector<Rule>& rules) {
    RewrittenRules out;
    DemandPlan plan = plan_demands(rules);
    out.rules = rules;
    out.source.resize(rules.size());
    for (std::size_t i = 0; i < rules.size(); ++i) out.source[i] = i;
    if (plan.positions.empty()) return out;

    std::map<PredicateKey, PredicateKey> demand_key;
    for (const auto& [key, pos] : plan.positions) {
        PredicateKey d("$demand:" + *key.name + "/" + std::to_string(key.arity),
                       static_cast<std::uint32_t>(pos.size()));
        demand_key.emplace(key, d);
        out.hidden.insert(d);
    }
    auto demand_atom = [&](const Term& atom) {
        PredicateKey key = atom.predicate();
        std::vector<Term> args;
        for (auto p : plan.positions.at(key)) args.push_back(atom.arg(p));
        return Term::compound(demand_key.at(key).name, std::move(args));
    };

    for (std::size_t i = 0; i < rules.size(); ++i) {
        if (!plan.rules[i].demand_bound()) continue;
        out.rules[i].body.insert(out.rules[i].body.begin(), PositiveLiteral{demand_atom(rules[i].head)});
    }

    std::vector<Rule> generated;
    for (const auto& [key, sites] : plan.call_sites) {
        for (const auto& site : sites) {
            const Rule& caller = rules[site.rule];
            const Literal& lit = caller.body[site.literal];
            const Term& atom = std::holds_alternative<PositiveLiteral>(lit) ? std::get<PositiveLiteral>(lit).atom
                                                                           : std::get<NegativeLiteral>(lit).atom;
            Rule d;
            d.head = demand_atom(atom);
            d.location = caller.location;
            std::set<std::string> context;
            if (plan.rules[site.rule].demand_bound()) {
                d.body.push_back(PositiveLiteral{demand_atom(caller.head)});
                context = plan.rules[site.rule].demand_vars;
            }
            std::vector<const Comparison*> comparisons;
            for (const auto& l : caller.body) {
                if (const auto* p = std::get_if<PositiveLiteral>(&l)) {
                    if (plan.positions.count(p->atom.predicate())) continue;
                    d.body.push_back(l);
                    collect_variables(p->atom, context);
                } else if (const auto* a = std::get_if<Assignment>(&l)) {
                    std::set<std::string> vars;
                    a->expr.collect_variables(vars);
                    if (std::includes(context.begin(), context.end(), vars.begin(), vars.end())) {
                        d.body.push_back(l);
                        context.insert(a->var);
                    }
                } else if (const auto* c = std::get_if<Comparison>(&l)) {
                    comparisons.push_back(c);
                }
            }
            for (const auto* c : comparisons) {
                std::set<std::string> vars;
                collect_variables(Literal{*c}, vars);
                if (std::includes(context.begin(), context.end(), vars.begin(), vars.end())) d.body.push_back(*c);
            }
            if (std::find(generated.begin(), generated.end(), d) == generated.end()) generated.push_back(std::move(d));
        }
    }
    for (auto& g : generated) {
        out.rules.push_back(std::move(g));
        out.source.push_back(static_cast<std::size_t>(-1));
    }
    return out;
}

} // namespace detail

Stratification stratify(const Program& program) { return detail::stratify_rules(program.rules, true); }

std::string rule_id(const std::vector<Rule>& rules, std::size_t index) {
    PredicateKey key = rules[index].head.predicate();
    std::size_t k = 0;
    for (std::size_t i = 0; i <= index; ++i) k += rules[i].head.predicate() == key;
    return key.to_string() + "#" + std::to_string(k);
}

} // namespace esn
