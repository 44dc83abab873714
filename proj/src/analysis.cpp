#include "esn/analysis.hpp"

#include "esn/error.hpp"

#include <algorithm>

namespace esn {

namespace {

bool subset(const std::set<std::string>& vars, const std::set<std::string>& bound, std::string* missing) {
    for (const auto& v : vars) {
        if (!bound.count(v)) {
            if (missing) *missing = v;
            return false;
        }
    }
    return true;
}

RuleAnalysis check(const Rule& rule, const std::vector<std::set<std::string>>& bound_before,
                   const std::set<std::string>& bound_after) {
    RuleAnalysis result;
    std::set<std::string> head_vars;
    collect_variables(rule.head, head_vars);
    for (const auto& v : head_vars) {
        if (!bound_after.count(v)) result.demand_vars.insert(v);
    }
    std::set<std::string> available = bound_after;
    available.insert(result.demand_vars.begin(), result.demand_vars.end());

    std::string missing;
    for (std::size_t i = 0; i < rule.body.size(); ++i) {
        const Literal& lit = rule.body[i];
        if (const auto* a = std::get_if<Assignment>(&lit)) {
            std::set<std::string> vars;
            a->expr.collect_variables(vars);
            std::set<std::string> ok = bound_before[i];
            ok.insert(result.demand_vars.begin(), result.demand_vars.end());
            if (!subset(vars, ok, &missing)) throw SafetyError(format_rule_inline(rule), missing);
        } else if (std::holds_alternative<NegativeLiteral>(lit) || std::holds_alternative<Comparison>(lit)) {
            std::set<std::string> vars;
            collect_variables(lit, vars);
            if (!subset(vars, available, &missing)) throw SafetyError(format_rule_inline(rule), missing);
        }
    }

    for (std::size_t i = 0; i < rule.head.arity(); ++i) {
        std::set<std::string> vars;
        collect_variables(rule.head.arg(i), vars);
        for (const auto& v : vars) {
            if (result.demand_vars.count(v)) {
                result.demand_positions.push_back(i);
                break;
            }
        }
    }
    return result;
}

} // namespace

RuleAnalysis analyze_rule(Rule& rule) {
    std::set<std::string> bound;
    std::vector<std::set<std::string>> before;
    before.reserve(rule.body.size());
    for (auto& lit : rule.body) {
        before.push_back(bound);
        if (auto* p = std::get_if<PositiveLiteral>(&lit)) {
            collect_variables(p->atom, bound);
        } else if (auto* c = std::get_if<Comparison>(&lit)) {
            if (c->op == CmpOp::eq && c->lhs.is_leaf() && c->lhs.term().is_variable() &&
                !bound.count(c->lhs.term().name())) {
                std::string var = c->lhs.term().name();
                Expr rhs = c->rhs;
                lit = Assignment{var, std::move(rhs)};
                bound.insert(var);
            }
        } else if (auto* a = std::get_if<Assignment>(&lit)) {
            bound.insert(a->var);
        }
    }
    return check(rule, before, bound);
}

RuleAnalysis inspect_rule(const Rule& rule) {
    std::set<std::string> bound;
    std::vector<std::set<std::string>> before;
    before.reserve(rule.body.size());
    for (const auto& lit : rule.body) {
        before.push_back(bound);
        if (const auto* p = std::get_if<PositiveLiteral>(&lit)) {
            collect_variables(p->atom, bound);
        } else if (const auto* a = std::get_if<Assignment>(&lit)) {
            bound.insert(a->var);
        }
    }
    return check(rule, before, bound);
}

DemandPlan plan_demands(const std::vector<Rule>& rules) {
    DemandPlan plan;
    plan.rules.reserve(rules.size());
    for (const auto& r : rules) plan.rules.push_back(inspect_rule(r));

    std::map<PredicateKey, const Rule*> first_rule;
    std::map<PredicateKey, std::string> first_var;
    for (std::size_t i = 0; i < rules.size(); ++i) {
        const auto& info = plan.rules[i];
        if (!info.demand_bound()) continue;
        PredicateKey key = rules[i].head.predicate();
        auto& pos = plan.positions[key];
        for (auto p : info.demand_positions) {
            if (std::find(pos.begin(), pos.end(), p) == pos.end()) pos.push_back(p);
        }
        std::sort(pos.begin(), pos.end());
        if (!first_rule.count(key)) {
            first_rule[key] = &rules[i];
            first_var[key] = *info.demand_vars.begin();
        }
    }
    if (plan.positions.empty()) return plan;

    for (std::size_t r = 0; r < rules.size(); ++r) {
        const Rule& rule = rules[r];
        for (std::size_t l = 0; l < rule.body.size(); ++l) {
            const Term* atom = nullptr;
            if (const auto* p = std::get_if<PositiveLiteral>(&rule.body[l])) atom = &p->atom;
            if (const auto* n = std::get_if<NegativeLiteral>(&rule.body[l])) atom = &n->atom;
            if (!atom || !atom->is_callable()) continue;
            auto it = plan.positions.find(atom->predicate());
            if (it == plan.positions.end()) continue;

            // variables the caller binds without help from demand-bound predicates
            std::set<std::string> context = plan.rules[r].demand_vars;
            for (const auto& lit : rule.body) {
                if (const auto* p = std::get_if<PositiveLiteral>(&lit)) {
                    if (!plan.positions.count(p->atom.predicate())) collect_variables(p->atom, context);
                } else if (const auto* a = std::get_if<Assignment>(&lit)) {
                    std::set<std::string> vars;
                    a->expr.collect_variables(vars);
                    if (subset(vars, context, nullptr)) context.insert(a->var);
                }
            }
            for (auto pos : it->second) {
                std::set<std::string> vars;
                collect_variables(atom->arg(pos), vars);
                std::string missing;
                if (!subset(vars, context, &missing)) throw SafetyError(format_rule_inline(rule), missing);
            }
            plan.call_sites[it->first].push_back(CallSite{r, l});
        }
    }
    for (const auto& [key, rule] : first_rule) {
        if (!plan.call_sites.count(key)) throw SafetyError(format_rule_inline(*rule), first_var[key]);
    }
    return plan;
}

void check_mixed_predicates(const Program& program) {
    std::set<PredicateKey> heads;
    for (const auto& r : program.rules) heads.insert(r.head.predicate());
    for (const auto& f : program.facts) {
        if (heads.count(f.predicate())) throw MixedPredicateError(f.predicate().to_string());
    }
}

} // namespace esn
