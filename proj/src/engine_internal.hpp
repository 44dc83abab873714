#pragma once

#include "esn/engine.hpp"

#include <set>
#include <unordered_map>

namespace esn::detail {

struct Derivation {
    std::uint32_t rule = 0;
    std::vector<Term> slots;
};

struct ProofStore {
    std::vector<Rule> rules;
    std::vector<std::string> rule_ids;
    std::vector<std::vector<std::string>> slot_names;
    std::unordered_map<Fact, std::vector<Derivation>, TermHash> derivations;
};

/// Program after the demand rewrite: demand-bound rules get a guard literal
/// and every call site contributes a rule deriving the guard's facts.
struct RewrittenRules {
    std::vector<Rule> rules;
    /// Index of the source rule, or npos for generated demand rules.
    std::vector<std::size_t> source;
    std::set<PredicateKey> hidden;
};

RewrittenRules rewrite_demands(const std::vector<Rule>& rules);

/// Strata over the given rules; `check_recursion` enables the assignment
/// recursion check.
Stratification stratify_rules(const std::vector<Rule>& rules, bool check_recursion);

/// Arithmetic shared by the engine and eval_expr.
Numeric apply_op(Expr::Op op, Numeric a, Numeric b);
const char* op_symbol(Expr::Op op);
bool test_comparison(const Term& a, CmpOp op, const Term& b);
/// Value of an expression side: a leaf term as is, arithmetic as a number.
Term eval_side(const Expr& e, const Substitution& sub);

} // namespace esn::detail
