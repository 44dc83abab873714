#pragma once

#include "esn/ast.hpp"
#include "esn/fact_base.hpp"

#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

namespace esn {

struct DependencyEdge {
    PredicateKey from;  // rule head
    PredicateKey to;    // body predicate
    bool negative = false;
    friend bool operator==(const DependencyEdge&, const DependencyEdge&) = default;
};

struct Stratification {
    /// Intensional predicates grouped by stratum, lowest first; each group sorted.
    std::vector<std::vector<PredicateKey>> strata;
    std::vector<DependencyEdge> edges;

    /// -1 for predicates that no rule defines.
    int stratum_of(const PredicateKey& key) const;
};

/// Throws UnstratifiableError when a negative edge lies on a dependency cycle
/// and NonTerminatingRiskError for recursive rules with assignments.
Stratification stratify(const Program& program);

/// Identifier of the k-th rule (1-based) whose head is `functor/arity`, e.g.
/// "violation/2#1". Base facts use "extensional".
std::string rule_id(const std::vector<Rule>& rules, std::size_t index);

struct ProofTree {
    Fact root;
    std::string rule_id;
    std::vector<ProofTree> children;
    /// Ground comparisons and negation checks, e.g. "25 < 30".
    std::vector<std::string> checks;
    Substitution bindings;

    bool is_leaf() const { return children.empty() && rule_id == "extensional"; }
};

/// Indented, one node per line.
std::string format_proof(const ProofTree& tree);

struct EvalOptions {
    /// Keep every derivation of each fact, not just the first.
    bool all_proofs = false;
};

struct EvalStats {
    std::vector<std::size_t> iterations;  // per stratum
    std::size_t facts_derived = 0;
    std::size_t rule_firings = 0;
};

namespace detail {
struct ProofStore;
}

class EvalResult {
public:
    /// Extensional and derived facts together.
    FactBase derived;
    EvalStats stats;

    /// Rules evaluated in this layer (as written, without internal rewrites).
    const std::vector<Rule>& rules() const;
    /// True when `fact` came from the input rather than from a rule.
    bool is_extensional(const Fact& fact) const;

    /// Facts of the given predicates in canonical order.
    std::vector<Fact> select(const std::vector<PredicateKey>& shows) const;

    std::shared_ptr<const detail::ProofStore> proofs;
    /// Layer this result was evaluated on top of, if any.
    std::shared_ptr<const EvalResult> parent;
};

/// Least model of a stratified program over `base` (semi-naive).
EvalResult evaluate(const Program& program, const FactBase& base, const EvalOptions& options = {});

/// Evaluates `program` on top of a previous result: the prior derived facts
/// act as input and their proofs stay reachable through explain(). The
/// program may not redefine a predicate the prior layer derives.
EvalResult evaluate(const Program& program, std::shared_ptr<const EvalResult> prior, const EvalOptions& options = {});

/// Merges `query` into `program`, evaluates, and returns the shown facts in
/// canonical order. `param(Name, Value)` facts in the query replace the
/// program's facts for the same Name. ConflictError if the query defines a
/// predicate that the program also defines.
std::vector<Fact> solve(const Program& program, const Program& query, const FactBase& base);

/// The merge used by solve().
Program merge_query(const Program& program, const Program& query);

/// First recorded proof. NotDerivedError when `fact` is not in r.derived.
ProofTree explain(const EvalResult& r, const Fact& fact);
/// Every recorded proof (one unless evaluated with all_proofs).
std::vector<ProofTree> explain_all(const EvalResult& r, const Fact& fact);

/// Evaluates a ground arithmetic expression. Throws ArithmeticError.
Numeric eval_expr(const Expr& e, const Substitution& sub);

} // namespace esn
