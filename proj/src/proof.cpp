#include "engine_internal.hpp"

#include "esn/error.hpp"

namespace esn {

namespace {

ProofTree leaf(const Fact& fact) {
    ProofTree t;
    t.root = fact;
    t.rule_id = "extensional";
    return t;
}

ProofTree build(const EvalResult& r, const Fact& fact, const detail::Derivation& d);

ProofTree first_proof(const EvalResult& r, const Fact& fact) {
    for (const EvalResult* layer = &r; layer; layer = layer->parent.get()) {
        if (!layer->derived.contains(fact)) break;
        if (layer->proofs) {
            auto it = layer->proofs->derivations.find(fact);
            if (it != layer->proofs->derivations.end()) return build(*layer, fact, it->second.front());
        }
    }
    return leaf(fact);
}

ProofTree build(const EvalResult& r, const Fact& fact, const detail::Derivation& d) {
    const auto& store = *r.proofs;
    const Rule& rule = store.rules[d.rule];
    const auto& names = store.slot_names[d.rule];
    Substitution sub;
    for (std::size_t i = 0; i < names.size() && i < d.slots.size(); ++i) sub.bind(names[i], d.slots[i]);

    ProofTree t;
    t.root = fact;
    t.rule_id = store.rule_ids[d.rule];
    for (const auto& lit : rule.body) {
        if (const auto* p = std::get_if<PositiveLiteral>(&lit)) {
            t.children.push_back(first_proof(r, apply(sub, p->atom)));
        } else if (const auto* n = std::get_if<NegativeLiteral>(&lit)) {
            t.checks.push_back("not " + apply(sub, n->atom).to_string());
        } else if (const auto* c = std::get_if<Comparison>(&lit)) {
            t.checks.push_back(detail::eval_side(c->lhs, sub).to_string() + " " + to_string(c->op) + " " +
                               detail::eval_side(c->rhs, sub).to_string());
        }
    }
    t.bindings = std::move(sub);
    return t;
}

void write(const ProofTree& t, std::size_t depth, std::string& out) {
    out.append(depth * 2, ' ');
    out += t.root.to_string();
    out += "  [" + t.rule_id + "]";
    if (!t.checks.empty()) {
        out += "  {";
        for (std::size_t i = 0; i < t.checks.size(); ++i) {
            if (i) out += "; ";
            out += t.checks[i];
        }
        out += "}";
    }
    out += "\n";
    for (const auto& c : t.children) write(c, depth + 1, out);
}

} // namespace

ProofTree explain(const EvalResult& r, const Fact& fact) {
    if (!r.derived.contains(fact)) throw NotDerivedError(fact.to_string());
    return first_proof(r, fact);
}

std::vector<ProofTree> explain_all(const EvalResult& r, const Fact& fact) {
    if (!r.derived.contains(fact)) throw NotDerivedError(fact.to_string());
    for (const EvalResult* layer = &r; layer; layer = layer->parent.get()) {
        if (!layer->derived.contains(fact)) break;
        if (!layer->proofs) continue;
        auto it = layer->proofs->derivations.find(fact);
        if (it == layer->proofs->derivations.end()) continue;
        std::vector<ProofTree> out;
        for (const auto& d : it->second) out.push_back(build(*layer, fact, d));
        return out;
    }
    return {leaf(fact)};
}

std::string format_proof(const ProofTree& tree) {
    std::string out;
    write(tree, 0, out);
    return out;
}

} // namespace esn
