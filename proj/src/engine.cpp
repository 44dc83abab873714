#include "engine_internal.hpp"

#include "esn/analysis.hpp"
#include "esn/error.hpp"

#include <algorithm>
#include <map>
#include <unordered_set>

namespace esn {

namespace detail {

const char* op_symbol(Expr::Op op) {
    switch (op) {
    case Expr::Op::add: return "+";
    case Expr::Op::sub: return "-";
    case Expr::Op::mul: return "*";
    case Expr::Op::div: return "/";
    case Expr::Op::pow: return "^";
    case Expr::Op::neg: return "-";
    case Expr::Op::sqrt: return "sqrt";
    default: return "";
    }
}

Numeric apply_op(Expr::Op op, Numeric a, Numeric b) {
    try {
        switch (op) {
        case Expr::Op::add: return a + b;
        case Expr::Op::sub: return a - b;
        case Expr::Op::mul: return a * b;
        case Expr::Op::div: return a / b;
        case Expr::Op::pow: return a.pow(b);
        case Expr::Op::neg: return -a;
        case Expr::Op::sqrt: return a.sqrt();
        default: return a;
        }
    } catch (const NumericOverflow&) {
        bool unary = op == Expr::Op::neg || op == Expr::Op::sqrt;
        throw ArithmeticError(op_symbol(op),
                              (unary ? a.to_string() : a.to_string() + ", " + b.to_string()) + ": overflow");
    }
}

bool test_comparison(const Term& a, CmpOp op, const Term& b) {
    int c = compare(a, b);
    switch (op) {
    case CmpOp::lt: return c < 0;
    case CmpOp::le: return c <= 0;
    case CmpOp::gt: return c > 0;
    case CmpOp::ge: return c >= 0;
    case CmpOp::eq: return c == 0;
    case CmpOp::ne: return c != 0;
    }
    return false;
}

namespace {

Numeric numeric_operand(const Term& t, Expr::Op op) {
    if (!t.is_number()) throw ArithmeticError(op_symbol(op), t.to_string());
    return t.as_number();
}

Numeric eval_numeric(const Expr& e, const Substitution& sub) {
    if (e.is_leaf()) {
        const Term& t = e.term();
        if (t.is_variable()) {
            const Term* v = sub.find(t.name());
            if (!v) throw ArithmeticError("eval", "unbound " + t.name());
            if (!v->is_number()) throw ArithmeticError("eval", v->to_string());
            return v->as_number();
        }
        if (!t.is_number()) throw ArithmeticError("eval", t.to_string());
        return t.as_number();
    }
    auto operand = [&](const Expr& x) {
        if (x.is_leaf()) {
            const Term& t = x.term();
            const Term* v = t.is_variable() ? sub.find(t.name()) : &t;
            if (!v) throw ArithmeticError(op_symbol(e.op()), "unbound " + t.name());
            return numeric_operand(*v, e.op());
        }
        return eval_numeric(x, sub);
    };
    if (e.op() == Expr::Op::neg || e.op() == Expr::Op::sqrt) return apply_op(e.op(), operand(e.operand()), {});
    return apply_op(e.op(), operand(e.lhs()), operand(e.rhs()));
}

} // namespace

Term eval_side(const Expr& e, const Substitution& sub) {
    if (e.is_leaf()) return apply(sub, e.term());
    return Term::number(eval_numeric(e, sub));
}

} // namespace detail

Numeric eval_expr(const Expr& e, const Substitution& sub) { return detail::eval_numeric(e, sub); }

namespace {

using detail::Derivation;

// ---- compiled rule form ------------------------------------------------

struct CPat {
    enum class K : std::uint8_t { constant, var, compound };
    K k = K::constant;
    Term value;
    std::uint32_t slot = 0;
    const std::string* name = nullptr;
    std::vector<CPat> args;
};

struct CExpr {
    Expr::Op op = Expr::Op::leaf;
    bool is_slot = false;
    std::uint32_t slot = 0;
    Term value;
    std::vector<CExpr> kids;
};

using Path = std::vector<std::uint8_t>;

struct Relation;

struct Index {
    std::vector<Path> skel_paths;
    std::vector<const std::string*> skel_names;
    std::vector<std::uint32_t> skel_arity;
    std::vector<Path> leaf_paths;
    std::unordered_map<std::size_t, std::vector<std::uint32_t>> buckets;
    std::size_t upto = 0;
};

struct Relation {
    std::vector<Term> facts;
    std::unordered_set<Term, TermHash> members;
    std::map<std::string, std::unique_ptr<Index>> indexes;

    bool add(const Term& t) {
        if (!members.insert(t).second) return false;
        facts.push_back(t);
        return true;
    }
};

const Term* at_path(const Term& root, const Path& path) {
    const Term* t = &root;
    for (auto i : path) {
        if (!t->is_compound() || i >= t->arity()) return nullptr;
        t = &t->arg(i);
    }
    return t;
}

std::size_t combine(std::size_t h, std::size_t v) { return h * 1000003u ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6)); }

void refresh(Index& ix, const Relation& rel) {
    for (; ix.upto < rel.facts.size(); ++ix.upto) {
        const Term& f = rel.facts[ix.upto];
        bool ok = true;
        for (std::size_t s = 0; s < ix.skel_paths.size() && ok; ++s) {
            const Term* n = at_path(f, ix.skel_paths[s]);
            ok = n && n->is_callable() && n->name_ptr() == ix.skel_names[s] && n->arity() == ix.skel_arity[s];
        }
        if (!ok) continue;
        std::size_t h = 0;
        for (const auto& p : ix.leaf_paths) {
            const Term* n = at_path(f, p);
            if (!n) {
                ok = false;
                break;
            }
            h = combine(h, n->hash());
        }
        if (ok) ix.buckets[h].push_back(static_cast<std::uint32_t>(ix.upto));
    }
}

struct LeafSource {
    bool is_slot = false;
    std::uint32_t slot = 0;
    Term value;
};

struct Step {
    enum class K : std::uint8_t { scan, negate, compare, assign };
    K k = K::scan;
    CPat pat;
    Relation* rel = nullptr;
    bool recursive = false;
    std::size_t scan_ordinal = 0;
    Index* index = nullptr;
    std::vector<LeafSource> key;
    CExpr lhs, rhs;
    CmpOp op = CmpOp::eq;
    std::uint32_t slot = 0;
};

struct CompiledRule {
    std::size_t source = 0;  // index into the layer's rules, or npos
    const Rule* rule = nullptr;
    CPat head;
    Relation* head_rel = nullptr;
    bool hidden = false;
    std::vector<Step> steps;
    std::size_t scans = 0;
    std::vector<std::string> slot_names;
};

class Compiler {
public:
    std::uint32_t slot(const std::string& v) {
        auto it = index_.find(v);
        if (it != index_.end()) return it->second;
        auto s = static_cast<std::uint32_t>(names_.size());
        names_.push_back(v);
        index_.emplace(v, s);
        return s;
    }

    CPat pat(const Term& t) {
        CPat p;
        if (t.is_variable()) {
            p.k = CPat::K::var;
            p.slot = slot(t.name());
        } else if (t.is_compound()) {
            p.k = CPat::K::compound;
            p.name = t.name_ptr();
            for (const auto& a : t.args()) p.args.push_back(pat(a));
        } else {
            p.value = t;
        }
        return p;
    }

    CPat root(const Term& atom) {
        CPat p;
        p.k = CPat::K::compound;
        p.name = atom.name_ptr();
        for (const auto& a : atom.args()) p.args.push_back(pat(a));
        return p;
    }

    CExpr expr(const Expr& e) {
        CExpr c;
        c.op = e.op();
        if (e.is_leaf()) {
            if (e.term().is_variable()) {
                c.is_slot = true;
                c.slot = slot(e.term().name());
            } else {
                c.value = e.term();
            }
        } else if (e.op() == Expr::Op::neg || e.op() == Expr::Op::sqrt) {
            c.kids.push_back(expr(e.operand()));
        } else {
            c.kids.push_back(expr(e.lhs()));
            c.kids.push_back(expr(e.rhs()));
        }
        return c;
    }

    std::vector<std::string> names() const { return names_; }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, std::uint32_t> index_;
};

void pat_vars(const CPat& p, std::set<std::uint32_t>& out) {
    if (p.k == CPat::K::var) out.insert(p.slot);
    for (const auto& a : p.args) pat_vars(a, out);
}

void expr_vars(const CExpr& e, std::set<std::uint32_t>& out) {
    if (e.is_slot) out.insert(e.slot);
    for (const auto& k : e.kids) expr_vars(k, out);
}

bool covered(const std::set<std::uint32_t>& need, const std::vector<char>& bound) {
    return std::all_of(need.begin(), need.end(), [&](std::uint32_t s) { return bound[s]; });
}

// ---- evaluation ----------------------------------------------------------

struct Pending {
    Term fact;
    Relation* rel;
    bool hidden;
    Derivation derivation;
};

class Evaluator {
public:
    Evaluator(const EvalOptions& options, detail::ProofStore& store) : options_(options), store_(store) {}

    Relation& relation(const PredicateKey& k) { return relations_[k]; }

    void seed(const FactBase& base) {
        std::map<PredicateKey, std::vector<Term>> grouped;
        for (const auto& f : base.facts()) grouped[f.predicate()].push_back(f);
        for (auto& [k, fs] : grouped) {
            std::sort(fs.begin(), fs.end(), TermLess{});
            Relation& r = relation(k);
            for (auto& f : fs) r.add(f);
        }
    }

    CompiledRule compile(const Rule& rule, std::size_t source, bool hidden, const std::set<PredicateKey>& stratum) {
        Compiler c;
        CompiledRule cr;
        cr.source = source;
        cr.rule = &rule;
        cr.hidden = hidden;
        cr.head = c.root(rule.head);
        cr.head_rel = &relation(rule.head.predicate());

        struct Pendingstep {
            Step step;
            std::set<std::uint32_t> needs;
        };
        std::vector<Pendingstep> waiting;
        std::vector<Step> steps;
        std::vector<char> bound;
        auto mark = [&](const std::set<std::uint32_t>& vs) {
            for (auto s : vs) {
                if (s >= bound.size()) bound.resize(s + 1, 0);
                bound[s] = 1;
            }
        };
        auto flush = [&] {
            for (auto it = waiting.begin(); it != waiting.end();) {
                if (bound.size() < c.names().size()) bound.resize(c.names().size(), 0);
                if (covered(it->needs, bound)) {
                    steps.push_back(std::move(it->step));
                    it = waiting.erase(it);
                } else {
                    ++it;
                }
            }
        };

        for (const auto& lit : rule.body) {
            if (const auto* p = std::get_if<PositiveLiteral>(&lit)) {
                Step s;
                s.k = Step::K::scan;
                s.pat = c.root(p->atom);
                s.rel = &relation(p->atom.predicate());
                s.recursive = stratum.count(p->atom.predicate()) != 0;
                s.scan_ordinal = cr.scans++;
                if (bound.size() < c.names().size()) bound.resize(c.names().size(), 0);
                build_index(s, bound);
                std::set<std::uint32_t> vs;
                pat_vars(s.pat, vs);
                steps.push_back(std::move(s));
                mark(vs);
            } else if (const auto* a = std::get_if<Assignment>(&lit)) {
                Step s;
                s.k = Step::K::assign;
                s.lhs = c.expr(a->expr);
                s.slot = c.slot(a->var);
                steps.push_back(std::move(s));
                mark({steps.back().slot});
            } else if (const auto* n = std::get_if<NegativeLiteral>(&lit)) {
                Step s;
                s.k = Step::K::negate;
                s.pat = c.root(n->atom);
                s.rel = &relation(n->atom.predicate());
                std::set<std::uint32_t> vs;
                pat_vars(s.pat, vs);
                waiting.push_back({std::move(s), std::move(vs)});
            } else if (const auto* cmp = std::get_if<Comparison>(&lit)) {
                Step s;
                s.k = Step::K::compare;
                s.lhs = c.expr(cmp->lhs);
                s.rhs = c.expr(cmp->rhs);
                s.op = cmp->op;
                std::set<std::uint32_t> vs;
                expr_vars(s.lhs, vs);
                expr_vars(s.rhs, vs);
                waiting.push_back({std::move(s), std::move(vs)});
            }
            flush();
        }
        for (auto& w : waiting) steps.push_back(std::move(w.step));
        cr.steps = std::move(steps);
        cr.slot_names = c.names();
        return cr;
    }

    void run_stratum(std::vector<CompiledRule>& rules, const std::set<PredicateKey>& members, EvalStats& stats) {
        std::vector<Relation*> rels;
        for (const auto& k : members) rels.push_back(&relation(k));
        std::map<Relation*, std::pair<std::size_t, std::size_t>> delta;
        std::size_t iterations = 0;
        bool first = true;
        for (;;) {
            ++iterations;
            for (auto& r : rules) {
                if (first) {
                    fire_all(r, nullptr, 0);
                    continue;
                }
                for (std::size_t i = 0; i < r.steps.size(); ++i) {
                    const Step& s = r.steps[i];
                    if (s.k != Step::K::scan || !s.recursive) continue;
                    auto d = delta.find(s.rel);
                    if (d == delta.end() || d->second.first == d->second.second) continue;
                    fire_all(r, &delta, s.scan_ordinal);
                }
            }
            first = false;
            delta.clear();
            for (auto* rel : rels) delta[rel] = {rel->facts.size(), rel->facts.size()};
            std::size_t added = commit(stats);
            for (auto* rel : rels) delta[rel].second = rel->facts.size();
            if (added == 0) break;
        }
        stats.iterations.push_back(iterations);
    }

    std::vector<Term> emitted;  // derived facts in commit order

private:
    void build_index(Step& s, const std::vector<char>& bound) {
        Index spec;
        std::string key;
        std::function<void(const CPat&, Path&)> walk = [&](const CPat& p, Path& path) {
            switch (p.k) {
            case CPat::K::compound:
                if (!path.empty()) {
                    spec.skel_paths.push_back(path);
                    spec.skel_names.push_back(p.name);
                    spec.skel_arity.push_back(static_cast<std::uint32_t>(p.args.size()));
                    key += "c" + *p.name + "/" + std::to_string(p.args.size()) + "@";
                    for (auto i : path) key += std::to_string(i) + ".";
                    key += ";";
                }
                for (std::size_t i = 0; i < p.args.size(); ++i) {
                    path.push_back(static_cast<std::uint8_t>(i));
                    walk(p.args[i], path);
                    path.pop_back();
                }
                break;
            case CPat::K::constant:
                spec.leaf_paths.push_back(path);
                s.key.push_back(LeafSource{false, 0, p.value});
                key += "l@";
                for (auto i : path) key += std::to_string(i) + ".";
                key += ";";
                break;
            case CPat::K::var:
                if (p.slot < bound.size() && bound[p.slot]) {
                    spec.leaf_paths.push_back(path);
                    s.key.push_back(LeafSource{true, p.slot, {}});
                    key += "l@";
                    for (auto i : path) key += std::to_string(i) + ".";
                    key += ";";
                }
                break;
            }
        };
        Path path;
        walk(s.pat, path);
        auto& slot = s.rel->indexes[key];
        if (!slot) slot = std::make_unique<Index>(std::move(spec));
        s.index = slot.get();
    }

    bool unify(const CPat& p, const Term& g, std::vector<std::uint32_t>& trail) {
        switch (p.k) {
        case CPat::K::constant: return p.value == g;
        case CPat::K::var:
            if (bound_[p.slot]) return slots_[p.slot] == g;
            slots_[p.slot] = g;
            bound_[p.slot] = 1;
            trail.push_back(p.slot);
            return true;
        case CPat::K::compound:
            if (!g.is_callable() || g.name_ptr() != p.name || g.arity() != p.args.size()) return false;
            for (std::size_t i = 0; i < p.args.size(); ++i) {
                if (!unify(p.args[i], g.arg(i), trail)) return false;
            }
            return true;
        }
        return false;
    }

    Term build(const CPat& p) const {
        switch (p.k) {
        case CPat::K::constant: return p.value;
        case CPat::K::var: return slots_[p.slot];
        case CPat::K::compound: {
            std::vector<Term> args;
            args.reserve(p.args.size());
            for (const auto& a : p.args) args.push_back(build(a));
            return Term::compound(p.name, std::move(args));
        }
        }
        return {};
    }

    Term side(const CExpr& e) const {
        if (e.op == Expr::Op::leaf) return e.is_slot ? slots_[e.slot] : e.value;
        return Term::number(numeric(e));
    }

    Numeric numeric(const CExpr& e) const {
        auto operand = [&](const CExpr& x) {
            if (x.op == Expr::Op::leaf) {
                const Term& t = x.is_slot ? slots_[x.slot] : x.value;
                if (!t.is_number()) throw ArithmeticError(detail::op_symbol(e.op), t.to_string());
                return t.as_number();
            }
            return numeric(x);
        };
        if (e.op == Expr::Op::leaf) {
            const Term& t = e.is_slot ? slots_[e.slot] : e.value;
            if (!t.is_number()) throw ArithmeticError("=", t.to_string());
            return t.as_number();
        }
        if (e.kids.size() == 1) return detail::apply_op(e.op, operand(e.kids[0]), {});
        return detail::apply_op(e.op, operand(e.kids[0]), operand(e.kids[1]));
    }

    std::string ground_instance(const CompiledRule& r) const {
        Substitution sub;
        for (std::size_t i = 0; i < r.slot_names.size(); ++i) {
            if (bound_[i]) sub.bind(r.slot_names[i], slots_[i]);
        }
        Rule g;
        g.head = apply(sub, r.rule->head);
        for (const auto& lit : r.rule->body) {
            if (const auto* p = std::get_if<PositiveLiteral>(&lit)) {
                if (p->atom.name()[0] == '$') continue;
                g.body.push_back(PositiveLiteral{apply(sub, p->atom)});
            } else if (const auto* n = std::get_if<NegativeLiteral>(&lit)) {
                g.body.push_back(NegativeLiteral{apply(sub, n->atom)});
            } else {
                g.body.push_back(lit);
            }
        }
        return format_rule_inline(g) + " with " + sub.to_string();
    }

    void fire_all(CompiledRule& r, const std::map<Relation*, std::pair<std::size_t, std::size_t>>* delta,
                  std::size_t delta_scan) {
        slots_.assign(r.slot_names.size(), Term{});
        bound_.assign(r.slot_names.size(), 0);
        current_ = &r;
        delta_ = delta;
        delta_scan_ = delta_scan;
        try {
            step(0);
        } catch (const ArithmeticError& e) {
            if (!e.location.empty()) throw;
            std::string id = r.source == static_cast<std::size_t>(-1) ? "demand rule" : store_.rule_ids[r.source];
            throw ArithmeticError(e.op, e.operands, id + ": " + ground_instance(r));
        }
    }

    std::pair<std::size_t, std::size_t> range(const Step& s) const {
        std::size_t size = s.rel->facts.size();
        if (!delta_ || !s.recursive) return {0, size};
        auto it = delta_->find(s.rel);
        std::size_t lo = it == delta_->end() ? size : it->second.first;
        std::size_t hi = it == delta_->end() ? size : it->second.second;
        if (s.scan_ordinal == delta_scan_) return {lo, hi};
        if (s.scan_ordinal < delta_scan_) return {0, lo};
        return {0, hi};
    }

    void step(std::size_t i) {
        CompiledRule& r = *current_;
        if (i == r.steps.size()) {
            emit(r);
            return;
        }
        const Step& s = r.steps[i];
        switch (s.k) {
        case Step::K::scan: {
            auto [lo, hi] = range(s);
            if (lo >= hi) return;
            refresh(*s.index, *s.rel);
            std::size_t h = 0;
            for (const auto& leaf : s.key) h = combine(h, (leaf.is_slot ? slots_[leaf.slot] : leaf.value).hash());
            auto b = s.index->buckets.find(h);
            if (b == s.index->buckets.end()) return;
            const auto& ids = b->second;
            std::vector<std::uint32_t> trail;
            for (auto it = std::lower_bound(ids.begin(), ids.end(), static_cast<std::uint32_t>(lo));
                 it != ids.end() && *it < hi; ++it) {
                const Term& f = s.rel->facts[*it];
                bool ok = true;
                for (std::size_t a = 0; a < s.pat.args.size() && ok; ++a) ok = unify(s.pat.args[a], f.arg(a), trail);
                if (ok && f.arity() == s.pat.args.size()) step(i + 1);
                for (auto t : trail) bound_[t] = 0;
                trail.clear();
            }
            return;
        }
        case Step::K::negate:
            if (s.rel->members.count(build(s.pat))) return;
            step(i + 1);
            return;
        case Step::K::compare:
            if (!detail::test_comparison(side(s.lhs), s.op, side(s.rhs))) return;
            step(i + 1);
            return;
        case Step::K::assign: {
            Term v = side(s.lhs);
            if (bound_[s.slot]) {
                if (slots_[s.slot] == v) step(i + 1);
                return;
            }
            slots_[s.slot] = v;
            bound_[s.slot] = 1;
            step(i + 1);
            bound_[s.slot] = 0;
            return;
        }
        }
    }

    void emit(CompiledRule& r) {
        ++firings_;
        Term head = build(r.head);
        bool known = r.head_rel->members.count(head) != 0;
        auto p = pending_index_.find(head);
        if (!known && p == pending_index_.end()) {
            pending_index_.emplace(head, pending_.size());
            pending_.push_back(Pending{head, r.head_rel, r.hidden, Derivation{static_cast<std::uint32_t>(r.source), slots_}});
            return;
        }
        if (options_.all_proofs && !r.hidden) {
            Derivation d{static_cast<std::uint32_t>(r.source), slots_};
            if (p != pending_index_.end()) {
                extra_.emplace_back(head, std::move(d));
            } else if (store_.derivations.count(head)) {
                store_.derivations[head].push_back(std::move(d));
            }
        }
    }

    std::size_t commit(EvalStats& stats) {
        std::sort(pending_.begin(), pending_.end(),
                  [](const Pending& a, const Pending& b) { return compare(a.fact, b.fact) < 0; });
        for (auto& p : pending_) {
            p.rel->add(p.fact);
            if (p.hidden) continue;
            store_.derivations[p.fact].push_back(std::move(p.derivation));
            emitted.push_back(p.fact);
            ++stats.facts_derived;
        }
        for (auto& [f, d] : extra_) store_.derivations[f].push_back(std::move(d));
        std::size_t n = pending_.size();
        pending_.clear();
        pending_index_.clear();
        extra_.clear();
        stats.rule_firings += firings_;
        firings_ = 0;
        return n;
    }

    const EvalOptions& options_;
    detail::ProofStore& store_;
    std::unordered_map<PredicateKey, Relation, PredicateKeyHash> relations_;

    std::vector<Pending> pending_;
    std::unordered_map<Term, std::size_t, TermHash> pending_index_;
    std::vector<std::pair<Term, Derivation>> extra_;
    std::size_t firings_ = 0;

    CompiledRule* current_ = nullptr;
    const std::map<Relation*, std::pair<std::size_t, std::size_t>>* delta_ = nullptr;
    std::size_t delta_scan_ = 0;
    std::vector<Term> slots_;
    std::vector<char> bound_;
};

EvalResult run(const Program& program, const FactBase& base, std::shared_ptr<const EvalResult> prior,
               const EvalOptions& options) {
    check_mixed_predicates(program);
    stratify(program);
    detail::RewrittenRules rw = detail::rewrite_demands(program.rules);
    Stratification strata = detail::stratify_rules(rw.rules, false);

    auto store = std::make_shared<detail::ProofStore>();
    store->rules = program.rules;
    for (std::size_t i = 0; i < program.rules.size(); ++i) store->rule_ids.push_back(rule_id(program.rules, i));
    store->slot_names.resize(program.rules.size());

    EvalResult result;
    result.parent = prior;
    Evaluator ev(options, *store);

    FactBase input = base;
    for (const auto& f : program.facts) input.insert(f);
    ev.seed(input);

    for (const auto& stratum : strata.strata) {
        std::set<PredicateKey> members(stratum.begin(), stratum.end());
        std::vector<CompiledRule> compiled;
        for (std::size_t i = 0; i < rw.rules.size(); ++i) {
            if (!members.count(rw.rules[i].head.predicate())) continue;
            bool hidden = rw.hidden.count(rw.rules[i].head.predicate()) != 0;
            compiled.push_back(ev.compile(rw.rules[i], rw.source[i], hidden, members));
            if (!hidden) store->slot_names[rw.source[i]] = compiled.back().slot_names;
        }
        ev.run_stratum(compiled, members, result.stats);
    }

    result.derived = std::move(input);
    for (const auto& f : ev.emitted) result.derived.insert(f);
    result.proofs = std::move(store);
    return result;
}

} // namespace

const std::vector<Rule>& EvalResult::rules() const {
    static const std::vector<Rule> none;
    return proofs ? proofs->rules : none;
}

bool EvalResult::is_extensional(const Fact& fact) const {
    if (!derived.contains(fact)) return false;
    if (proofs && proofs->derivations.count(fact)) return false;
    if (parent && parent->derived.contains(fact)) return parent->is_extensional(fact);
    return true;
}

std::vector<Fact> EvalResult::select(const std::vector<PredicateKey>& shows) const {
    std::vector<Fact> out;
    for (const auto& k : shows) {
        auto b = derived.bucket(k);
        out.insert(out.end(), b.begin(), b.end());
    }
    std::sort(out.begin(), out.end(), TermLess{});
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

EvalResult evaluate(const Program& program, const FactBase& base, const EvalOptions& options) {
    return run(program, base, nullptr, options);
}

EvalResult evaluate(const Program& program, std::shared_ptr<const EvalResult> prior, const EvalOptions& options) {
    for (const auto& r : program.rules) {
        auto key = r.head.predicate();
        for (const EvalResult* layer = prior.get(); layer; layer = layer->parent.get()) {
            for (const auto& pr : layer->rules()) {
                if (pr.head.predicate() == key)
                    throw ConflictError("predicate " + key.to_string() + " is already defined by the base layer");
            }
        }
    }
    const FactBase& base = prior->derived;
    return run(program, base, prior, options);
}

namespace {

bool is_param(const Fact& f) { return f.is_compound() && f.name() == "param" && f.arity() == 2; }

} // namespace

Program merge_query(const Program& program, const Program& query) {
    std::set<PredicateKey> defined;
    for (const auto& r : program.rules) defined.insert(r.head.predicate());
    for (const auto& f : program.facts) {
        if (!is_param(f)) defined.insert(f.predicate());
    }
    for (const auto& r : query.rules) {
        if (defined.count(r.head.predicate()))
            throw ConflictError("query redefines predicate " + r.head.predicate().to_string());
    }
    std::set<Term, TermLess> overridden;
    for (const auto& f : query.facts) {
        if (is_param(f)) overridden.insert(f.arg(0));
    }
    Program merged;
    for (const auto& f : program.facts) {
        if (is_param(f) && overridden.count(f.arg(0))) continue;
        merged.facts.push_back(f);
    }
    merged.facts.insert(merged.facts.end(), query.facts.begin(), query.facts.end());
    merged.rules = program.rules;
    merged.rules.insert(merged.rules.end(), query.rules.begin(), query.rules.end());
    merged.shows = query.shows;
    return merged;
}

std::vector<Fact> solve(const Program& program, const Program& query, const FactBase& base) {
    Program merged = merge_query(program, query);
    return evaluate(merged, base).select(query.shows);
}

} // namespace esn
