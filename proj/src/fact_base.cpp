#include "esn/fact_base.hpp"

#include "esn/error.hpp"

#include <algorithm>

namespace esn {

namespace {

const PredicateKey& holds_key() {
    static const PredicateKey k("holds", 2);
    return k;
}

const PredicateKey& occurs_key() {
    static const PredicateKey k("occurs", 2);
    return k;
}

} // namespace

bool is_temporal_wrapper(const PredicateKey& key) {
    return key == holds_key() || key == occurs_key();
}

PredicateKey fact_signature(const Fact& fact) {
    PredicateKey key = fact.predicate();
    if (is_temporal_wrapper(key) && fact.arg(0).is_callable()) return fact.arg(0).predicate();
    return key;
}

bool FactBase::insert(const Fact& fact) {
    if (!fact.is_ground()) throw NonGroundFact(fact.to_string());
    if (!fact.is_callable()) throw Error("fact must be a symbol or compound term: " + fact.to_string());
    if (!set_.insert(fact).second) return false;
    facts_.push_back(fact);
    PredicateKey key = fact.predicate();
    buckets_[key].push_back(fact);
    if (is_temporal_wrapper(key) && fact.arg(0).is_callable()) {
        fluent_buckets_[FluentKey{key, fact.arg(0).predicate()}].push_back(fact);
    }
    return true;
}

std::span<const Fact> FactBase::bucket(const PredicateKey& key) const {
    auto it = buckets_.find(key);
    if (it == buckets_.end()) return {};
    return it->second;
}

std::span<const Fact> FactBase::fluent_bucket(const PredicateKey& outer, const PredicateKey& inner) const {
    auto it = fluent_buckets_.find(FluentKey{outer, inner});
    if (it == fluent_buckets_.end()) return {};
    return it->second;
}

std::vector<PredicateKey> FactBase::predicates() const {
    std::vector<PredicateKey> keys;
    keys.reserve(buckets_.size());
    for (const auto& [k, v] : buckets_) keys.push_back(k);
    std::sort(keys.begin(), keys.end());
    return keys;
}

std::vector<Fact> FactBase::sorted() const {
    std::vector<Fact> out = facts_;
    std::sort(out.begin(), out.end(), TermLess{});
    return out;
}

std::size_t FactBase::merge(const FactBase& other) {
    std::size_t added = 0;
    for (const auto& f : other.facts_) added += insert(f) ? 1 : 0;
    return added;
}

bool operator==(const FactBase& a, const FactBase& b) {
    if (a.size() != b.size()) return false;
    for (const auto& f : a.facts_) {
        if (!b.contains(f)) return false;
    }
    return true;
}

} // namespace esn
