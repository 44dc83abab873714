#pragma once

#include "esn/term.hpp"

#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace esn {

/// A fact is a ground callable term (symbol or compound).
using Fact = Term;

/// Deduplicated set of ground facts with per-predicate buckets.
///
/// Buckets keep insertion order, so iteration is deterministic for identical
/// insertion sequences. holds/2 and occurs/2 facts are additionally indexed by
/// the predicate of their first argument (the fluent or event).
///
/// Single writer during construction; concurrent readers afterwards.
class FactBase {
public:
    /// Returns true iff `fact` was not present. Throws NonGroundFact.
    bool insert(const Fact& fact);
    bool contains(const Fact& fact) const { return set_.count(fact) != 0; }

    std::size_t size() const { return facts_.size(); }
    bool empty() const { return facts_.empty(); }

    /// All facts in insertion order.
    const std::vector<Fact>& facts() const { return facts_; }
    std::span<const Fact> bucket(const PredicateKey& key) const;
    /// holds/occurs facts whose first argument has predicate `inner`.
    std::span<const Fact> fluent_bucket(const PredicateKey& outer, const PredicateKey& inner) const;
    std::vector<PredicateKey> predicates() const;

    /// Facts in the canonical term order.
    std::vector<Fact> sorted() const;

    /// Inserts every fact of `other`; returns the number newly added.
    std::size_t merge(const FactBase& other);

    /// Compares as sets.
    friend bool operator==(const FactBase& a, const FactBase& b);

private:
    struct FluentKey {
        PredicateKey outer;
        PredicateKey inner;
        friend bool operator==(const FluentKey&, const FluentKey&) = default;
    };
    struct FluentKeyHash {
        std::size_t operator()(const FluentKey& k) const noexcept {
            PredicateKeyHash h;
            return h(k.outer) * 1000003 ^ h(k.inner);
        }
    };

    std::vector<Fact> facts_;
    std::unordered_set<Fact, TermHash> set_;
    std::unordered_map<PredicateKey, std::vector<Fact>, PredicateKeyHash> buckets_;
    std::unordered_map<FluentKey, std::vector<Fact>, FluentKeyHash> fluent_buckets_;
};

/// True for holds/2 and occurs/2.
bool is_temporal_wrapper(const PredicateKey& key);

/// Signature used for classification: the inner fluent/event predicate for
/// holds/occurs facts with a callable first argument, else the fact's own.
PredicateKey fact_signature(const Fact& fact);

} // namespace esn
