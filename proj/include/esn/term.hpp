#pragma once

#include "esn/numeric.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace esn {

/// Returns the canonical copy of `text`. Interned strings are never freed, so
/// pointer equality is string equality. Thread-safe.
const std::string* intern(std::string_view text);

/// Predicate identity: functor name plus arity (p/2 and p/3 are unrelated).
struct PredicateKey {
    const std::string* name = nullptr;
    std::uint32_t arity = 0;

    PredicateKey() = default;
    PredicateKey(const std::string* name, std::uint32_t arity) : name(name), arity(arity) {}
    PredicateKey(std::string_view name, std::uint32_t arity) : name(intern(name)), arity(arity) {}

    std::string to_string() const { return *name + "/" + std::to_string(arity); }

    friend bool operator==(const PredicateKey&, const PredicateKey&) = default;
    /// Orders by name text, then arity.
    friend bool operator<(const PredicateKey& a, const PredicateKey& b) {
        if (a.name != b.name) return *a.name < *b.name;
        return a.arity < b.arity;
    }
};

struct PredicateKeyHash {
    std::size_t operator()(const PredicateKey& k) const noexcept {
        return std::hash<const void*>{}(k.name) * 31 + k.arity;
    }
};

/// Immutable logical term. Copies share structure.
class Term {
public:
    enum class Kind : std::uint8_t { number, symbol, string, variable, compound };

    Term() : Term(Numeric{}) {}

    static Term number(Numeric value) { return Term(value); }
    static Term symbol(std::string_view name);
    static Term string(std::string_view text);
    static Term variable(std::string_view name);
    /// A compound with no arguments is the symbol `functor`.
    static Term compound(std::string_view functor, std::vector<Term> args);
    static Term compound(const std::string* functor, std::vector<Term> args);

    Kind kind() const { return kind_; }
    bool is_number() const { return kind_ == Kind::number; }
    bool is_symbol() const { return kind_ == Kind::symbol; }
    bool is_string() const { return kind_ == Kind::string; }
    bool is_variable() const { return kind_ == Kind::variable; }
    bool is_compound() const { return kind_ == Kind::compound; }
    /// Symbols and compounds can stand as atoms.
    bool is_callable() const { return kind_ == Kind::symbol || kind_ == Kind::compound; }

    Numeric as_number() const { return number_; }
    /// Symbol name, variable name, string text, or compound functor.
    const std::string& name() const { return *name_; }
    const std::string* name_ptr() const { return name_; }

    std::span<const Term> args() const {
        if (!args_) return {};
        return {args_->data(), args_->size()};
    }
    std::size_t arity() const { return args_ ? args_->size() : 0; }
    const Term& arg(std::size_t i) const { return (*args_)[i]; }

    bool is_ground() const { return ground_; }
    std::size_t hash() const { return hash_; }

    /// Only meaningful for callable terms.
    PredicateKey predicate() const { return {name_, static_cast<std::uint32_t>(arity())}; }

    std::string to_string() const;
    void write(std::string& out) const;

    friend bool operator==(const Term& a, const Term& b);

private:
    explicit Term(Numeric value);

    Kind kind_;
    bool ground_ = true;
    const std::string* name_ = nullptr;
    Numeric number_{};
    std::shared_ptr<const std::vector<Term>> args_;
    std::size_t hash_ = 0;
};

/// Total order over terms: numbers < symbols/compounds < strings < variables.
/// Symbols and compounds are ordered by functor name, then arity, then
/// arguments left to right. Independent of interning order.
int compare(const Term& a, const Term& b);

struct TermLess {
    bool operator()(const Term& a, const Term& b) const { return compare(a, b) < 0; }
};

struct TermHash {
    std::size_t operator()(const Term& t) const noexcept { return t.hash(); }
};

/// Writes `text` as a double-quoted literal with escapes.
std::string quote(std::string_view text);

/// Collects variable names occurring anywhere in `t`.
void collect_variables(const Term& t, std::set<std::string>& out);

/// Variable bindings; a variable maps to a ground term.
class Substitution {
public:
    Substitution() = default;
    Substitution(std::initializer_list<std::pair<const std::string, Term>> init) : bindings_(init) {}

    const Term* find(const std::string& var) const {
        auto it = bindings_.find(var);
        return it == bindings_.end() ? nullptr : &it->second;
    }
    void bind(const std::string& var, Term value) { bindings_.insert_or_assign(var, std::move(value)); }
    bool contains(const std::string& var) const { return bindings_.count(var) != 0; }
    std::size_t size() const { return bindings_.size(); }
    bool empty() const { return bindings_.empty(); }

    auto begin() const { return bindings_.begin(); }
    auto end() const { return bindings_.end(); }

    std::string to_string() const;

    friend bool operator==(const Substitution&, const Substitution&) = default;

private:
    std::map<std::string, Term> bindings_;
};

/// Minimal extension of `seed` under which `pattern` equals `ground`.
std::optional<Substitution> match(const Term& pattern, const Term& ground, const Substitution& seed = {});

/// Replaces bound variables; unbound ones pass through.
Term apply(const Substitution& sub, const Term& t);

/// apply(compose(a, b), t) == apply(b, apply(a, t)).
Substitution compose(const Substitution& a, const Substitution& b);

/// Parses a ground or non-ground term (e.g. "holds(position(car_01, 15.2, 45.8, 0.5), 1)").
/// Defined by the parser module.
Term parse_term(std::string_view text);

} // namespace esn

template <>
struct std::hash<esn::Term> {
    std::size_t operator()(const esn::Term& t) const noexcept { return t.hash(); }
};
