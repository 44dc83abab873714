#include "esn/term.hpp"

#include <mutex>
#include <unordered_set>

namespace esn {

namespace {

struct InternPool {
    std::mutex mutex;
    std::unordered_set<std::string> strings;
};

InternPool& pool() {
    static InternPool p;
    return p;
}

std::size_t mix(std::size_t h, std::size_t v) {
    return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

int kind_rank(Term::Kind k) {
    switch (k) {
    case Term::Kind::number: return 0;
    case Term::Kind::symbol:
    case Term::Kind::compound: return 1;
    case Term::Kind::string: return 2;
    case Term::Kind::variable: return 3;
    }
    return 4;
}

} // namespace

const std::string* intern(std::string_view text) {
    auto& p = pool();
    std::lock_guard lock(p.mutex);
    auto it = p.strings.emplace(text).first;
    return &*it;
}

Term::Term(Numeric value) : kind_(Kind::number), number_(value) {
    hash_ = mix(0x51, std::hash<std::int64_t>{}(value.milli()));
}

Term Term::symbol(std::string_view name) {
    Term t;
    t.kind_ = Kind::symbol;
    t.name_ = intern(name);
    t.hash_ = mix(0x53, std::hash<const void*>{}(t.name_));
    return t;
}

Term Term::string(std::string_view text) {
    Term t;
    t.kind_ = Kind::string;
    t.name_ = intern(text);
    t.hash_ = mix(0x57, std::hash<const void*>{}(t.name_));
    return t;
}

Term Term::variable(std::string_view name) {
    Term t;
    t.kind_ = Kind::variable;
    t.name_ = intern(name);
    t.ground_ = false;
    t.hash_ = mix(0x56, std::hash<const void*>{}(t.name_));
    return t;
}

Term Term::compound(std::string_view functor, std::vector<Term> args) {
    return compound(intern(functor), std::move(args));
}

Term Term::compound(const std::string* functor, std::vector<Term> args) {
    if (args.empty()) return symbol(*functor);
    Term t;
    t.kind_ = Kind::compound;
    t.name_ = functor;
    std::size_t h = mix(0x53, std::hash<const void*>{}(functor));
    bool ground = true;
    for (const auto& a : args) {
        h = mix(h, a.hash());
        ground = ground && a.is_ground();
    }
    t.ground_ = ground;
    t.hash_ = mix(h, args.size());
    t.args_ = std::make_shared<const std::vector<Term>>(std::move(args));
    return t;
}

bool operator==(const Term& a, const Term& b) {
    if (a.hash_ != b.hash_ || a.kind_ != b.kind_) return false;
    switch (a.kind_) {
    case Term::Kind::number: return a.number_ == b.number_;
    case Term::Kind::symbol:
    case Term::Kind::string:
    case Term::Kind::variable: return a.name_ == b.name_;
    case Term::Kind::compound:
        if (a.name_ != b.name_) return false;
        if (a.args_ == b.args_) return true;
        return *a.args_ == *b.args_;
    }
    return false;
}

int compare(const Term& a, const Term& b) {
    int ra = kind_rank(a.kind());
    int rb = kind_rank(b.kind());
    if (ra != rb) return ra < rb ? -1 : 1;
    switch (a.kind()) {
    case Term::Kind::number:
        if (a.as_number() == b.as_number()) return 0;
        return a.as_number() < b.as_number() ? -1 : 1;
    case Term::Kind::string:
    case Term::Kind::variable:
        if (a.name_ptr() == b.name_ptr()) return 0;
        return a.name() < b.name() ? -1 : 1;
    case Term::Kind::symbol:
    case Term::Kind::compound: {
        if (a.name_ptr() != b.name_ptr()) return a.name() < b.name() ? -1 : 1;
        if (a.arity() != b.arity()) return a.arity() < b.arity() ? -1 : 1;
        for (std::size_t i = 0; i < a.arity(); ++i) {
            int c = compare(a.arg(i), b.arg(i));
            if (c != 0) return c;
        }
        return 0;
    }
    }
    return 0;
}

std::string quote(std::string_view text) {
    std::string out = "\"";
    for (char c : text) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        default: out += c;
        }
    }
    return out + "\"";
}

void Term::write(std::string& out) const {
    switch (kind_) {
    case Kind::number: out += number_.to_string(); break;
    case Kind::symbol:
    case Kind::variable: out += *name_; break;
    case Kind::string: out += quote(*name_); break;
    case Kind::compound:
        out += *name_;
        out += '(';
        for (std::size_t i = 0; i < args_->size(); ++i) {
            if (i) out += ", ";
            (*args_)[i].write(out);
        }
        out += ')';
        break;
    }
}

std::string Term::to_string() const {
    std::string out;
    write(out);
    return out;
}

void collect_variables(const Term& t, std::set<std::string>& out) {
    if (t.is_ground()) return;
    if (t.is_variable()) {
        out.insert(t.name());
        return;
    }
    for (const auto& a : t.args()) collect_variables(a, out);
}

std::string Substitution::to_string() const {
    std::string out = "{";
    bool first = true;
    for (const auto& [var, value] : bindings_) {
        if (!first) out += ", ";
        first = false;
        out += var + "=" + value.to_string();
    }
    return out + "}";
}

namespace {

bool match_into(const Term& pattern, const Term& ground, Substitution& sub) {
    if (pattern.is_variable()) {
        if (const Term* bound = sub.find(pattern.name())) return *bound == ground;
        sub.bind(pattern.name(), ground);
        return true;
    }
    if (pattern.is_ground()) return pattern == ground;
    // non-ground compound
    if (!ground.is_compound() || ground.name_ptr() != pattern.name_ptr() || ground.arity() != pattern.arity()) {
        return false;
    }
    for (std::size_t i = 0; i < pattern.arity(); ++i) {
        if (!match_into(pattern.arg(i), ground.arg(i), sub)) return false;
    }
    return true;
}

} // namespace

std::optional<Substitution> match(const Term& pattern, const Term& ground, const Substitution& seed) {
    Substitution sub = seed;
    if (!match_into(pattern, ground, sub)) return std::nullopt;
    return sub;
}

Term apply(const Substitution& sub, const Term& t) {
    if (t.is_ground()) return t;
    if (t.is_variable()) {
        const Term* bound = sub.find(t.name());
        return bound ? *bound : t;
    }
    std::vector<Term> args;
    args.reserve(t.arity());
    for (const auto& a : t.args()) args.push_back(apply(sub, a));
    return Term::compound(t.name_ptr(), std::move(args));
}

Substitution compose(const Substitution& a, const Substitution& b) {
    Substitution out;
    for (const auto& [var, value] : a) out.bind(var, apply(b, value));
    for (const auto& [var, value] : b) {
        if (!a.contains(var)) out.bind(var, value);
    }
    return out;
}

} // namespace esn
