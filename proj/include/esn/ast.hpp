#pragma once

#include "esn/fact_base.hpp"
#include "esn/term.hpp"

#include <memory>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace esn {

/// Arithmetic expression over terms. Leaves are terms (numbers, variables,
/// and, for equality tests, symbols/strings/compounds).
class Expr {
public:
    enum class Op : std::uint8_t { leaf, add, sub, mul, div, pow, neg, sqrt };

    Expr() = default;
    static Expr leaf(Term t);
    static Expr binary(Op op, Expr lhs, Expr rhs);
    static Expr unary(Op op, Expr operand);

    Op op() const { return op_; }
    bool is_leaf() const { return op_ == Op::leaf; }
    const Term& term() const { return term_; }
    const Expr& lhs() const { return *lhs_; }
    const Expr& rhs() const { return *rhs_; }
    /// Operand of neg/sqrt.
    const Expr& operand() const { return *lhs_; }

    void collect_variables(std::set<std::string>& out) const;
    std::string to_string() const;

    friend bool operator==(const Expr& a, const Expr& b);

private:
    Op op_ = Op::leaf;
    Term term_;
    std::shared_ptr<const Expr> lhs_;
    std::shared_ptr<const Expr> rhs_;
};

enum class CmpOp : std::uint8_t { lt, le, gt, ge, eq, ne };

const char* to_string(CmpOp op);

struct PositiveLiteral {
    Term atom;
    friend bool operator==(const PositiveLiteral&, const PositiveLiteral&) = default;
};

/// Negation as failure: `not atom`.
struct NegativeLiteral {
    Term atom;
    friend bool operator==(const NegativeLiteral&, const NegativeLiteral&) = default;
};

struct Comparison {
    Expr lhs;
    CmpOp op = CmpOp::eq;
    Expr rhs;
    friend bool operator==(const Comparison&, const Comparison&) = default;
};

/// `Var = expr` where Var is unbound at that point of the body.
struct Assignment {
    std::string var;
    Expr expr;
    friend bool operator==(const Assignment&, const Assignment&) = default;
};

using Literal = std::variant<PositiveLiteral, NegativeLiteral, Comparison, Assignment>;

std::string format_literal(const Literal& lit);
void collect_variables(const Literal& lit, std::set<std::string>& out);

struct SourceLocation {
    std::size_t line = 0;
    std::size_t column = 0;
};

struct Rule {
    Term head;
    std::vector<Literal> body;
    SourceLocation location;

    /// Structural equality (ignores location).
    friend bool operator==(const Rule& a, const Rule& b) { return a.head == b.head && a.body == b.body; }
};

std::string format_rule(const Rule& rule);
/// Single-line rendering used in diagnostics.
std::string format_rule_inline(const Rule& rule);

struct Program {
    std::vector<Fact> facts;
    std::vector<Rule> rules;
    std::vector<PredicateKey> shows;
    /// Export-policy directives (`#allow f/n.`, `#deny f/n.`).
    std::vector<PredicateKey> allows;
    std::vector<PredicateKey> denies;

    bool empty() const {
        return facts.empty() && rules.empty() && shows.empty() && allows.empty() && denies.empty();
    }

    friend bool operator==(const Program&, const Program&) = default;
};

/// Serializes in the concrete ESN syntax; parse_program(format_program(p)) == p.
std::string format_program(const Program& program);

} // namespace esn
