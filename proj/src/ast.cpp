#include "esn/ast.hpp"

namespace esn {

Expr Expr::leaf(Term t) {
    Expr e;
    e.op_ = Op::leaf;
    e.term_ = std::move(t);
    return e;
}

Expr Expr::binary(Op op, Expr lhs, Expr rhs) {
    Expr e;
    e.op_ = op;
    e.lhs_ = std::make_shared<const Expr>(std::move(lhs));
    e.rhs_ = std::make_shared<const Expr>(std::move(rhs));
    return e;
}

Expr Expr::unary(Op op, Expr operand) {
    Expr e;
    e.op_ = op;
    e.lhs_ = std::make_shared<const Expr>(std::move(operand));
    return e;
}

bool operator==(const Expr& a, const Expr& b) {
    if (a.op_ != b.op_) return false;
    switch (a.op_) {
    case Expr::Op::leaf: return a.term_ == b.term_;
    case Expr::Op::neg:
    case Expr::Op::sqrt: return *a.lhs_ == *b.lhs_;
    default: return *a.lhs_ == *b.lhs_ && *a.rhs_ == *b.rhs_;
    }
}

void Expr::collect_variables(std::set<std::string>& out) const {
    if (op_ == Op::leaf) {
        esn::collect_variables(term_, out);
        return;
    }
    lhs_->collect_variables(out);
    if (rhs_) rhs_->collect_variables(out);
}

namespace {

// Binding strength; higher binds tighter.
int precedence(const Expr& e) {
    switch (e.op()) {
    case Expr::Op::add:
    case Expr::Op::sub: return 1;
    case Expr::Op::mul:
    case Expr::Op::div: return 2;
    case Expr::Op::neg: return 3;
    case Expr::Op::pow: return 4;
    case Expr::Op::sqrt: return 5;
    case Expr::Op::leaf:
        // a negative literal reads back as unary minus applied to a number
        if (e.term().is_number() && e.term().as_number() < Numeric{}) return 3;
        return 5;
    }
    return 5;
}

void write_expr(const Expr& e, std::string& out);

void write_wrapped(const Expr& e, bool wrap, std::string& out) {
    if (wrap) out += '(';
    write_expr(e, out);
    if (wrap) out += ')';
}

void write_expr(const Expr& e, std::string& out) {
    switch (e.op()) {
    case Expr::Op::leaf: e.term().write(out); return;
    case Expr::Op::sqrt:
        out += "sqrt(";
        write_expr(e.operand(), out);
        out += ')';
        return;
    case Expr::Op::neg: {
        const Expr& x = e.operand();
        // "-5" would read back as the literal -5, so keep the operator explicit
        bool wrap = precedence(x) < 3 || (x.is_leaf() && x.term().is_number());
        out += '-';
        write_wrapped(x, wrap, out);
        return;
    }
    case Expr::Op::pow:
        write_wrapped(e.lhs(), precedence(e.lhs()) <= 4, out);
        out += '^';
        write_wrapped(e.rhs(), precedence(e.rhs()) < 3, out);
        return;
    default: {
        int p = precedence(e);
        write_wrapped(e.lhs(), precedence(e.lhs()) < p, out);
        switch (e.op()) {
        case Expr::Op::add: out += " + "; break;
        case Expr::Op::sub: out += " - "; break;
        case Expr::Op::mul: out += " * "; break;
        default: out += " / "; break;
        }
        write_wrapped(e.rhs(), precedence(e.rhs()) <= p, out);
        return;
    }
    }
}

} // namespace

std::string Expr::to_string() const {
    std::string out;
    write_expr(*this, out);
    return out;
}

const char* to_string(CmpOp op) {
    switch (op) {
    case CmpOp::lt: return "<";
    case CmpOp::le: return "<=";
    case CmpOp::gt: return ">";
    case CmpOp::ge: return ">=";
    case CmpOp::eq: return "=";
    case CmpOp::ne: return "!=";
    }
    return "?";
}

std::string format_literal(const Literal& lit) {
    struct Visitor {
        std::string operator()(const PositiveLiteral& l) const { return l.atom.to_string(); }
        std::string operator()(const NegativeLiteral& l) const { return "not " + l.atom.to_string(); }
        std::string operator()(const Comparison& c) const {
            return c.lhs.to_string() + " " + to_string(c.op) + " " + c.rhs.to_string();
        }
        std::string operator()(const Assignment& a) const { return a.var + " = " + a.expr.to_string(); }
    };
    return std::visit(Visitor{}, lit);
}

void collect_variables(const Literal& lit, std::set<std::string>& out) {
    struct Visitor {
        std::set<std::string>& out;
        void operator()(const PositiveLiteral& l) const { esn::collect_variables(l.atom, out); }
        void operator()(const NegativeLiteral& l) const { esn::collect_variables(l.atom, out); }
        void operator()(const Comparison& c) const {
            c.lhs.collect_variables(out);
            c.rhs.collect_variables(out);
        }
        void operator()(const Assignment& a) const {
            out.insert(a.var);
            a.expr.collect_variables(out);
        }
    };
    std::visit(Visitor{out}, lit);
}

std::string format_rule(const Rule& rule) {
    std::string out = rule.head.to_string();
    if (rule.body.empty()) return out + ".";
    out += " :-\n";
    for (std::size_t i = 0; i < rule.body.size(); ++i) {
        out += "    " + format_literal(rule.body[i]);
        out += (i + 1 == rule.body.size()) ? "." : ",\n";
    }
    return out;
}

std::string format_rule_inline(const Rule& rule) {
    std::string out = rule.head.to_string();
    if (rule.body.empty()) return out + ".";
    out += " :- ";
    for (std::size_t i = 0; i < rule.body.size(); ++i) {
        if (i) out += ", ";
        out += format_literal(rule.body[i]);
    }
    return out + ".";
}

std::string format_program(const Program& program) {
    std::vector<std::string> sections;
    auto directives = [](const char* name, const std::vector<PredicateKey>& keys) {
        std::string s;
        for (const auto& k : keys) s += std::string("#") + name + " " + k.to_string() + ".\n";
        return s;
    };
    std::string header = directives("allow", program.allows) + directives("deny", program.denies);
    if (!header.empty()) sections.push_back(header);
    if (!program.facts.empty()) {
        std::string s;
        for (const auto& f : program.facts) s += f.to_string() + ".\n";
        sections.push_back(s);
    }
    for (const auto& r : program.rules) sections.push_back(format_rule(r) + "\n");
    if (!program.shows.empty()) sections.push_back(directives("show", program.shows));

    std::string out;
    for (std::size_t i = 0; i < sections.size(); ++i) {
        if (i) out += "\n";
        out += sections[i];
    }
    return out;
}

} // namespace esn
