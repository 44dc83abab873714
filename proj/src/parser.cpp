#include "esn/parser.hpp"

#include "esn/analysis.hpp"
#include "esn/error.hpp"

#include <cctype>
#include <set>
#include <string>
#include <vector>

namespace esn {

namespace {

enum class Tok {
    end, ident, variable, number, string,
    lparen, rparen, comma, dot, if_,
    lt, le, gt, ge, eq, ne,
    plus, minus, star, slash, caret,
    directive
};

struct Token {
    Tok kind = Tok::end;
    std::string text;
    std::size_t line = 1;
    std::size_t column = 1;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_blank();
            Token t;
            t.line = line_;
            t.column = col_;
            if (pos_ >= src_.size()) {
                out.push_back(t);
                return out;
            }
            char c = src_[pos_];
            if (std::islower(static_cast<unsigned char>(c))) {
                t.kind = Tok::ident;
                t.text = take_word();
            } else if (std::isupper(static_cast<unsigned char>(c)) || c == '_') {
                t.kind = Tok::variable;
                t.text = take_word();
            } else if (std::isdigit(static_cast<unsigned char>(c))) {
                t.kind = Tok::number;
                t.text = take_number(t);
            } else if (c == '"') {
                t.kind = Tok::string;
                t.text = take_string(t);
            } else if (c == '#') {
                advance();
                if (pos_ >= src_.size() || !std::islower(static_cast<unsigned char>(src_[pos_])))
                    throw SyntaxError(t.line, t.column, "directive name after '#'");
                t.kind = Tok::directive;
                t.text = take_word();
            } else {
                t.kind = punct(t);
            }
            out.push_back(std::move(t));
        }
    }

private:
    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else if ((static_cast<unsigned char>(src_[pos_]) & 0xC0) != 0x80) {
            ++col_;
        }
        ++pos_;
    }

    void skip_blank() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '%') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    std::string take_word() {
        std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            advance();
        return std::string(src_.substr(start, pos_ - start));
    }

    std::string take_number(const Token& t) {
        std::size_t start = pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
        if (pos_ + 1 < src_.size() && src_[pos_] == '.' &&
            std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))) {
            advance();
            std::size_t frac = 0;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                advance();
                ++frac;
            }
            if (frac > 3) throw SyntaxError(t.line, t.column, "number with at most 3 decimal places");
        }
        if (pos_ < src_.size() && (std::isalpha(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            throw SyntaxError(t.line, t.column, "number");
        return std::string(src_.substr(start, pos_ - start));
    }

    std::string take_string(const Token& t) {
        advance();
        std::string out;
        for (;;) {
            if (pos_ >= src_.size() || src_[pos_] == '\n') throw SyntaxError(t.line, t.column, "closing '\"'");
            char c = src_[pos_];
            if (c == '"') {
                advance();
                return out;
            }
            if (c == '\\') {
                advance();
                if (pos_ >= src_.size()) throw SyntaxError(t.line, t.column, "closing '\"'");
                char e = src_[pos_];
                switch (e) {
                case '"': out += '"'; break;
                case '\\': out += '\\'; break;
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                default: throw SyntaxError(line_, col_, "escape \\\" \\\\ \\n or \\t");
                }
                advance();
                continue;
            }
            out += c;
            advance();
        }
    }

    Tok punct(const Token& t) {
        char c = src_[pos_];
        char n = pos_ + 1 < src_.size() ? src_[pos_ + 1] : '\0';
        auto one = [&](Tok k) { advance(); return k; };
        auto two = [&](Tok k) { advance(); advance(); return k; };
        switch (c) {
        case '(': return one(Tok::lparen);
        case ')': return one(Tok::rparen);
        case ',': return one(Tok::comma);
        case '.': return one(Tok::dot);
        case ':':
            if (n == '-') return two(Tok::if_);
            break;
        case '<': return n == '=' ? two(Tok::le) : one(Tok::lt);
        case '>': return n == '=' ? two(Tok::ge) : one(Tok::gt);
        case '=': return one(Tok::eq);
        case '!':
            if (n == '=') return two(Tok::ne);
            break;
        case '+': return one(Tok::plus);
        case '-': return one(Tok::minus);
        case '*': return one(Tok::star);
        case '/': return one(Tok::slash);
        case '^': return one(Tok::caret);
        default: break;
        }
        throw SyntaxError(t.line, t.column, "a term, operator or '.'");
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;
};

const char* describe(Tok k) {
    switch (k) {
    case Tok::end: return "end of input";
    case Tok::ident: return "identifier";
    case Tok::variable: return "variable";
    case Tok::number: return "number";
    case Tok::string: return "string";
    case Tok::lparen: return "'('";
    case Tok::rparen: return "')'";
    case Tok::comma: return "','";
    case Tok::dot: return "'.'";
    case Tok::if_: return "':-'";
    default: return "operator";
    }
}

class Parser {
public:
    explicit Parser(std::string_view src) : toks_(Lexer(src).run()) {}

    Program program() {
        Program p;
        while (peek().kind != Tok::end) statement(p);
        return p;
    }

    Term single_term() {
        Term t = term();
        expect(Tok::end, "end of term");
        return t;
    }

    Expr single_expr() {
        Expr e = expr();
        expect(Tok::end, "end of expression");
        return e;
    }

private:
    const Token& peek(std::size_t k = 0) const {
        std::size_t i = std::min(pos_ + k, toks_.size() - 1);
        return toks_[i];
    }
    const Token& next() {
        const Token& t = toks_[pos_];
        if (pos_ + 1 < toks_.size()) ++pos_;
        return t;
    }
    bool accept(Tok k) {
        if (peek().kind != k) return false;
        next();
        return true;
    }
    const Token& expect(Tok k, const std::string& what) {
        if (peek().kind != k) fail(what);
        return next();
    }
    [[noreturn]] void fail(const std::string& what) const {
        throw SyntaxError(peek().line, peek().column, what);
    }

    void statement(Program& p) {
        if (peek().kind == Tok::directive) {
            directive(p);
            return;
        }
        const Token& start = peek();
        SourceLocation loc{start.line, start.column};
        if (start.kind != Tok::ident) fail("a fact, rule or directive");
        Term head = atom();
        if (accept(Tok::dot)) {
            if (!head.is_ground()) {
                std::set<std::string> vars;
                collect_variables(head, vars);
                throw SafetyError(head.to_string() + ".", *vars.begin());
            }
            p.facts.push_back(head);
            return;
        }
        expect(Tok::if_, "'.' or ':-'");
        Rule r;
        r.head = head;
        r.location = loc;
        do {
            r.body.push_back(literal());
        } while (accept(Tok::comma));
        expect(Tok::dot, "',' or '.'");
        analyze_rule(r);
        p.rules.push_back(std::move(r));
    }

    void directive(Program& p) {
        const Token& d = next();
        std::vector<PredicateKey>* target = nullptr;
        if (d.text == "show") target = &p.shows;
        else if (d.text == "allow") target = &p.allows;
        else if (d.text == "deny") target = &p.denies;
        else throw SyntaxError(d.line, d.column, "#show, #allow or #deny");
        const Token& name = expect(Tok::ident, "predicate name");
        std::string functor = name.text;
        expect(Tok::slash, "'/'");
        const Token& n = expect(Tok::number, "arity");
        if (n.text.find('.') != std::string::npos) throw SyntaxError(n.line, n.column, "integer arity");
        unsigned long arity = 0;
        try {
            arity = std::stoul(n.text);
        } catch (const std::exception&) {
            throw SyntaxError(n.line, n.column, "integer arity");
        }
        expect(Tok::dot, "'.'");
        target->emplace_back(functor, static_cast<std::uint32_t>(arity));
    }

    Term atom() {
        const Token& name = expect(Tok::ident, "predicate name");
        std::string functor = name.text;
        if (functor == "not" || functor == "sqrt") throw SyntaxError(name.line, name.column, "predicate name");
        if (!accept(Tok::lparen)) return Term::symbol(functor);
        std::vector<Term> args;
        do {
            args.push_back(term());
        } while (accept(Tok::comma));
        expect(Tok::rparen, "',' or ')'");
        return Term::compound(functor, std::move(args));
    }

    Numeric number_value(const Token& t, bool negative) {
        auto v = Numeric::parse(negative ? "-" + t.text : t.text);
        if (!v) throw SyntaxError(t.line, t.column, "number in range");
        return *v;
    }

    Term term() {
        const Token& t = peek();
        switch (t.kind) {
        case Tok::number: next(); return Term::number(number_value(t, false));
        case Tok::minus:
            if (peek(1).kind == Tok::number) {
                next();
                const Token& n = next();
                return Term::number(number_value(n, true));
            }
            fail("number after '-'");
        case Tok::variable: next(); return Term::variable(t.text);
        case Tok::string: next(); return Term::string(t.text);
        case Tok::ident: return atom();
        default: fail("a term");
        }
    }

    Literal literal() {
        if (peek().kind == Tok::ident && peek().text == "not" && peek(1).kind == Tok::ident) {
            next();
            return NegativeLiteral{atom()};
        }
        const Token& start = peek();
        Expr lhs = expr();
        CmpOp op;
        switch (peek().kind) {
        case Tok::lt: op = CmpOp::lt; break;
        case Tok::le: op = CmpOp::le; break;
        case Tok::gt: op = CmpOp::gt; break;
        case Tok::ge: op = CmpOp::ge; break;
        case Tok::eq: op = CmpOp::eq; break;
        case Tok::ne: op = CmpOp::ne; break;
        default:
            if (lhs.is_leaf() && lhs.term().is_callable()) return PositiveLiteral{lhs.term()};
            throw SyntaxError(start.line, start.column, "an atom or a comparison");
        }
        next();
        Expr rhs = expr();
        return Comparison{std::move(lhs), op, std::move(rhs)};
    }

    Expr expr() {
        Expr e = mul_expr();
        for (;;) {
            if (accept(Tok::plus)) e = Expr::binary(Expr::Op::add, e, mul_expr());
            else if (accept(Tok::minus)) e = Expr::binary(Expr::Op::sub, e, mul_expr());
            else return e;
        }
    }

    Expr mul_expr() {
        Expr e = unary();
        for (;;) {
            if (accept(Tok::star)) e = Expr::binary(Expr::Op::mul, e, unary());
            else if (accept(Tok::slash)) e = Expr::binary(Expr::Op::div, e, unary());
            else return e;
        }
    }

    Expr unary() {
        if (peek().kind == Tok::minus) {
            if (peek(1).kind == Tok::number && peek(2).kind != Tok::caret) {
                next();
                const Token& n = next();
                return Expr::leaf(Term::number(number_value(n, true)));
            }
            next();
            return Expr::unary(Expr::Op::neg, unary());
        }
        return power();
    }

    Expr power() {
        Expr base = primary();
        if (accept(Tok::caret)) return Expr::binary(Expr::Op::pow, base, unary());
        return base;
    }

    Expr primary() {
        const Token& t = peek();
        switch (t.kind) {
        case Tok::number: next(); return Expr::leaf(Term::number(number_value(t, false)));
        case Tok::variable: next(); return Expr::leaf(Term::variable(t.text));
        case Tok::string: next(); return Expr::leaf(Term::string(t.text));
        case Tok::lparen: {
            next();
            Expr e = expr();
            expect(Tok::rparen, "')'");
            return e;
        }
        case Tok::ident:
            if (t.text == "sqrt" && peek(1).kind == Tok::lparen) {
                next();
                next();
                Expr e = expr();
                expect(Tok::rparen, "')'");
                return Expr::unary(Expr::Op::sqrt, e);
            }
            return Expr::leaf(atom());
        default:
            fail(std::string("an expression, found ") + describe(t.kind));
        }
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

} // namespace

Program parse_program(std::string_view source) {
    Program p = Parser(source).program();
    check_mixed_predicates(p);
    plan_demands(p.rules);
    return p;
}

Program parse_fragment(std::string_view source) { return Parser(source).program(); }

Program parse_query(std::string_view source) {
    Program p = parse_program(source);
    if (p.shows.empty()) throw QueryError("query declares no shown predicate");
    return p;
}

Expr parse_expr(std::string_view source) { return Parser(source).single_expr(); }

Term parse_term(std::string_view text) { return Parser(text).single_term(); }

} // namespace esn
