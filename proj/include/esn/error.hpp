#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace esn {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NumericOverflow : public Error {
public:
    using Error::Error;
};

class NonGroundFact : public Error {
public:
    explicit NonGroundFact(const std::string& fact)
        : Error("non-ground fact: " + fact) {}
};

class SyntaxError : public Error {
public:
    SyntaxError(std::size_t line, std::size_t column, std::string expected)
        : Error("syntax error at " + std::to_string(line) + ":" + std::to_string(column) +
                ": expected " + expected),
          line(line), column(column), expected(std::move(expected)) {}

    std::size_t line;
    std::size_t column;
    std::string expected;
};

class SafetyError : public Error {
public:
    SafetyError(std::string rule, std::string variable)
        : Error("unsafe variable " + variable + " in rule: " + rule),
          rule(std::move(rule)), variable(std::move(variable)) {}

    std::string rule;
    std::string variable;
};

class MixedPredicateError : public Error {
public:
    explicit MixedPredicateError(std::string predicate)
        : Error("predicate " + predicate + " is both extensional (fact) and intensional (rule head)"),
          predicate(std::move(predicate)) {}

    std::string predicate;
};

class QueryError : public Error {
public:
    using Error::Error;
};

class UnstratifiableError : public Error {
public:
    explicit UnstratifiableError(std::vector<std::string> cycle)
        : Error(make_message(cycle)), cycle(std::move(cycle)) {}

    std::vector<std::string> cycle;

private:
    static std::string make_message(const std::vector<std::string>& cycle) {
        std::string msg = "program is not stratifiable: negation on cycle {";
        for (std::size_t i = 0; i < cycle.size(); ++i) {
            if (i) msg += ", ";
            msg += cycle[i];
        }
        return msg + "}";
    }
};

class NonTerminatingRiskError : public Error {
public:
    explicit NonTerminatingRiskError(const std::string& rule)
        : Error("recursive rule uses an assignment (may not terminate): " + rule) {}
};

class ArithmeticError : public Error {
public:
    ArithmeticError(std::string op, std::string operands, std::string location = {})
        : Error("arithmetic error in " + op + " (" + operands + ")" +
                (location.empty() ? std::string{} : " at " + location)),
          op(std::move(op)), operands(std::move(operands)), location(std::move(location)) {}

    std::string op;
    std::string operands;
    std::string location;
};

class ConflictError : public Error {
public:
    using Error::Error;
};

class NotDerivedError : public Error {
public:
    explicit NotDerivedError(const std::string& fact) : Error("fact not derived: " + fact) {}
};

class UnknownRuleset : public Error {
public:
    explicit UnknownRuleset(const std::string& name) : Error("unknown ruleset: " + name) {}
};

class RedefinitionError : public Error {
public:
    explicit RedefinitionError(const std::string& predicate)
        : Error("predicate redefined by more than one ruleset: " + predicate) {}
};

class SchemaError : public Error {
public:
    SchemaError(std::size_t record, std::string field, const std::string& detail = {})
        : Error("schema error at line " + std::to_string(record) + ", field '" + field + "'" +
                (detail.empty() ? std::string{} : ": " + detail)),
          record(record), field(std::move(field)) {}

    std::size_t record;
    std::string field;
};

class NonMonotonicTimeError : public Error {
public:
    using Error::Error;
};

class GridError : public Error {
public:
    using Error::Error;
};

class MissingGridError : public Error {
public:
    using Error::Error;
};

class UnknownScenarioId : public Error {
public:
    explicit UnknownScenarioId(const std::string& id) : Error("unknown scenario id: " + id) {}
};

class PolicyError : public Error {
public:
    using Error::Error;
};

class LeakError : public Error {
public:
    explicit LeakError(const std::string& fact) : Error("sensitive fact would be exported: " + fact), fact(fact) {}
    std::string fact;
};

class PatchError : public Error {
public:
    using Error::Error;
};

} // namespace esn
