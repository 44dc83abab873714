#pragma once

#include "esn/ast.hpp"

#include <string_view>

namespace esn {

/// Parses ESN source: facts, rules, `#show f/n.`, `#allow f/n.`, `#deny f/n.`
/// and `%` line comments. Throws SyntaxError, SafetyError, MixedPredicateError.
Program parse_program(std::string_view source);

/// Per-rule checks only: demand-bound rules may rely on call sites that live
/// in another fragment (rule patches, policy files).
Program parse_fragment(std::string_view source);

/// Like parse_program but requires at least one `#show` (QueryError otherwise).
Program parse_query(std::string_view source);

/// Parses a single expression such as "sqrt((X2-X1)^2 + 1)".
Expr parse_expr(std::string_view source);

} // namespace esn
