#pragma once

#include <string>
#include <vector>

#include "dbtalk/ast.hpp"

namespace dbtalk {

/// Canonical token stream of a query. parse(print(q)) == q for every
/// well-formed query, and print is a pure function of the tree.
std::vector<std::string> print_tokens(const QueryAst& query);
std::vector<std::string> print_tokens(const Filter& filter);
std::vector<std::string> print_tokens(const Expr& expr);
std::vector<std::string> print_tokens(const Value& value);

/// Tokens joined by single spaces, no trailing whitespace.
std::string print(const QueryAst& query);
std::string print(const Filter& filter);

}  // namespace dbtalk
