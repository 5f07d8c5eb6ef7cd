#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "dbtalk/ast.hpp"

namespace dbtalk {

/// Splits a surface string on whitespace. The surface syntax is strictly
/// token-per-word, so this is the whole lexer.
std::vector<std::string> tokenize(std::string_view text);

/// Parses a single query. Accepts redundant parentheses; the canonical form
/// is whatever print() emits. Throws SyntaxError on malformed input.
AstPtr parse(std::string_view text);
AstPtr parse(const std::vector<std::string>& tokens);

/// Parses a filter in isolation (used by the template DSL and tests).
FilterPtr parse_filter(std::string_view text);

}  // namespace dbtalk
