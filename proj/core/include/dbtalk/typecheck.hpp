#pragma once

#include <map>
#include <string>

#include "dbtalk/ast.hpp"
#include "dbtalk/schema.hpp"

namespace dbtalk {

/// What a typed hole stands for, recovered from its context: the field it is
/// compared against, and whether an exact match is required (eq/contains) or
/// any in-range value keeps the comparison satisfiable (ge/le).
struct PlaceholderInfo {
  TypeTag type;
  std::string table;   // owning table, empty for bare numbers (indices, ranks)
  std::string field;   // compared field, "name" for lookups
  bool exact = false;  // eq / substr / contains / in_array / lookup
};

using PlaceholderMap = std::map<int, PlaceholderInfo>;

/// Computes the output row type, enforcing every typing rule. Throws
/// TypeError naming the first violating node in pre-order. When `placeholders`
/// is given, the types of VALUE_k holes are collected into it.
RowType typecheck(const QueryAst& query, const NlSchema& schema,
                  PlaceholderMap* placeholders = nullptr);

}  // namespace dbtalk
