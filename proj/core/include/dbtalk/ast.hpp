#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dbtalk/value.hpp"

namespace dbtalk {

struct QueryAst;
struct Filter;
struct Expr;
using AstPtr = std::shared_ptr<const QueryAst>;
using FilterPtr = std::shared_ptr<const Filter>;
using ExprPtr = std::shared_ptr<const Expr>;

enum class CmpOp { eq, ge, le, substr, contains, in_array };
enum class AggOp { count, sum, avg, min, max };
enum class SortDir { asc, desc };

const char* to_string(CmpOp op);
const char* to_string(AggOp op);
const char* to_string(SortDir dir);
std::optional<AggOp> agg_op_from_string(const std::string& s);

// --- filters ---------------------------------------------------------------

struct FTrue {};
struct FFalse {};
struct FNot {
  FilterPtr inner;
};
struct FAnd {
  FilterPtr lhs, rhs;
};
struct FOr {
  FilterPtr lhs, rhs;
};
struct FCmp {
  Value lhs;
  CmpOp op = CmpOp::eq;
  Value rhs;
};
/// `exists ( subquery , inner )`: keeps an outer row when some row of the
/// subquery, merged over the outer row (subquery fields shadowing), satisfies
/// the inner filter.
struct FExists {
  AstPtr subquery;
  FilterPtr inner;
};

struct Filter {
  std::variant<FTrue, FFalse, FNot, FAnd, FOr, FCmp, FExists> node;
};

// --- row expressions --------------------------------------------------------

enum class ArithOp { add, sub, mul, div };

struct EVal {
  Value value;
};
struct EArith {
  ArithOp op = ArithOp::add;
  ExprPtr lhs, rhs;
};
struct EDistance {
  ExprPtr lhs, rhs;
};
/// Aggregation over an array-typed field of the current row, e.g. `count ( review )`.
struct EAggArray {
  AggOp op = AggOp::count;
  std::string field;
};

struct Expr {
  std::variant<EVal, EArith, EDistance, EAggArray> node;
};

// --- queries ----------------------------------------------------------------

struct TableRef {
  std::string table;
};
struct Selection {
  AstPtr inner;
  FilterPtr filter;
};
struct Projection {
  std::vector<std::string> fields;  // nonempty
  AstPtr inner;
};
struct Aggregation {
  AggOp op = AggOp::count;
  std::optional<std::string> field;  // absent iff op == count
  AstPtr inner;
};
struct Computation {
  ExprPtr expr;
  std::optional<std::string> alias;  // default name derived from the operator
  AstPtr inner;
};
struct Sort {
  std::string field;
  SortDir dir = SortDir::asc;
  AstPtr inner;
};
struct Index {
  AstPtr inner;
  Value position;  // 1-based
};
struct Slice {
  AstPtr inner;
  Value from, to;  // 1-based, inclusive
};
struct Join {
  AstPtr left, right;  // right side shadows on field collisions
};

struct QueryAst {
  std::variant<TableRef, Selection, Projection, Aggregation, Computation, Sort,
               Index, Slice, Join>
      node;
};

bool operator==(const QueryAst& a, const QueryAst& b);
bool operator==(const Filter& a, const Filter& b);
bool operator==(const Expr& a, const Expr& b);
inline bool operator!=(const QueryAst& a, const QueryAst& b) { return !(a == b); }

/// Field name a computation introduces when no alias is given:
/// distance -> "distance", array aggregates -> the operator name,
/// plain values -> the field name or "value", arithmetic -> "result".
std::string default_computation_name(const Expr& expr);

/// Structural copy with every Placeholder index (including lookup slots)
/// shifted by `offset`; used when derivations are composed.
AstPtr shift_placeholders(const AstPtr& ast, int offset);
FilterPtr shift_placeholders(const FilterPtr& filter, int offset);
Value shift_placeholders(const Value& value, int offset);

// Convenience constructors; these keep template code and tests readable.
namespace build {

AstPtr table(std::string name);
AstPtr where(AstPtr inner, FilterPtr filter);
AstPtr project(std::vector<std::string> fields, AstPtr inner);
AstPtr aggregate(AggOp op, std::optional<std::string> field, AstPtr inner);
AstPtr compute(ExprPtr expr, std::optional<std::string> alias, AstPtr inner);
AstPtr sort(std::string field, SortDir dir, AstPtr inner);
AstPtr index(AstPtr inner, Value position);
AstPtr slice(AstPtr inner, Value from, Value to);
AstPtr join(AstPtr left, AstPtr right);

FilterPtr f_true();
FilterPtr f_false();
FilterPtr f_not(FilterPtr inner);
FilterPtr f_and(FilterPtr lhs, FilterPtr rhs);
FilterPtr f_or(FilterPtr lhs, FilterPtr rhs);
FilterPtr cmp(Value lhs, CmpOp op, Value rhs);
FilterPtr exists(AstPtr subquery, FilterPtr inner);

ExprPtr val(Value v);
ExprPtr arith(ArithOp op, ExprPtr lhs, ExprPtr rhs);
ExprPtr distance(ExprPtr lhs, ExprPtr rhs);
ExprPtr agg_array(AggOp op, std::string field);

}  // namespace build

}  // namespace dbtalk
