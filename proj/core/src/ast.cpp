#include "dbtalk/ast.hpp"

#include "dbtalk/errors.hpp"

namespace dbtalk {

const char* to_string(CmpOp op) {
  switch (op) {
    case CmpOp::eq: return "==";
    case CmpOp::ge: return ">=";
    case CmpOp::le: return "<=";
    case CmpOp::substr: return "=~";
    case CmpOp::contains: return "contains";
    case CmpOp::in_array: return "in_array";
  }
  return "?";
}

const char* to_string(AggOp op) {
  switch (op) {
    case AggOp::count: return "count";
    case AggOp::sum: return "sum";
    case AggOp::avg: return "avg";
    case AggOp::min: return "min";
    case AggOp::max: return "max";
  }
  return "?";
}

const char* to_string(SortDir dir) { return dir == SortDir::asc ? "asc" : "desc"; }

std::optional<AggOp> agg_op_from_string(const std::string& s) {
  if (s == "count") return AggOp::count;
  if (s == "sum") return AggOp::sum;
  if (s == "avg") return AggOp::avg;
  if (s == "min") return AggOp::min;
  if (s == "max") return AggOp::max;
  return std::nullopt;
}

namespace {

bool ptr_eq(const AstPtr& a, const AstPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return *a == *b;
}
bool ptr_eq(const FilterPtr& a, const FilterPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return *a == *b;
}
bool ptr_eq(const ExprPtr& a, const ExprPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return *a == *b;
}

}  // namespace

bool operator==(const Expr& a, const Expr& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, EVal>) {
          return x.value == y.value;
        } else if constexpr (std::is_same_v<T, EArith>) {
          return x.op == y.op && ptr_eq(x.lhs, y.lhs) && ptr_eq(x.rhs, y.rhs);
        } else if constexpr (std::is_same_v<T, EDistance>) {
          return ptr_eq(x.lhs, y.lhs) && ptr_eq(x.rhs, y.rhs);
        } else {
          static_assert(std::is_same_v<T, EAggArray>);
          return x.op == y.op && x.field == y.field;
        }
      },
      a.node);
}

bool operator==(const Filter& a, const Filter& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, FTrue> || std::is_same_v<T, FFalse>) {
          (void)y;
          return true;
        } else if constexpr (std::is_same_v<T, FNot>) {
          return ptr_eq(x.inner, y.inner);
        } else if constexpr (std::is_same_v<T, FAnd> || std::is_same_v<T, FOr>) {
          return ptr_eq(x.lhs, y.lhs) && ptr_eq(x.rhs, y.rhs);
        } else if constexpr (std::is_same_v<T, FCmp>) {
          return x.op == y.op && x.lhs == y.lhs && x.rhs == y.rhs;
        } else {
          static_assert(std::is_same_v<T, FExists>);
          return ptr_eq(x.subquery, y.subquery) && ptr_eq(x.inner, y.inner);
        }
      },
      a.node);
}

bool operator==(const QueryAst& a, const QueryAst& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, TableRef>) {
          return x.table == y.table;
        } else if constexpr (std::is_same_v<T, Selection>) {
          return ptr_eq(x.inner, y.inner) && ptr_eq(x.filter, y.filter);
        } else if constexpr (std::is_same_v<T, Projection>) {
          return x.fields == y.fields && ptr_eq(x.inner, y.inner);
        } else if constexpr (std::is_same_v<T, Aggregation>) {
          return x.op == y.op && x.field == y.field && ptr_eq(x.inner, y.inner);
        } else if constexpr (std::is_same_v<T, Computation>) {
          return ptr_eq(x.expr, y.expr) && x.alias == y.alias && ptr_eq(x.inner, y.inner);
        } else if constexpr (std::is_same_v<T, Sort>) {
          return x.field == y.field && x.dir == y.dir && ptr_eq(x.inner, y.inner);
        } else if constexpr (std::is_same_v<T, Index>) {
          return ptr_eq(x.inner, y.inner) && x.position == y.position;
        } else if constexpr (std::is_same_v<T, Slice>) {
          return ptr_eq(x.inner, y.inner) && x.from == y.from && x.to == y.to;
        } else {
          static_assert(std::is_same_v<T, Join>);
          return ptr_eq(x.left, y.left) && ptr_eq(x.right, y.right);
        }
      },
      a.node);
}

std::string default_computation_name(const Expr& expr) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, EDistance>) {
          return "distance";
        } else if constexpr (std::is_same_v<T, EAggArray>) {
          return to_string(x.op);
        } else if constexpr (std::is_same_v<T, EVal>) {
          if (const auto* f = std::get_if<FieldRef>(&x.value.v)) return f->name;
          return "value";
        } else {
          return "result";
        }
      },
      expr.node);
}

Value shift_placeholders(const Value& value, int offset) {
  if (const auto* p = std::get_if<Placeholder>(&value.v))
    return Value(Placeholder{p->index + offset});
  if (const auto* l = std::get_if<LookupRef>(&value.v)) {
    if (l->placeholder >= 0) {
      LookupRef shifted = *l;
      shifted.placeholder += offset;
      return Value(shifted);
    }
    return value;
  }
  if (const auto* arr = std::get_if<ValueList>(&value.v)) {
    ValueList out;
    out.reserve(arr->size());
    for (const auto& item : *arr) out.push_back(shift_placeholders(item, offset));
    return Value(std::move(out));
  }
  return value;
}

namespace {

ExprPtr shift_expr(const ExprPtr& expr, int offset) {
  if (!expr) return expr;
  return std::visit(
      [&](const auto& x) -> ExprPtr {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, EVal>) {
          return std::make_shared<const Expr>(Expr{EVal{shift_placeholders(x.value, offset)}});
        } else if constexpr (std::is_same_v<T, EArith>) {
          return std::make_shared<const Expr>(
              Expr{EArith{x.op, shift_expr(x.lhs, offset), shift_expr(x.rhs, offset)}});
        } else if constexpr (std::is_same_v<T, EDistance>) {
          return std::make_shared<const Expr>(
              Expr{EDistance{shift_expr(x.lhs, offset), shift_expr(x.rhs, offset)}});
        } else {
          return expr;  // EAggArray has no values
        }
      },
      expr->node);
}

}  // namespace

FilterPtr shift_placeholders(const FilterPtr& filter, int offset) {
  if (!filter) return filter;
  return std::visit(
      [&](const auto& x) -> FilterPtr {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, FNot>) {
          return std::make_shared<const Filter>(Filter{FNot{shift_placeholders(x.inner, offset)}});
        } else if constexpr (std::is_same_v<T, FAnd>) {
          return std::make_shared<const Filter>(
              Filter{FAnd{shift_placeholders(x.lhs, offset), shift_placeholders(x.rhs, offset)}});
        } else if constexpr (std::is_same_v<T, FOr>) {
          return std::make_shared<const Filter>(
              Filter{FOr{shift_placeholders(x.lhs, offset), shift_placeholders(x.rhs, offset)}});
        } else if constexpr (std::is_same_v<T, FCmp>) {
          return std::make_shared<const Filter>(Filter{FCmp{
              shift_placeholders(x.lhs, offset), x.op, shift_placeholders(x.rhs, offset)}});
        } else if constexpr (std::is_same_v<T, FExists>) {
          return std::make_shared<const Filter>(Filter{FExists{
              shift_placeholders(x.subquery, offset), shift_placeholders(x.inner, offset)}});
        } else {
          return filter;  // FTrue / FFalse
        }
      },
      filter->node);
}

AstPtr shift_placeholders(const AstPtr& ast, int offset) {
  if (!ast || offset == 0) return ast;
  return std::visit(
      [&](const auto& x) -> AstPtr {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, TableRef>) {
          return ast;
        } else if constexpr (std::is_same_v<T, Selection>) {
          return std::make_shared<const QueryAst>(QueryAst{Selection{
              shift_placeholders(x.inner, offset), shift_placeholders(x.filter, offset)}});
        } else if constexpr (std::is_same_v<T, Projection>) {
          return std::make_shared<const QueryAst>(
              QueryAst{Projection{x.fields, shift_placeholders(x.inner, offset)}});
        } else if constexpr (std::is_same_v<T, Aggregation>) {
          return std::make_shared<const QueryAst>(
              QueryAst{Aggregation{x.op, x.field, shift_placeholders(x.inner, offset)}});
        } else if constexpr (std::is_same_v<T, Computation>) {
          return std::make_shared<const QueryAst>(QueryAst{Computation{
              shift_expr(x.expr, offset), x.alias, shift_placeholders(x.inner, offset)}});
        } else if constexpr (std::is_same_v<T, Sort>) {
          return std::make_shared<const QueryAst>(
              QueryAst{Sort{x.field, x.dir, shift_placeholders(x.inner, offset)}});
        } else if constexpr (std::is_same_v<T, Index>) {
          return std::make_shared<const QueryAst>(QueryAst{Index{
              shift_placeholders(x.inner, offset), shift_placeholders(x.position, offset)}});
        } else if constexpr (std::is_same_v<T, Slice>) {
          return std::make_shared<const QueryAst>(
              QueryAst{Slice{shift_placeholders(x.inner, offset),
                             shift_placeholders(x.from, offset), shift_placeholders(x.to, offset)}});
        } else {
          static_assert(std::is_same_v<T, Join>);
          return std::make_shared<const QueryAst>(QueryAst{
              Join{shift_placeholders(x.left, offset), shift_placeholders(x.right, offset)}});
        }
      },
      ast->node);
}

namespace build {

AstPtr table(std::string name) {
  return std::make_shared<const QueryAst>(QueryAst{TableRef{std::move(name)}});
}
AstPtr where(AstPtr inner, FilterPtr filter) {
  return std::make_shared<const QueryAst>(QueryAst{Selection{std::move(inner), std::move(filter)}});
}
AstPtr project(std::vector<std::string> fields, AstPtr inner) {
  return std::make_shared<const QueryAst>(
      QueryAst{Projection{std::move(fields), std::move(inner)}});
}
AstPtr aggregate(AggOp op, std::optional<std::string> field, AstPtr inner) {
  return std::make_shared<const QueryAst>(
      QueryAst{Aggregation{op, std::move(field), std::move(inner)}});
}
AstPtr compute(ExprPtr expr, std::optional<std::string> alias, AstPtr inner) {
  return std::make_shared<const QueryAst>(
      QueryAst{Computation{std::move(expr), std::move(alias), std::move(inner)}});
}
AstPtr sort(std::string field, SortDir dir, AstPtr inner) {
  return std::make_shared<const QueryAst>(QueryAst{Sort{std::move(field), dir, std::move(inner)}});
}
AstPtr index(AstPtr inner, Value position) {
  return std::make_shared<const QueryAst>(QueryAst{Index{std::move(inner), std::move(position)}});
}
AstPtr slice(AstPtr inner, Value from, Value to) {
  return std::make_shared<const QueryAst>(
      QueryAst{Slice{std::move(inner), std::move(from), std::move(to)}});
}
AstPtr join(AstPtr left, AstPtr right) {
  return std::make_shared<const QueryAst>(QueryAst{Join{std::move(left), std::move(right)}});
}

FilterPtr f_true() { return std::make_shared<const Filter>(Filter{FTrue{}}); }
FilterPtr f_false() { return std::make_shared<const Filter>(Filter{FFalse{}}); }
FilterPtr f_not(FilterPtr inner) {
  return std::make_shared<const Filter>(Filter{FNot{std::move(inner)}});
}
FilterPtr f_and(FilterPtr lhs, FilterPtr rhs) {
  return std::make_shared<const Filter>(Filter{FAnd{std::move(lhs), std::move(rhs)}});
}
FilterPtr f_or(FilterPtr lhs, FilterPtr rhs) {
  return std::make_shared<const Filter>(Filter{FOr{std::move(lhs), std::move(rhs)}});
}
FilterPtr cmp(Value lhs, CmpOp op, Value rhs) {
  return std::make_shared<const Filter>(Filter{FCmp{std::move(lhs), op, std::move(rhs)}});
}
FilterPtr exists(AstPtr subquery, FilterPtr inner) {
  return std::make_shared<const Filter>(Filter{FExists{std::move(subquery), std::move(inner)}});
}

ExprPtr val(Value v) { return std::make_shared<const Expr>(Expr{EVal{std::move(v)}}); }
ExprPtr arith(ArithOp op, ExprPtr lhs, ExprPtr rhs) {
  return std::make_shared<const Expr>(Expr{EArith{op, std::move(lhs), std::move(rhs)}});
}
ExprPtr distance(ExprPtr lhs, ExprPtr rhs) {
  return std::make_shared<const Expr>(Expr{EDistance{std::move(lhs), std::move(rhs)}});
}
ExprPtr agg_array(AggOp op, std::string field) {
  return std::make_shared<const Expr>(Expr{EAggArray{op, std::move(field)}});
}

}  // namespace build

}  // namespace dbtalk
