#include "dbtalk/typecheck.hpp"

#include <optional>

#include "dbtalk/errors.hpp"

namespace dbtalk {

namespace {

using Kind = TypeTag::Kind;

/// Row environment: field types plus the table each field came from, so
/// placeholder slots can be attributed to a value pool.
struct Env {
  RowType types;
  std::map<std::string, std::string> owner;
};

struct Checker {
  const NlSchema& schema;
  PlaceholderMap* slots;
  std::string path;

  [[noreturn]] void err(const std::string& msg) const { throw TypeError(path, msg); }

  struct PathGuard {
    Checker& checker;
    size_t saved;
    PathGuard(Checker& c, const char* segment) : checker(c), saved(c.path.size()) {
      checker.path += '/';
      checker.path += segment;
    }
    ~PathGuard() { checker.path.resize(saved); }
  };

  void bind_slot(int index, PlaceholderInfo info) {
    if (!slots) return;
    auto it = slots->find(index);
    if (it != slots->end() && it->second.type != info.type)
      err("placeholder VALUE_" + std::to_string(index) + " used at conflicting types");
    (*slots)[index] = std::move(info);
  }

  Env check(const QueryAst& q) {
    return std::visit(
        [&](const auto& x) -> Env {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, TableRef>) {
            if (!schema.has_table(x.table)) err("unknown table '" + x.table + "'");
            Env env;
            env.types = schema.row_type(x.table);
            for (const auto& [name, type] : env.types) env.owner[name] = x.table;
            return env;
          } else if constexpr (std::is_same_v<T, Selection>) {
            Env env = sub(*x.inner, "inner");
            PathGuard g(*this, "filter");
            check_filter(*x.filter, env);
            return env;
          } else if constexpr (std::is_same_v<T, Projection>) {
            Env env = sub(*x.inner, "inner");
            if (x.fields.empty()) err("projection needs at least one field");
            Env out;
            if (auto it = env.types.find("id"); it != env.types.end()) {
              out.types["id"] = it->second;
              out.owner["id"] = env.owner["id"];
            }
            for (const auto& f : x.fields) {
              auto it = env.types.find(f);
              if (it == env.types.end()) err("unknown field '" + f + "' in projection");
              out.types[f] = it->second;
              out.owner[f] = env.owner[f];
            }
            return out;
          } else if constexpr (std::is_same_v<T, Aggregation>) {
            Env env = sub(*x.inner, "inner");
            Env out;
            if (x.op == AggOp::count) {
              if (x.field) err("count takes no field");
              out.types["result"] = TypeTag::number();
              return out;
            }
            if (!x.field) err(std::string(to_string(x.op)) + " needs a field");
            auto it = env.types.find(*x.field);
            if (it == env.types.end()) err("unknown field '" + *x.field + "' in aggregation");
            const TypeTag& ft = it->second;
            if (x.op == AggOp::sum || x.op == AggOp::avg) {
              if (!ft.is_numeric())
                err(std::string(to_string(x.op)) + " needs a numeric field, got " + ft.to_string());
            } else if (!ft.is_ordered()) {
              err(std::string(to_string(x.op)) + " needs an ordered field, got " + ft.to_string());
            }
            out.types["result"] = ft;
            return out;
          } else if constexpr (std::is_same_v<T, Computation>) {
            Env env = sub(*x.inner, "inner");
            TypeTag t;
            {
              PathGuard g(*this, "expr");
              t = check_expr(*x.expr, env);
            }
            std::string name = x.alias ? *x.alias : default_computation_name(*x.expr);
            env.types[name] = t;  // shadows an existing field, like join does
            env.owner[name] = "";
            return env;
          } else if constexpr (std::is_same_v<T, Sort>) {
            Env env = sub(*x.inner, "inner");
            auto it = env.types.find(x.field);
            if (it == env.types.end()) err("unknown sort field '" + x.field + "'");
            if (!it->second.is_ordered())
              err("sort field '" + x.field + "' has unordered type " + it->second.to_string());
            return env;
          } else if constexpr (std::is_same_v<T, Index>) {
            Env env = sub(*x.inner, "inner");
            PathGuard g(*this, "position");
            check_position(x.position);
            return env;
          } else if constexpr (std::is_same_v<T, Slice>) {
            Env env = sub(*x.inner, "inner");
            {
              PathGuard g(*this, "from");
              check_position(x.from);
            }
            {
              PathGuard g(*this, "to");
              check_position(x.to);
            }
            return env;
          } else {
            static_assert(std::is_same_v<T, Join>);
            Env left = sub(*x.left, "left");
            Env right = sub(*x.right, "right");
            Env out = std::move(left);
            for (auto& [name, type] : right.types) {
              out.types[name] = type;  // right side wins collisions
              out.owner[name] = right.owner[name];
            }
            return out;
          }
        },
        q.node);
  }

  Env sub(const QueryAst& q, const char* segment) {
    PathGuard g(*this, segment);
    return check(q);
  }

  void check_position(const Value& v) {
    if (const auto* p = std::get_if<Placeholder>(&v.v)) {
      bind_slot(p->index, PlaceholderInfo{TypeTag::number(), "", "", false});
      return;
    }
    if (!std::holds_alternative<double>(v.v)) err("index positions must be numbers");
  }

  void check_filter(const Filter& f, const Env& env) {
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, FTrue> || std::is_same_v<T, FFalse>) {
            // nothing to check
          } else if constexpr (std::is_same_v<T, FNot>) {
            PathGuard g(*this, "not");
            check_filter(*x.inner, env);
          } else if constexpr (std::is_same_v<T, FAnd> || std::is_same_v<T, FOr>) {
            {
              PathGuard g(*this, "lhs");
              check_filter(*x.lhs, env);
            }
            PathGuard g(*this, "rhs");
            check_filter(*x.rhs, env);
          } else if constexpr (std::is_same_v<T, FCmp>) {
            check_cmp(x, env);
          } else {
            static_assert(std::is_same_v<T, FExists>);
            Env sub_env;
            {
              PathGuard g(*this, "subquery");
              sub_env = check(*x.subquery);
            }
            Env merged = env;
            for (auto& [name, type] : sub_env.types) {
              merged.types[name] = type;
              merged.owner[name] = sub_env.owner[name];
            }
            PathGuard g(*this, "exists");
            check_filter(*x.inner, merged);
          }
        },
        f.node);
  }

  void check_cmp(const FCmp& cmp, const Env& env) {
    auto lhs = value_type(cmp.lhs, env);
    auto rhs = value_type(cmp.rhs, env);
    switch (cmp.op) {
      case CmpOp::eq:
      case CmpOp::ge:
      case CmpOp::le: {
        const bool exact = cmp.op == CmpOp::eq;
        if (!lhs && !rhs) err("comparison between two untyped placeholders");
        if (!lhs) {
          bind_placeholder(cmp.lhs, *rhs, field_of(cmp.rhs, env), exact);
          lhs = rhs;
        } else if (!rhs) {
          bind_placeholder(cmp.rhs, *lhs, field_of(cmp.lhs, env), exact);
          rhs = lhs;
        }
        if (!comparable(*lhs, *rhs))
          err(std::string(to_string(cmp.op)) + " between incompatible types " + lhs->to_string() +
              " and " + rhs->to_string());
        if (!exact && (!lhs->is_ordered() || !rhs->is_ordered()))
          err(std::string(to_string(cmp.op)) + " needs ordered types, got " + lhs->to_string());
        break;
      }
      case CmpOp::substr: {
        auto stringish = [](const TypeTag& t) {
          return t.kind == Kind::string || t.kind == Kind::enumeration;
        };
        if (!lhs) err("=~ needs a typed left operand");
        if (!rhs) {
          bind_placeholder(cmp.rhs, TypeTag::string(), field_of(cmp.lhs, env), true);
          rhs = TypeTag::string();
        }
        if (!stringish(*lhs) || !stringish(*rhs))
          err("=~ needs string operands, got " + lhs->to_string() + " and " + rhs->to_string());
        break;
      }
      case CmpOp::contains: {
        if (!lhs) err("contains needs a typed array as left operand");
        if (lhs->kind != Kind::array)
          err("contains needs an array left operand, got " + lhs->to_string());
        const TypeTag& element = *lhs->element;
        if (!rhs) {
          bind_placeholder(cmp.rhs, element, field_of(cmp.lhs, env), true);
          rhs = element;
        }
        if (!comparable(element, *rhs))
          err("contains element type " + element.to_string() + " does not match " +
              rhs->to_string());
        break;
      }
      case CmpOp::in_array: {
        if (!rhs) err("in_array needs a typed array as right operand");
        if (rhs->kind != Kind::array)
          err("in_array needs an array right operand, got " + rhs->to_string());
        const TypeTag& element = *rhs->element;
        if (!lhs) {
          bind_placeholder(cmp.lhs, element, field_of(cmp.rhs, env), true);
          lhs = element;
        }
        if (!comparable(*lhs, element))
          err("in_array element type " + element.to_string() + " does not match " +
              lhs->to_string());
        break;
      }
    }
  }

  /// (table, field) a comparison side refers to, for pool attribution.
  std::pair<std::string, std::string> field_of(const Value& v, const Env& env) const {
    if (const auto* f = std::get_if<FieldRef>(&v.v)) {
      auto it = env.owner.find(f->name);
      return {it == env.owner.end() ? "" : it->second, f->name};
    }
    return {"", ""};
  }

  void bind_placeholder(const Value& v, const TypeTag& type,
                        std::pair<std::string, std::string> origin, bool exact) {
    const auto* p = std::get_if<Placeholder>(&v.v);
    if (!p) return;
    TypeTag slot_type = type;
    if (slot_type.kind == Kind::array) slot_type = *slot_type.element;
    bind_slot(p->index, PlaceholderInfo{slot_type, origin.first, origin.second, exact});
  }

  std::optional<TypeTag> value_type(const Value& v, const Env& env) {
    return std::visit(
        [&](const auto& x) -> std::optional<TypeTag> {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, std::monostate>) {
            err("null literals are not allowed in queries");
          } else if constexpr (std::is_same_v<T, bool>) {
            return TypeTag::boolean();
          } else if constexpr (std::is_same_v<T, double>) {
            return TypeTag::number();
          } else if constexpr (std::is_same_v<T, MeasureVal>) {
            return TypeTag::measure(x.dimension);
          } else if constexpr (std::is_same_v<T, std::string>) {
            return TypeTag::string();
          } else if constexpr (std::is_same_v<T, DateVal>) {
            return TypeTag::date();
          } else if constexpr (std::is_same_v<T, TimeVal>) {
            return TypeTag::time();
          } else if constexpr (std::is_same_v<T, GeoPoint>) {
            return TypeTag::location();
          } else if constexpr (std::is_same_v<T, CurrencyVal>) {
            return TypeTag::currency();
          } else if constexpr (std::is_same_v<T, EntityId>) {
            if (!schema.has_table(x.table)) err("unknown entity table '" + x.table + "'");
            return TypeTag::entity_ref(x.table);
          } else if constexpr (std::is_same_v<T, HereTok>) {
            return TypeTag::location();
          } else if constexpr (std::is_same_v<T, NowTok>) {
            return TypeTag::date();
          } else if constexpr (std::is_same_v<T, LookupRef>) {
            if (!schema.has_table(x.table)) err("unknown lookup table '" + x.table + "'");
            if (x.placeholder >= 0)
              bind_slot(x.placeholder, PlaceholderInfo{TypeTag::string(), x.table, "name", true});
            return TypeTag::entity_ref(x.table);
          } else if constexpr (std::is_same_v<T, FieldRef>) {
            auto it = env.types.find(x.name);
            if (it == env.types.end()) err("unknown field '" + x.name + "'");
            return it->second;
          } else if constexpr (std::is_same_v<T, ValueList>) {
            if (x.empty()) err("empty array literal has no type");
            auto first = value_type(x.front(), env);
            if (!first) err("array literal of placeholders has no type");
            for (const auto& item : x) {
              auto t = value_type(item, env);
              if (!t || !comparable(*first, *t)) err("mixed-type array literal");
            }
            return TypeTag::array(*first);
          } else {
            static_assert(std::is_same_v<T, Placeholder>);
            return std::nullopt;  // bound by the surrounding comparison
          }
        },
        v.v);
  }

  TypeTag check_expr(const Expr& e, const Env& env) {
    return std::visit(
        [&](const auto& x) -> TypeTag {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, EVal>) {
            auto t = value_type(x.value, env);
            if (!t) {
              // a bare placeholder in arithmetic can only be numeric
              bind_placeholder(x.value, TypeTag::number(), {"", ""}, false);
              return TypeTag::number();
            }
            return *t;
          } else if constexpr (std::is_same_v<T, EArith>) {
            TypeTag lt, rt;
            {
              PathGuard g(*this, "lhs");
              lt = check_expr(*x.lhs, env);
            }
            {
              PathGuard g(*this, "rhs");
              rt = check_expr(*x.rhs, env);
            }
            return arith_type(x.op, lt, rt);
          } else if constexpr (std::is_same_v<T, EDistance>) {
            TypeTag lt, rt;
            {
              PathGuard g(*this, "lhs");
              lt = check_expr(*x.lhs, env);
            }
            {
              PathGuard g(*this, "rhs");
              rt = check_expr(*x.rhs, env);
            }
            if (lt.kind != Kind::location || rt.kind != Kind::location)
              err("distance needs location operands, got " + lt.to_string() + " and " +
                  rt.to_string());
            return TypeTag::measure(Dimension::distance);
          } else {
            static_assert(std::is_same_v<T, EAggArray>);
            auto it = env.types.find(x.field);
            if (it == env.types.end()) err("unknown field '" + x.field + "'");
            if (it->second.kind != Kind::array)
              err(std::string(to_string(x.op)) + "(" + x.field + ") needs an array field, got " +
                  it->second.to_string());
            const TypeTag& element = *it->second.element;
            if (x.op == AggOp::count) return TypeTag::number();
            if (x.op == AggOp::sum || x.op == AggOp::avg) {
              if (!element.is_numeric())
                err(std::string(to_string(x.op)) + " needs numeric elements, got " +
                    element.to_string());
            } else if (!element.is_ordered()) {
              err(std::string(to_string(x.op)) + " needs ordered elements, got " +
                  element.to_string());
            }
            return element;
          }
        },
        e.node);
  }

  TypeTag arith_type(ArithOp op, const TypeTag& lt, const TypeTag& rt) {
    const bool l_num = lt.kind == Kind::number;
    const bool r_num = rt.kind == Kind::number;
    switch (op) {
      case ArithOp::add:
      case ArithOp::sub:
        if (l_num && r_num) return TypeTag::number();
        if (lt.kind == Kind::measure && comparable(lt, rt)) return lt;
        if (lt.kind == Kind::currency && comparable(lt, rt)) return lt;
        break;
      case ArithOp::mul:
        if (l_num && r_num) return TypeTag::number();
        if (lt.kind == Kind::measure && r_num) return lt;
        if (l_num && rt.kind == Kind::measure) return rt;
        if (lt.kind == Kind::currency && r_num) return lt;
        if (l_num && rt.kind == Kind::currency) return rt;
        break;
      case ArithOp::div:
        if (l_num && r_num) return TypeTag::number();
        if (lt.kind == Kind::measure && r_num) return lt;
        if (lt.kind == Kind::currency && r_num) return lt;
        if (lt.kind == Kind::measure && comparable(lt, rt)) return TypeTag::number();
        break;
    }
    err("no arithmetic on " + lt.to_string() + " and " + rt.to_string());
  }
};

}  // namespace

RowType typecheck(const QueryAst& query, const NlSchema& schema, PlaceholderMap* placeholders) {
  Checker checker{schema, placeholders, ""};
  return checker.check(query).types;
}

}  // namespace dbtalk
