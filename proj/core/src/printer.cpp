#include "dbtalk/printer.hpp"

#include <sstream>

#include "dbtalk/errors.hpp"

namespace dbtalk {

namespace {

// Binding levels used to decide parenthesization. Prefix forms (projection,
// aggregation, computation, sort) take the loosest possible query on their
// right, so their inner query is never parenthesized; everything else
// parenthesizes children that bind less tightly than the slot requires.
enum Level : int { kSelection = 0, kJoin = 1, kPrefix = 2, kPostfix = 3 };

int level_of(const QueryAst& q) {
  return std::visit(
      [](const auto& x) -> int {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Selection>) return kSelection;
        else if constexpr (std::is_same_v<T, Join>) return kJoin;
        else if constexpr (std::is_same_v<T, Index> || std::is_same_v<T, Slice> ||
                           std::is_same_v<T, TableRef>) return kPostfix;
        else return kPrefix;
      },
      q.node);
}

struct Printer {
  std::vector<std::string> out;

  void tok(std::string t) { out.push_back(std::move(t)); }

  void value(const Value& v) {
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, std::monostate>) {
            tok("null");
          } else if constexpr (std::is_same_v<T, bool>) {
            tok(x ? "true" : "false");
          } else if constexpr (std::is_same_v<T, double>) {
            tok(format_number(x));
          } else if constexpr (std::is_same_v<T, MeasureVal>) {
            tok(format_number(x.display));
            tok(x.unit);
          } else if constexpr (std::is_same_v<T, std::string>) {
            quoted(x);
          } else if constexpr (std::is_same_v<T, DateVal>) {
            tok(x.iso);
          } else if constexpr (std::is_same_v<T, TimeVal>) {
            tok(x.hms);
          } else if constexpr (std::is_same_v<T, GeoPoint>) {
            tok("location"); tok("("); tok(format_number(x.lat)); tok(",");
            tok(format_number(x.lon)); tok(")");
          } else if constexpr (std::is_same_v<T, CurrencyVal>) {
            tok(format_number(x.amount));
            tok("usd");
          } else if constexpr (std::is_same_v<T, EntityId>) {
            // entity ids do not occur in surface queries; this form is for
            // result-cell display only
            tok(x.id);
          } else if constexpr (std::is_same_v<T, HereTok>) {
            tok("here");
          } else if constexpr (std::is_same_v<T, NowTok>) {
            tok("now");
          } else if constexpr (std::is_same_v<T, LookupRef>) {
            tok("lookup"); tok("(");
            if (x.placeholder >= 0) tok("VALUE_" + std::to_string(x.placeholder));
            else quoted(x.name);
            tok(","); tok("@" + x.table); tok(")");
          } else if constexpr (std::is_same_v<T, FieldRef>) {
            tok(x.name);
          } else if constexpr (std::is_same_v<T, ValueList>) {
            tok("[");
            for (size_t i = 0; i < x.size(); ++i) {
              if (i) tok(",");
              value(x[i]);
            }
            tok("]");
          } else {
            static_assert(std::is_same_v<T, Placeholder>);
            tok("VALUE_" + std::to_string(x.index));
          }
        },
        v.v);
  }

  void quoted(const std::string& s) {
    tok("\"");
    std::istringstream words(s);
    std::string w;
    while (words >> w) tok(w);
    tok("\"");
  }

  // filter levels: or 0, and 1, not 2, atoms 3
  static int filter_level(const Filter& f) {
    return std::visit(
        [](const auto& x) -> int {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, FOr>) return 0;
          else if constexpr (std::is_same_v<T, FAnd>) return 1;
          else if constexpr (std::is_same_v<T, FNot>) return 2;
          else return 3;
        },
        f.node);
  }

  void filter(const Filter& f, int min_level) {
    const bool parens = filter_level(f) < min_level;
    if (parens) tok("(");
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, FTrue>) {
            tok("true");
          } else if constexpr (std::is_same_v<T, FFalse>) {
            tok("false");
          } else if constexpr (std::is_same_v<T, FNot>) {
            tok("!");
            filter(*x.inner, 2);
          } else if constexpr (std::is_same_v<T, FAnd>) {
            filter(*x.lhs, 1); tok("&&"); filter(*x.rhs, 2);
          } else if constexpr (std::is_same_v<T, FOr>) {
            filter(*x.lhs, 0); tok("||"); filter(*x.rhs, 1);
          } else if constexpr (std::is_same_v<T, FCmp>) {
            if (x.op == CmpOp::contains || x.op == CmpOp::in_array) {
              tok(to_string(x.op)); tok("(");
              value(x.lhs); tok(","); value(x.rhs); tok(")");
            } else {
              value(x.lhs); tok(to_string(x.op)); value(x.rhs);
            }
          } else {
            static_assert(std::is_same_v<T, FExists>);
            tok("exists"); tok("(");
            query(*x.subquery, kPostfix);
            tok(",");
            filter(*x.inner, 0);
            tok(")");
          }
        },
        f.node);
    if (parens) tok(")");
  }

  // expr levels: add/sub 1, mul/div 2, atoms 3
  static int expr_level(const Expr& e) {
    if (const auto* a = std::get_if<EArith>(&e.node))
      return (a->op == ArithOp::add || a->op == ArithOp::sub) ? 1 : 2;
    return 3;
  }

  void expr(const Expr& e, int min_level) {
    const bool parens = expr_level(e) < min_level;
    if (parens) tok("(");
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, EVal>) {
            value(x.value);
          } else if constexpr (std::is_same_v<T, EArith>) {
            const bool additive = x.op == ArithOp::add || x.op == ArithOp::sub;
            const int level = additive ? 1 : 2;
            expr(*x.lhs, level);
            switch (x.op) {
              case ArithOp::add: tok("+"); break;
              case ArithOp::sub: tok("-"); break;
              case ArithOp::mul: tok("*"); break;
              case ArithOp::div: tok("/"); break;
            }
            expr(*x.rhs, level + 1);
          } else if constexpr (std::is_same_v<T, EDistance>) {
            tok("distance"); tok("(");
            expr(*x.lhs, 0); tok(","); expr(*x.rhs, 0);
            tok(")");
          } else {
            static_assert(std::is_same_v<T, EAggArray>);
            tok(to_string(x.op)); tok("("); tok(x.field); tok(")");
          }
        },
        e.node);
    if (parens) tok(")");
  }

  void query(const QueryAst& q, int min_level) {
    const bool parens = level_of(q) < min_level;
    if (parens) tok("(");
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, TableRef>) {
            tok("@" + x.table);
          } else if constexpr (std::is_same_v<T, Selection>) {
            query(*x.inner, kPostfix);
            tok(",");
            filter(*x.filter, 0);
          } else if constexpr (std::is_same_v<T, Projection>) {
            tok("[");
            for (size_t i = 0; i < x.fields.size(); ++i) {
              if (i) tok(",");
              tok(x.fields[i]);
            }
            tok("]"); tok("of");
            query(*x.inner, kSelection);
          } else if constexpr (std::is_same_v<T, Aggregation>) {
            tok("aggregate"); tok(to_string(x.op));
            if (x.field) tok(*x.field);
            tok("of");
            query(*x.inner, kSelection);
          } else if constexpr (std::is_same_v<T, Computation>) {
            tok("compute");
            expr(*x.expr, 0);
            if (x.alias) { tok("as"); tok(*x.alias); }
            tok("of");
            query(*x.inner, kSelection);
          } else if constexpr (std::is_same_v<T, Sort>) {
            tok("sort"); tok(x.field); tok(to_string(x.dir)); tok("of");
            query(*x.inner, kSelection);
          } else if constexpr (std::is_same_v<T, Index>) {
            query(*x.inner, kPostfix);
            tok("["); value(x.position); tok("]");
          } else if constexpr (std::is_same_v<T, Slice>) {
            query(*x.inner, kPostfix);
            tok("["); value(x.from); tok(":"); value(x.to); tok("]");
          } else {
            static_assert(std::is_same_v<T, Join>);
            query(*x.left, kPostfix);
            tok("join");
            query(*x.right, kPostfix);
          }
        },
        q.node);
    if (parens) tok(")");
  }
};

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

}  // namespace

std::vector<std::string> print_tokens(const QueryAst& query) {
  Printer p;
  p.query(query, kSelection);
  return std::move(p.out);
}

std::vector<std::string> print_tokens(const Filter& filter) {
  Printer p;
  p.filter(filter, 0);
  return std::move(p.out);
}

std::vector<std::string> print_tokens(const Expr& expr) {
  Printer p;
  p.expr(expr, 0);
  return std::move(p.out);
}

std::vector<std::string> print_tokens(const Value& value) {
  Printer p;
  p.value(value);
  return std::move(p.out);
}

std::string print(const QueryAst& query) { return join_tokens(print_tokens(query)); }
std::string print(const Filter& filter) { return join_tokens(print_tokens(filter)); }

}  // namespace dbtalk
