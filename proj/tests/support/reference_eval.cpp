#include "support/reference_eval.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "dbtalk/errors.hpp"
#include "dbtalk/geo.hpp"

namespace refeval {

using namespace dbtalk;

namespace {

std::optional<double> num_of(const Value& v) {
  if (const auto* d = std::get_if<double>(&v.v)) return *d;
  if (const auto* m = std::get_if<MeasureVal>(&v.v)) return m->si;
  if (const auto* c = std::get_if<CurrencyVal>(&v.v)) return c->amount;
  return std::nullopt;
}

const std::string* text_of(const Value& v) {
  if (const auto* d = std::get_if<DateVal>(&v.v)) return &d->iso;
  if (const auto* t = std::get_if<TimeVal>(&v.v)) return &t->hms;
  return nullptr;
}

bool eq(const Value& a, const Value& b) {
  if (a.is_null() || b.is_null()) return false;
  auto na = num_of(a);
  auto nb = num_of(b);
  if (na && nb) return *na == *nb;
  if (na || nb) return false;
  return a == b;
}

// -1/0/1, or nothing when the pair has no order
std::optional<int> cmp3(const Value& a, const Value& b) {
  if (a.is_null() || b.is_null()) return std::nullopt;
  auto na = num_of(a);
  auto nb = num_of(b);
  if (na && nb) return *na < *nb ? -1 : (*na > *nb ? 1 : 0);
  const auto* ta = text_of(a);
  const auto* tb = text_of(b);
  if (ta && tb) return *ta < *tb ? -1 : (*ta > *tb ? 1 : 0);
  return std::nullopt;
}

struct Ref {
  const KnowledgeBase& kb;
  const NlSchema& schema;
  const EvalContext& ctx;

  Value value_of(const Value& v, const Row& row) {
    if (const auto* f = std::get_if<FieldRef>(&v.v)) {
      auto it = row.find(f->name);
      return it == row.end() ? Value::null() : it->second;
    }
    if (std::holds_alternative<HereTok>(v.v)) {
      if (!ctx.here) throw RuntimeError(RuntimeError::Kind::missing_context, "here");
      return Value(*ctx.here);
    }
    if (std::holds_alternative<NowTok>(v.v)) {
      if (!ctx.now) throw RuntimeError(RuntimeError::Kind::missing_context, "now");
      return Value(*ctx.now);
    }
    if (const auto* l = std::get_if<LookupRef>(&v.v))
      return Value(kb.resolve_lookup(l->name, l->table));
    return v;
  }

  bool holds(const Filter& f, const Row& row) {
    if (std::holds_alternative<FTrue>(f.node)) return true;
    if (std::holds_alternative<FFalse>(f.node)) return false;
    if (const auto* n = std::get_if<FNot>(&f.node)) return !holds(*n->inner, row);
    if (const auto* a = std::get_if<FAnd>(&f.node))
      return holds(*a->lhs, row) && holds(*a->rhs, row);
    if (const auto* o = std::get_if<FOr>(&f.node))
      return holds(*o->lhs, row) || holds(*o->rhs, row);
    if (const auto* e = std::get_if<FExists>(&f.node)) {
      for (const Row& sub : rows_of(*e->subquery)) {
        Row merged = row;
        for (const auto& [k, v] : sub) merged[k] = v;
        if (holds(*e->inner, merged)) return true;
      }
      return false;
    }
    const auto& c = std::get<FCmp>(f.node);
    const Value l = value_of(c.lhs, row);
    const Value r = value_of(c.rhs, row);
    if (l.is_null() || r.is_null()) return false;
    switch (c.op) {
      case CmpOp::eq: return eq(l, r);
      case CmpOp::ge: {
        auto v = cmp3(l, r);
        return v && *v >= 0;
      }
      case CmpOp::le: {
        auto v = cmp3(l, r);
        return v && *v <= 0;
      }
      case CmpOp::substr: {
        const auto* hay = std::get_if<std::string>(&l.v);
        const auto* needle = std::get_if<std::string>(&r.v);
        return hay && needle && to_lower(*hay).find(to_lower(*needle)) != std::string::npos;
      }
      case CmpOp::contains: {
        const auto* arr = std::get_if<ValueList>(&l.v);
        if (!arr) return false;
        for (const auto& item : *arr)
          if (eq(item, r)) return true;
        return false;
      }
      case CmpOp::in_array: {
        const auto* arr = std::get_if<ValueList>(&r.v);
        if (!arr) return false;
        for (const auto& item : *arr)
          if (eq(item, l)) return true;
        return false;
      }
    }
    return false;
  }

  Value agg(AggOp op, const std::vector<Value>& cells) {
    std::vector<const Value*> present;
    for (const auto& c : cells)
      if (!c.is_null()) present.push_back(&c);
    if (op == AggOp::count) return Value::number(double(cells.size()));
    if (present.empty()) return Value::null();
    if (op == AggOp::min || op == AggOp::max) {
      const Value* best = present.front();
      for (const Value* v : present) {
        auto c = cmp3(*v, *best);
        if (c && ((op == AggOp::min && *c < 0) || (op == AggOp::max && *c > 0))) best = v;
      }
      return *best;
    }
    double total = 0;
    for (const Value* v : present) total += num_of(*v).value_or(0);
    if (op == AggOp::avg) total /= double(present.size());
    if (const auto* m = std::get_if<MeasureVal>(&present.front()->v))
      return Value(MeasureVal{total, m->dimension, total, ""});
    if (std::holds_alternative<CurrencyVal>(present.front()->v)) return Value(CurrencyVal{total});
    return Value::number(total);
  }

  Value expr_of(const Expr& e, const Row& row) {
    if (const auto* v = std::get_if<EVal>(&e.node)) return value_of(v->value, row);
    if (const auto* d = std::get_if<EDistance>(&e.node)) {
      const Value l = expr_of(*d->lhs, row);
      const Value r = expr_of(*d->rhs, row);
      const auto* a = std::get_if<GeoPoint>(&l.v);
      const auto* b = std::get_if<GeoPoint>(&r.v);
      if (!a || !b) return Value::null();
      const double m = haversine_meters(*a, *b);
      return Value(MeasureVal{m, Dimension::distance, m, "m"});
    }
    if (const auto* g = std::get_if<EAggArray>(&e.node)) {
      auto it = row.find(g->field);
      const ValueList* arr =
          it == row.end() ? nullptr : std::get_if<ValueList>(&it->second.v);
      if (!arr) return g->op == AggOp::count ? Value::number(0) : Value::null();
      return agg(g->op, *arr);
    }
    const auto& a = std::get<EArith>(e.node);
    const Value l = expr_of(*a.lhs, row);
    const Value r = expr_of(*a.rhs, row);
    auto nl = l.is_null() ? std::nullopt : num_of(l);
    auto nr = r.is_null() ? std::nullopt : num_of(r);
    if (!nl || !nr) return Value::null();
    double out = 0;
    switch (a.op) {
      case ArithOp::add: out = *nl + *nr; break;
      case ArithOp::sub: out = *nl - *nr; break;
      case ArithOp::mul: out = *nl * *nr; break;
      case ArithOp::div:
        if (*nr == 0) throw RuntimeError(RuntimeError::Kind::division_by_zero, "ref");
        out = *nl / *nr;
        break;
    }
    const auto* ml = std::get_if<MeasureVal>(&l.v);
    const auto* mr = std::get_if<MeasureVal>(&r.v);
    if ((ml || mr) && !(ml && mr && a.op == ArithOp::div)) {
      Dimension dim = ml ? ml->dimension : mr->dimension;
      return Value(MeasureVal{out, dim, out, ""});
    }
    if (std::holds_alternative<CurrencyVal>(l.v) || std::holds_alternative<CurrencyVal>(r.v))
      return Value(CurrencyVal{out});
    return Value::number(out);
  }

  std::vector<Row> rows_of(const QueryAst& q) {
    if (const auto* t = std::get_if<TableRef>(&q.node)) {
      const TableData* data = kb.table(t->table);
      return data ? data->rows : std::vector<Row>{};
    }
    if (const auto* s = std::get_if<Selection>(&q.node)) {
      std::vector<Row> out;
      for (const Row& row : rows_of(*s->inner))
        if (holds(*s->filter, row)) out.push_back(row);
      return out;
    }
    if (const auto* p = std::get_if<Projection>(&q.node)) {
      std::vector<Row> out;
      for (const Row& row : rows_of(*p->inner)) {
        Row slim;
        if (auto it = row.find("id"); it != row.end()) slim["id"] = it->second;
        for (const auto& f : p->fields) {
          auto it = row.find(f);
          slim[f] = it == row.end() ? Value::null() : it->second;
        }
        out.push_back(std::move(slim));
      }
      return out;
    }
    if (const auto* a = std::get_if<Aggregation>(&q.node)) {
      std::vector<Row> in = rows_of(*a->inner);
      Row row;
      if (a->op == AggOp::count) {
        row["result"] = Value::number(double(in.size()));
      } else {
        std::vector<Value> cells;
        for (const Row& r : in) {
          auto it = r.find(*a->field);
          if (it != r.end() && !it->second.is_null()) cells.push_back(it->second);
        }
        row["result"] = cells.empty() ? Value::null() : agg(a->op, cells);
      }
      return {row};
    }
    if (const auto* c = std::get_if<Computation>(&q.node)) {
      const std::string name = c->alias ? *c->alias : default_computation_name(*c->expr);
      std::vector<Row> out;
      for (Row row : rows_of(*c->inner)) {
        row[name] = expr_of(*c->expr, row);
        out.push_back(std::move(row));
      }
      return out;
    }
    if (const auto* s = std::get_if<Sort>(&q.node)) {
      std::vector<Row> out = rows_of(*s->inner);
      const bool asc = s->dir == SortDir::asc;
      std::stable_sort(out.begin(), out.end(), [&](const Row& a2, const Row& b2) {
        const Value& va = a2.at(s->field);
        const Value& vb = b2.at(s->field);
        auto c2 = cmp3(va, vb);
        if (!c2) return !va.is_null() && vb.is_null();  // nulls last
        return asc ? *c2 < 0 : *c2 > 0;
      });
      return out;
    }
    if (const auto* i = std::get_if<Index>(&q.node)) {
      std::vector<Row> in = rows_of(*i->inner);
      const auto pos = static_cast<long long>(std::get<double>(i->position.v));
      if (pos < 1 || pos > static_cast<long long>(in.size())) return {};
      return {in[pos - 1]};
    }
    if (const auto* s = std::get_if<Slice>(&q.node)) {
      std::vector<Row> in = rows_of(*s->inner);
      long long from = static_cast<long long>(std::get<double>(s->from.v));
      long long to = static_cast<long long>(std::get<double>(s->to.v));
      if (from < 1) from = 1;
      if (to > static_cast<long long>(in.size())) to = static_cast<long long>(in.size());
      std::vector<Row> out;
      for (long long k = from; k <= to; ++k) out.push_back(in[k - 1]);
      return out;
    }
    const auto& j = std::get<Join>(q.node);
    std::vector<Row> out;
    for (const Row& l : rows_of(*j.left))
      for (const Row& r : rows_of(*j.right)) {
        Row merged = l;
        for (const auto& [k, v] : r) merged[k] = v;
        out.push_back(std::move(merged));
      }
    return out;
  }
};

std::string cell_text(const Value& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::monostate>) return "null";
        else if constexpr (std::is_same_v<T, bool>) return x ? "true" : "false";
        else if constexpr (std::is_same_v<T, double>) return "N:" + format_number(x);
        else if constexpr (std::is_same_v<T, MeasureVal>) return "M:" + format_number(x.si);
        else if constexpr (std::is_same_v<T, std::string>) return "S:" + x;
        else if constexpr (std::is_same_v<T, DateVal>) return "D:" + x.iso;
        else if constexpr (std::is_same_v<T, TimeVal>) return "T:" + x.hms;
        else if constexpr (std::is_same_v<T, GeoPoint>)
          return "G:" + format_number(x.lat) + "," + format_number(x.lon);
        else if constexpr (std::is_same_v<T, CurrencyVal>) return "C:" + format_number(x.amount);
        else if constexpr (std::is_same_v<T, EntityId>) return "E:" + x.table + "/" + x.id;
        else if constexpr (std::is_same_v<T, ValueList>) {
          std::string out = "[";
          for (const auto& item : x) out += cell_text(item) + ";";
          return out + "]";
        } else {
          return "?";
        }
      },
      v.v);
}

std::string row_text(const Row& row) {
  std::ostringstream out;
  for (const auto& [k, v] : row) out << k << "=" << cell_text(v) << "|";
  return out.str();
}

}  // namespace

std::vector<Row> evaluate(const QueryAst& query, const KnowledgeBase& kb, const NlSchema& schema,
                          const EvalContext& context) {
  Ref ref{kb, schema, context};
  return ref.rows_of(query);
}

std::string canonical_rows(const std::vector<Row>& rows) {
  std::vector<std::string> texts;
  for (const Row& row : rows) texts.push_back(row_text(row));
  std::sort(texts.begin(), texts.end());
  std::string out;
  for (const auto& t : texts) out += t + "\n";
  return out;
}

std::string ordered_rows(const std::vector<Row>& rows) {
  std::string out;
  for (const Row& row : rows) out += row_text(row) + "\n";
  return out;
}

}  // namespace refeval
