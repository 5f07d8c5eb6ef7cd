#include "dbtalk/executor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "dbtalk/errors.hpp"
#include "dbtalk/geo.hpp"

namespace dbtalk {

namespace {

using Kind = RuntimeError::Kind;

bool same_measure_group(Dimension a, Dimension b) {
  if (a == b) return true;
  auto is_len = [](Dimension d) { return d == Dimension::distance || d == Dimension::length; };
  return is_len(a) && is_len(b);
}

/// Numeric magnitude of an ordered value, for >= / <= and sorting.
/// Dates and times order lexicographically instead.
std::optional<double> magnitude(const Value& v) {
  if (const auto* d = std::get_if<double>(&v.v)) return *d;
  if (const auto* m = std::get_if<MeasureVal>(&v.v)) return m->si;
  if (const auto* c = std::get_if<CurrencyVal>(&v.v)) return c->amount;
  return std::nullopt;
}

const std::string* ordered_text(const Value& v) {
  if (const auto* d = std::get_if<DateVal>(&v.v)) return &d->iso;
  if (const auto* t = std::get_if<TimeVal>(&v.v)) return &t->hms;
  return nullptr;
}

/// Runtime equality across the compatibility groups the type checker allows.
bool values_equal(const Value& a, const Value& b) {
  if (a.is_null() || b.is_null()) return false;
  if (auto ma = magnitude(a)) {
    auto mb = magnitude(b);
    if (!mb) return false;
    const auto* xa = std::get_if<MeasureVal>(&a.v);
    const auto* xb = std::get_if<MeasureVal>(&b.v);
    if (xa && xb && !same_measure_group(xa->dimension, xb->dimension)) return false;
    return *ma == *mb;
  }
  return a == b;
}

/// -1 / 0 / +1 if ordered, nullopt on nulls or incomparable kinds.
std::optional<int> compare(const Value& a, const Value& b) {
  if (a.is_null() || b.is_null()) return std::nullopt;
  if (auto ma = magnitude(a)) {
    auto mb = magnitude(b);
    if (!mb) return std::nullopt;
    return *ma < *mb ? -1 : (*ma > *mb ? 1 : 0);
  }
  if (const auto* ta = ordered_text(a)) {
    const auto* tb = ordered_text(b);
    if (!tb) return std::nullopt;
    return *ta < *tb ? -1 : (*ta > *tb ? 1 : 0);
  }
  return std::nullopt;
}

struct Evaluator {
  const KnowledgeBase& kb;
  const NlSchema& schema;
  const EvalContext& context;

  ResultSet eval(const QueryAst& q) {
    return std::visit(
        [&](const auto& x) -> ResultSet {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, TableRef>) {
            ResultSet out;
            out.row_type = schema.row_type(x.table);
            if (const TableData* data = kb.table(x.table)) out.rows = data->rows;
            return out;
          } else if constexpr (std::is_same_v<T, Selection>) {
            ResultSet out = eval(*x.inner);
            std::vector<Row> kept;
            for (Row& row : out.rows)
              if (eval_filter(*x.filter, row)) kept.push_back(std::move(row));
            out.rows = std::move(kept);
            return out;
          } else if constexpr (std::is_same_v<T, Projection>) {
            ResultSet in = eval(*x.inner);
            ResultSet out;
            const bool keep_id = in.row_type.count("id") > 0;
            if (keep_id) out.row_type["id"] = in.row_type["id"];
            for (const auto& f : x.fields) out.row_type[f] = in.row_type.at(f);
            for (Row& row : in.rows) {
              Row slim;
              if (keep_id) slim["id"] = row["id"];
              for (const auto& f : x.fields) slim[f] = row[f];
              out.rows.push_back(std::move(slim));
            }
            return out;
          } else if constexpr (std::is_same_v<T, Aggregation>) {
            return eval_aggregation(x);
          } else if constexpr (std::is_same_v<T, Computation>) {
            ResultSet out = eval(*x.inner);
            const std::string name = x.alias ? *x.alias : default_computation_name(*x.expr);
            for (Row& row : out.rows) row[name] = eval_expr(*x.expr, row);
            // output type mirrors the checker; recompute from a sample or leave
            // the declared type when empty
            out.row_type[name] = computed_type(x, out);
            return out;
          } else if constexpr (std::is_same_v<T, Sort>) {
            ResultSet out = eval(*x.inner);
            const std::string& field = x.field;
            const bool asc = x.dir == SortDir::asc;
            std::stable_sort(out.rows.begin(), out.rows.end(),
                             [&](const Row& a, const Row& b) {
                               auto cv = compare(a.at(field), b.at(field));
                               if (!cv) {
                                 // null keys sort after everything
                                 const bool a_null = a.at(field).is_null();
                                 const bool b_null = b.at(field).is_null();
                                 return !a_null && b_null;
                               }
                               return asc ? *cv < 0 : *cv > 0;
                             });
            return out;
          } else if constexpr (std::is_same_v<T, Index>) {
            ResultSet out = eval(*x.inner);
            const std::int64_t pos = position_of(x.position);
            if (pos < 1 || pos > static_cast<std::int64_t>(out.rows.size())) {
              out.rows.clear();  // out of range composes as empty, not as an error
            } else {
              Row row = std::move(out.rows[pos - 1]);
              out.rows.clear();
              out.rows.push_back(std::move(row));
            }
            return out;
          } else if constexpr (std::is_same_v<T, Slice>) {
            ResultSet out = eval(*x.inner);
            std::int64_t from = position_of(x.from);
            std::int64_t to = position_of(x.to);
            const std::int64_t n = static_cast<std::int64_t>(out.rows.size());
            from = std::max<std::int64_t>(from, 1);
            to = std::min(to, n);
            std::vector<Row> kept;
            for (std::int64_t i = from; i <= to; ++i) kept.push_back(std::move(out.rows[i - 1]));
            out.rows = std::move(kept);
            return out;
          } else {
            static_assert(std::is_same_v<T, Join>);
            ResultSet left = eval(*x.left);
            ResultSet right = eval(*x.right);
            ResultSet out;
            out.row_type = left.row_type;
            for (const auto& [name, type] : right.row_type) out.row_type[name] = type;
            out.rows.reserve(left.rows.size() * right.rows.size());
            for (const Row& l : left.rows)
              for (const Row& r : right.rows) {
                Row merged = l;
                for (const auto& [name, cell] : r) merged[name] = cell;
                out.rows.push_back(std::move(merged));
              }
            return out;
          }
        },
        q.node);
  }

  TypeTag computed_type(const Computation& c, const ResultSet& out) {
    // cheap local inference: look at the first non-null computed cell
    const std::string name = c.alias ? *c.alias : default_computation_name(*c.expr);
    for (const Row& row : out.rows) {
      const Value& v = row.at(name);
      if (v.is_null()) continue;
      if (std::holds_alternative<double>(v.v)) return TypeTag::number();
      if (const auto* m = std::get_if<MeasureVal>(&v.v)) return TypeTag::measure(m->dimension);
      if (std::holds_alternative<CurrencyVal>(v.v)) return TypeTag::currency();
      break;
    }
    return TypeTag::number();
  }

  ResultSet eval_aggregation(const Aggregation& agg) {
    ResultSet in = eval(*agg.inner);
    ResultSet out;
    Row row;
    if (agg.op == AggOp::count) {
      out.row_type["result"] = TypeTag::number();
      row["result"] = Value::number(static_cast<double>(in.rows.size()));
      out.rows.push_back(std::move(row));
      return out;
    }
    const std::string& field = *agg.field;
    out.row_type["result"] = in.row_type.at(field);
    std::vector<const Value*> cells;
    for (const Row& r : in.rows) {
      const Value& v = r.at(field);
      if (!v.is_null()) cells.push_back(&v);
    }
    row["result"] = aggregate_cells(agg.op, cells);
    out.rows.push_back(std::move(row));
    return out;
  }

  /// Nulls are already filtered out; an empty list aggregates to null.
  Value aggregate_cells(AggOp op, const std::vector<const Value*>& cells) {
    if (cells.empty()) return Value::null();
    switch (op) {
      case AggOp::count:
        return Value::number(static_cast<double>(cells.size()));
      case AggOp::min:
      case AggOp::max: {
        const Value* best = cells.front();
        for (const Value* v : cells) {
          auto cv = compare(*v, *best);
          if (cv && ((op == AggOp::min && *cv < 0) || (op == AggOp::max && *cv > 0))) best = v;
        }
        return *best;
      }
      case AggOp::sum:
      case AggOp::avg: {
        double total = 0;
        for (const Value* v : cells) total += magnitude(*v).value_or(0);
        if (op == AggOp::avg) total /= static_cast<double>(cells.size());
        // keep the representation of the cells (measure stays a measure)
        if (const auto* m = std::get_if<MeasureVal>(&cells.front()->v))
          return Value(MeasureVal{total, m->dimension, total, ""});
        if (std::holds_alternative<CurrencyVal>(cells.front()->v))
          return Value(CurrencyVal{total});
        return Value::number(total);
      }
    }
    return Value::null();
  }

  std::int64_t position_of(const Value& v) {
    if (const auto* d = std::get_if<double>(&v.v)) return static_cast<std::int64_t>(*d);
    if (std::holds_alternative<Placeholder>(v.v))
      throw RuntimeError(Kind::unbound_placeholder, "index position is an unfilled VALUE_k");
    throw RuntimeError(Kind::unbound_placeholder, "index position is not a number");
  }

  bool eval_filter(const Filter& f, const Row& row) {
    return std::visit(
        [&](const auto& x) -> bool {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, FTrue>) {
            return true;
          } else if constexpr (std::is_same_v<T, FFalse>) {
            return false;
          } else if constexpr (std::is_same_v<T, FNot>) {
            return !eval_filter(*x.inner, row);
          } else if constexpr (std::is_same_v<T, FAnd>) {
            return eval_filter(*x.lhs, row) && eval_filter(*x.rhs, row);
          } else if constexpr (std::is_same_v<T, FOr>) {
            return eval_filter(*x.lhs, row) || eval_filter(*x.rhs, row);
          } else if constexpr (std::is_same_v<T, FCmp>) {
            return eval_cmp(x, row);
          } else {
            static_assert(std::is_same_v<T, FExists>);
            ResultSet sub = eval(*x.subquery);
            for (const Row& sub_row : sub.rows) {
              Row merged = row;
              for (const auto& [name, cell] : sub_row) merged[name] = cell;
              if (eval_filter(*x.inner, merged)) return true;
            }
            return false;
          }
        },
        f.node);
  }

  bool eval_cmp(const FCmp& cmp, const Row& row) {
    const Value lhs = eval_value(cmp.lhs, row);
    const Value rhs = eval_value(cmp.rhs, row);
    if (lhs.is_null() || rhs.is_null()) return false;  // three-valued logic collapses to false
    switch (cmp.op) {
      case CmpOp::eq:
        return values_equal(lhs, rhs);
      case CmpOp::ge: {
        auto cv = compare(lhs, rhs);
        return cv && *cv >= 0;
      }
      case CmpOp::le: {
        auto cv = compare(lhs, rhs);
        return cv && *cv <= 0;
      }
      case CmpOp::substr: {
        const auto* hay = std::get_if<std::string>(&lhs.v);
        const auto* needle = std::get_if<std::string>(&rhs.v);
        if (!hay || !needle) return false;
        return to_lower(*hay).find(to_lower(*needle)) != std::string::npos;
      }
      case CmpOp::contains: {
        const auto* arr = std::get_if<ValueList>(&lhs.v);
        if (!arr) return false;
        for (const Value& item : *arr)
          if (values_equal(item, rhs)) return true;
        return false;
      }
      case CmpOp::in_array: {
        const auto* arr = std::get_if<ValueList>(&rhs.v);
        if (!arr) return false;
        for (const Value& item : *arr)
          if (values_equal(item, lhs)) return true;
        return false;
      }
    }
    return false;
  }

  Value eval_value(const Value& v, const Row& row) {
    return std::visit(
        [&](const auto& x) -> Value {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, FieldRef>) {
            auto it = row.find(x.name);
            return it == row.end() ? Value::null() : it->second;
          } else if constexpr (std::is_same_v<T, HereTok>) {
            if (!context.here)
              throw RuntimeError(Kind::missing_context, "query uses 'here' but none was supplied");
            return Value(*context.here);
          } else if constexpr (std::is_same_v<T, NowTok>) {
            if (!context.now)
              throw RuntimeError(Kind::missing_context, "query uses 'now' but none was supplied");
            return Value(*context.now);
          } else if constexpr (std::is_same_v<T, LookupRef>) {
            if (x.placeholder >= 0)
              throw RuntimeError(Kind::unbound_placeholder,
                                 "lookup name is an unfilled VALUE_" + std::to_string(x.placeholder));
            return Value(kb.resolve_lookup(x.name, x.table));
          } else if constexpr (std::is_same_v<T, Placeholder>) {
            throw RuntimeError(Kind::unbound_placeholder,
                               "VALUE_" + std::to_string(x.index) + " was never filled");
          } else {
            return v;
          }
        },
        v.v);
  }

  Value eval_expr(const Expr& e, const Row& row) {
    return std::visit(
        [&](const auto& x) -> Value {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, EVal>) {
            return eval_value(x.value, row);
          } else if constexpr (std::is_same_v<T, EArith>) {
            const Value lhs = eval_expr(*x.lhs, row);
            const Value rhs = eval_expr(*x.rhs, row);
            if (lhs.is_null() || rhs.is_null()) return Value::null();
            auto ml = magnitude(lhs);
            auto mr = magnitude(rhs);
            if (!ml || !mr) return Value::null();
            double result = 0;
            switch (x.op) {
              case ArithOp::add: result = *ml + *mr; break;
              case ArithOp::sub: result = *ml - *mr; break;
              case ArithOp::mul: result = *ml * *mr; break;
              case ArithOp::div:
                if (*mr == 0.0)
                  throw RuntimeError(Kind::division_by_zero, "division by zero in computation");
                result = *ml / *mr;
                break;
            }
            // measure-ness survives arithmetic with plain numbers
            const auto* measure_side = std::get_if<MeasureVal>(&lhs.v);
            if (!measure_side) measure_side = std::get_if<MeasureVal>(&rhs.v);
            const bool both_measures = std::holds_alternative<MeasureVal>(lhs.v) &&
                                       std::holds_alternative<MeasureVal>(rhs.v);
            if (measure_side && !(both_measures && x.op == ArithOp::div))
              return Value(MeasureVal{result, measure_side->dimension, result, ""});
            if (std::holds_alternative<CurrencyVal>(lhs.v) ||
                std::holds_alternative<CurrencyVal>(rhs.v))
              return Value(CurrencyVal{result});
            return Value::number(result);
          } else if constexpr (std::is_same_v<T, EDistance>) {
            const Value lhs = eval_expr(*x.lhs, row);
            const Value rhs = eval_expr(*x.rhs, row);
            const auto* a = std::get_if<GeoPoint>(&lhs.v);
            const auto* b = std::get_if<GeoPoint>(&rhs.v);
            if (!a || !b) return Value::null();
            const double meters = haversine_meters(*a, *b);
            return Value(MeasureVal{meters, Dimension::distance, meters, "m"});
          } else {
            static_assert(std::is_same_v<T, EAggArray>);
            auto it = row.find(x.field);
            if (it == row.end() || it->second.is_null())
              return x.op == AggOp::count ? Value::number(0) : Value::null();
            const auto* arr = std::get_if<ValueList>(&it->second.v);
            if (!arr) return x.op == AggOp::count ? Value::number(0) : Value::null();
            if (x.op == AggOp::count) return Value::number(static_cast<double>(arr->size()));
            std::vector<const Value*> cells;
            for (const Value& item : *arr)
              if (!item.is_null()) cells.push_back(&item);
            return aggregate_cells(x.op, cells);
          }
        },
        e.node);
  }
};

}  // namespace

ResultSet execute(const QueryAst& query, const KnowledgeBase& kb, const NlSchema& schema,
                  const EvalContext& context) {
  Evaluator evaluator{kb, schema, context};
  return evaluator.eval(query);
}

}  // namespace dbtalk
