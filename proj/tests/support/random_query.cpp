#include "support/random_query.hpp"

#include <set>

#include "dbtalk/units.hpp"

namespace testgen {

using namespace dbtalk;

namespace {

int pick(std::mt19937_64& rng, int n) {
  return static_cast<int>(std::uniform_int_distribution<int>(0, n - 1)(rng));
}

double pick_real(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

const std::vector<std::string>& color_pool() {
  static const std::vector<std::string> pool = {"red", "green", "blue", "amber", "teal"};
  return pool;
}

const std::vector<std::string>& tag_pool() {
  static const std::vector<std::string> pool = {"new", "老牌", "hot", "vegan", "late night"};
  return pool;
}

std::string iso_date(std::mt19937_64& rng) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", 2019 + pick(rng, 6), 1 + pick(rng, 12),
                1 + pick(rng, 28));
  return buf;
}

}  // namespace

RandomWorld make_world(std::mt19937_64& rng, int max_rows) {
  RandomWorld world;

  TableDef a;
  a.canonical = {"alpha"};
  a.canonical_plural = {"alphas"};
  a.fields["name"].type = TypeTag::string();
  a.fields["num"].type = TypeTag::number();
  a.fields["rating"].type = TypeTag::number();
  a.fields["color"].type = TypeTag::string();
  a.fields["flag"].type = TypeTag::boolean();
  a.fields["opened"].type = TypeTag::date();
  a.fields["span"].type = TypeTag::measure(Dimension::length);
  a.fields["tags"].type = TypeTag::string();
  a.fields["tags"].is_array = true;
  a.fields["links"].type = TypeTag::entity_ref("Beta");
  a.fields["links"].is_array = true;
  world.schema.tables["Alpha"] = std::move(a);

  TableDef b;
  b.canonical = {"beta"};
  b.canonical_plural = {"betas"};
  b.fields["name"].type = TypeTag::string();
  b.fields["num"].type = TypeTag::number();
  b.fields["color"].type = TypeTag::string();
  b.fields["geo"].type = TypeTag::location();
  world.schema.tables["Beta"] = std::move(b);

  const int b_rows = 2 + pick(rng, std::max(1, max_rows - 2));
  for (int i = 0; i < b_rows; ++i) {
    Row row;
    row["id"] = Value(EntityId{"Beta", "b" + std::to_string(i)});
    row["name"] = Value::string("beta " + std::to_string(i));
    row["num"] = pick(rng, 10) == 0 ? Value::null() : Value::number(pick(rng, 50));
    row["color"] = Value::string(color_pool()[pick(rng, color_pool().size())]);
    row["geo"] = pick(rng, 10) == 0
                     ? Value::null()
                     : Value(GeoPoint{37.0 + pick_real(rng, 0, 1), -122.5 + pick_real(rng, 0, 1)});
    world.kb.add_row("Beta", std::move(row));
  }

  const int a_rows = 2 + pick(rng, std::max(1, max_rows - 2));
  for (int i = 0; i < a_rows; ++i) {
    Row row;
    row["id"] = Value(EntityId{"Alpha", "a" + std::to_string(i)});
    row["name"] = Value::string("alpha " + std::to_string(i));
    row["num"] = pick(rng, 10) == 0 ? Value::null() : Value::number(pick(rng, 100));
    row["rating"] = pick(rng, 8) == 0 ? Value::null()
                                      : Value::number(std::round(pick_real(rng, 1, 5) * 10) / 10);
    row["color"] = pick(rng, 10) == 0
                       ? Value::null()
                       : Value::string(color_pool()[pick(rng, color_pool().size())]);
    row["flag"] = Value::boolean(pick(rng, 2) == 0);
    row["opened"] = pick(rng, 10) == 0 ? Value::null() : Value(DateVal{iso_date(rng)});
    row["span"] = pick(rng, 10) == 0
                      ? Value::null()
                      : Value(MeasureVal{pick_real(rng, 1, 5000), Dimension::length, 0, "m"});
    ValueList tags;
    for (int t = pick(rng, 4); t > 0; --t)
      tags.push_back(Value::string(tag_pool()[pick(rng, tag_pool().size())]));
    row["tags"] = Value(std::move(tags));
    ValueList links;
    for (int t = pick(rng, 4); t > 0; --t)
      links.push_back(Value(EntityId{"Beta", "b" + std::to_string(pick(rng, b_rows))}));
    row["links"] = Value(std::move(links));
    world.kb.add_row("Alpha", std::move(row));
  }
  return world;
}

namespace {

struct QueryGen {
  std::mt19937_64& rng;
  const RandomWorld& world;

  Value literal_for(const TypeTag& type) {
    switch (type.kind) {
      case TypeTag::Kind::number: return Value::number(pick(rng, 100));
      case TypeTag::Kind::string:
        return Value::string(color_pool()[pick(rng, color_pool().size())]);
      case TypeTag::Kind::boolean: return Value::boolean(pick(rng, 2) == 0);
      case TypeTag::Kind::date: return Value(DateVal{iso_date(rng)});
      case TypeTag::Kind::measure: {
        const double display = 1 + pick(rng, 40);
        return Value(make_measure(display, "m"));
      }
      default: return Value::number(1);
    }
  }

  FilterPtr filter_for(const RowType& env, int budget) {
    if (budget > 0 && pick(rng, 4) == 0) {
      switch (pick(rng, 3)) {
        case 0: return build::f_not(filter_for(env, budget - 1));
        case 1: return build::f_and(filter_for(env, budget - 1), filter_for(env, budget - 1));
        default: return build::f_or(filter_for(env, budget - 1), filter_for(env, budget - 1));
      }
    }
    // exists-filter against Beta when the env links to it
    if (budget > 0 && env.count("links") && pick(rng, 6) == 0) {
      AstPtr sub = build::table("Beta");
      if (pick(rng, 2) == 0)
        sub = build::where(std::move(sub),
                           build::cmp(Value::field("num"), CmpOp::le, Value::number(pick(rng, 50))));
      return build::exists(std::move(sub),
                           build::cmp(Value::field("id"), CmpOp::in_array, Value::field("links")));
    }
    std::vector<std::string> names;
    for (const auto& [name, type] : env)
      if (name != "id") names.push_back(name);
    if (names.empty()) return build::f_true();
    const std::string field = names[pick(rng, names.size())];
    const TypeTag& type = env.at(field);
    if (type.kind == TypeTag::Kind::array) {
      return build::cmp(Value::field(field), CmpOp::contains, literal_for(*type.element));
    }
    if (type.kind == TypeTag::Kind::location || type.kind == TypeTag::Kind::entity_ref)
      return build::f_true();
    if (type.is_ordered())
      return build::cmp(Value::field(field), pick(rng, 2) ? CmpOp::ge : CmpOp::le,
                        literal_for(type));
    if (type.kind == TypeTag::Kind::string && pick(rng, 3) == 0)
      return build::cmp(Value::field(field), CmpOp::substr,
                        Value::string(std::string(1, "aeglr"[pick(rng, 5)])));
    return build::cmp(Value::field(field), CmpOp::eq, literal_for(type));
  }

  AstPtr base(RowType& env) {
    const bool alpha = pick(rng, 3) != 0;
    const std::string table = alpha ? "Alpha" : "Beta";
    env = world.schema.row_type(table);
    return build::table(table);
  }

  AstPtr grow(AstPtr q, RowType& env, int depth) {
    for (int level = 1; level < depth; ++level) {
      switch (pick(rng, 8)) {
        case 0: {  // selection
          q = build::where(std::move(q), filter_for(env, 2));
          break;
        }
        case 1: {  // projection
          std::vector<std::string> names;
          for (const auto& [name, type] : env)
            if (name != "id") names.push_back(name);
          if (names.empty()) break;
          std::set<std::string> chosen;
          const int want = 1 + pick(rng, 2);
          for (int k = 0; k < want; ++k) chosen.insert(names[pick(rng, names.size())]);
          std::vector<std::string> fields(chosen.begin(), chosen.end());
          RowType next;
          if (env.count("id")) next["id"] = env.at("id");
          for (const auto& f : fields) next[f] = env.at(f);
          env = std::move(next);
          q = build::project(std::move(fields), std::move(q));
          break;
        }
        case 2: {  // aggregation (terminal)
          std::vector<std::string> numeric, ordered;
          for (const auto& [name, type] : env) {
            if (type.is_numeric()) numeric.push_back(name);
            if (type.is_ordered()) ordered.push_back(name);
          }
          AggOp op = static_cast<AggOp>(pick(rng, 5));
          std::optional<std::string> field;
          TypeTag out = TypeTag::number();
          if (op == AggOp::count) {
          } else if ((op == AggOp::sum || op == AggOp::avg) && !numeric.empty()) {
            field = numeric[pick(rng, numeric.size())];
            out = env.at(*field);
          } else if ((op == AggOp::min || op == AggOp::max) && !ordered.empty()) {
            field = ordered[pick(rng, ordered.size())];
            out = env.at(*field);
          } else {
            op = AggOp::count;
          }
          q = build::aggregate(op, field, std::move(q));
          env.clear();
          env["result"] = out;
          return q;  // nothing meaningful composes on a single row
        }
        case 3: {  // computation
          if (env.count("geo")) {
            q = build::compute(
                build::distance(build::val(Value::field("geo")), build::val(Value::here())),
                std::nullopt, std::move(q));
            env["distance"] = TypeTag::measure(Dimension::distance);
          } else if (env.count("tags")) {
            q = build::compute(build::agg_array(AggOp::count, "tags"), std::nullopt, std::move(q));
            env["count"] = TypeTag::number();
          } else if (env.count("num") && env.count("rating")) {
            q = build::compute(
                build::arith(ArithOp::add, build::val(Value::field("num")),
                             build::val(Value::field("rating"))),
                std::string("score"), std::move(q));
            env["score"] = TypeTag::number();
          }
          break;
        }
        case 4: {  // sort
          std::vector<std::string> ordered;
          for (const auto& [name, type] : env)
            if (type.is_ordered()) ordered.push_back(name);
          if (ordered.empty()) break;
          q = build::sort(ordered[pick(rng, ordered.size())],
                          pick(rng, 2) ? SortDir::asc : SortDir::desc, std::move(q));
          break;
        }
        case 5: {  // index (occasionally out of range)
          q = build::index(std::move(q), Value::number(1 + pick(rng, 30)));
          break;
        }
        case 6: {  // slice
          const int from = 1 + pick(rng, 6);
          q = build::slice(std::move(q), Value::number(from),
                           Value::number(from + pick(rng, 6)));
          break;
        }
        case 7: {  // join with a fresh base
          RowType other_env;
          AstPtr other = base(other_env);
          for (const auto& [name, type] : other_env) env[name] = type;
          q = build::join(std::move(q), std::move(other));
          break;
        }
      }
    }
    return q;
  }
};

struct PrintableGen {
  std::mt19937_64& rng;

  Value value() {
    switch (pick(rng, 10)) {
      case 0: return Value::number(pick(rng, 500) - 100);
      case 1: return Value::number(std::round(pick_real(rng, 0, 9) * 100) / 100);
      case 2: return Value::string("one");
      case 3: return Value::string("two words");
      case 4: return Value::boolean(pick(rng, 2) == 0);
      case 5: return Value(DateVal{iso_date(rng)});
      case 6: return Value(TimeVal{"12:30:00"});
      case 7: return Value(make_measure(1 + pick(rng, 20), pick(rng, 2) ? "mi" : "kg"));
      case 8: return Value(LookupRef{"some name", "Table" + std::to_string(pick(rng, 3)), -1});
      default: return Value::field(field());
    }
  }

  std::string field() {
    static const std::vector<std::string> names = {"alpha", "beta.gamma", "rating", "geo",
                                                   "count", "x1"};
    return names[pick(rng, names.size())];
  }

  FilterPtr filter(int depth) {
    if (depth > 0) {
      switch (pick(rng, 6)) {
        case 0: return build::f_not(filter(depth - 1));
        case 1: return build::f_and(filter(depth - 1), filter(depth - 1));
        case 2: return build::f_or(filter(depth - 1), filter(depth - 1));
        case 3: return build::exists(query(depth - 1), filter(depth - 1));
        default: break;
      }
    }
    switch (pick(rng, 7)) {
      case 0: return build::f_true();
      case 1: return build::f_false();
      case 2: return build::cmp(value(), CmpOp::contains, value());
      case 3: return build::cmp(value(), CmpOp::in_array, value());
      case 4: return build::cmp(Value::field(field()), CmpOp::substr, Value::string("sub"));
      default:
        return build::cmp(value(), static_cast<CmpOp>(pick(rng, 3)), value());
    }
  }

  ExprPtr expr(int depth) {
    if (depth > 0) {
      switch (pick(rng, 4)) {
        case 0:
          return build::arith(static_cast<ArithOp>(pick(rng, 4)), expr(depth - 1),
                              expr(depth - 1));
        case 1: return build::distance(expr(depth - 1), expr(depth - 1));
        default: break;
      }
    }
    if (pick(rng, 4) == 0) return build::agg_array(static_cast<AggOp>(pick(rng, 5)), field());
    return build::val(value());
  }

  AstPtr query(int depth) {
    if (depth <= 0) return build::table("Table" + std::to_string(pick(rng, 3)));
    switch (pick(rng, 9)) {
      case 0: return build::where(query(depth - 1), filter(depth - 1));
      case 1: {
        std::vector<std::string> fields;
        for (int k = 1 + pick(rng, 3); k > 0; --k) fields.push_back(field());
        return build::project(std::move(fields), query(depth - 1));
      }
      case 2: {
        AggOp op = static_cast<AggOp>(pick(rng, 5));
        std::optional<std::string> f;
        if (op != AggOp::count) f = field();
        return build::aggregate(op, f, query(depth - 1));
      }
      case 3: {
        std::optional<std::string> alias;
        if (pick(rng, 2)) alias = "alias" + std::to_string(pick(rng, 3));
        return build::compute(expr(std::min(depth - 1, 2)), alias, query(depth - 1));
      }
      case 4:
        return build::sort(field(), pick(rng, 2) ? SortDir::asc : SortDir::desc,
                           query(depth - 1));
      case 5: return build::index(query(depth - 1), Value::number(1 + pick(rng, 9)));
      case 6:
        return build::slice(query(depth - 1), Value::number(1 + pick(rng, 5)),
                            Value::number(2 + pick(rng, 8)));
      case 7: return build::join(query(depth - 1), query(depth - 1));
      default: return build::table("Table" + std::to_string(pick(rng, 3)));
    }
  }
};

}  // namespace

AstPtr make_query(std::mt19937_64& rng, const RandomWorld& world, int max_depth) {
  QueryGen gen{rng, world};
  RowType env;
  AstPtr q = gen.base(env);
  return gen.grow(std::move(q), env, 1 + pick(rng, max_depth));
}

AstPtr make_printable_ast(std::mt19937_64& rng, int max_depth) {
  PrintableGen gen{rng};
  return gen.query(1 + pick(rng, max_depth));
}

}  // namespace testgen
