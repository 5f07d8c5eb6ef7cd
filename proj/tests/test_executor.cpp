#include <doctest.h>

#include <set>

#include "dbtalk/errors.hpp"
#include "dbtalk/executor.hpp"
#include "dbtalk/geo.hpp"
#include "dbtalk/parser.hpp"
#include "dbtalk/typecheck.hpp"
#include "support/fixtures.hpp"

using namespace dbtalk;

namespace {

EvalContext sf_context() {
  EvalContext ctx;
  ctx.here = GeoPoint{37.7793, -122.4193};  // san francisco civic center
  ctx.now = DateVal{"2023-06-15"};
  return ctx;
}

std::set<std::string> ids_of(const ResultSet& rs) {
  std::set<std::string> out;
  for (const Row& row : rs.rows) out.insert(std::get<EntityId>(row.at("id").v).id);
  return out;
}

ResultSet run(const testgen::Fixture& fx, const std::string& text) {
  AstPtr q = parse(text);
  typecheck(*q, fx.schema);
  return execute(*q, fx.kb, fx.schema, sf_context());
}

}  // namespace

TEST_CASE("haversine: identity, symmetry, antipodal arc") {
  const GeoPoint sf{37.7793, -122.4193};
  const GeoPoint ny{40.7128, -74.006};
  CHECK(haversine_meters(sf, sf) == 0.0);
  CHECK(haversine_meters(sf, ny) == haversine_meters(ny, sf));
  // half the great circle, R = 6371 km
  const double half = haversine_meters({0, 0}, {0, 180});
  CHECK(half == doctest::Approx(2.0015e7).epsilon(0.001));
  // and a quarter
  CHECK(haversine_meters({0, 0}, {0, 90}) == doctest::Approx(half / 2).epsilon(1e-9));
}

TEST_CASE("execute: selection filters by brute force") {
  auto fx = testgen::load_fixture("restaurant");
  ResultSet rs = run(fx, "@Restaurant , aggregateRating.ratingValue >= 4.5");
  std::set<std::string> expected;
  for (const Row& row : fx.kb.table("Restaurant")->rows) {
    const Value& v = row.at("aggregateRating.ratingValue");
    if (!v.is_null() && std::get<double>(v.v) >= 4.5)
      expected.insert(std::get<EntityId>(row.at("id").v).id);
  }
  CHECK(ids_of(rs) == expected);
  CHECK(!rs.rows.empty());
}

TEST_CASE("execute: count of an empty selection is zero") {
  auto fx = testgen::load_fixture("restaurant");
  ResultSet rs = run(fx, "aggregate count of ( @Restaurant , false )");
  REQUIRE(rs.rows.size() == 1);
  CHECK(std::get<double>(rs.rows[0].at("result").v) == 0);
}

TEST_CASE("execute: index of sort is the argmin row") {
  auto fx = testgen::load_fixture("restaurant");
  ResultSet rs = run(fx, "( sort aggregateRating.ratingValue asc of @Restaurant ) [ 1 ]");
  REQUIRE(rs.rows.size() == 1);
  // oracle: linear scan for the first row holding the minimum
  const Row* best = nullptr;
  for (const Row& row : fx.kb.table("Restaurant")->rows) {
    const Value& v = row.at("aggregateRating.ratingValue");
    if (v.is_null()) continue;
    if (!best || std::get<double>(v.v) <
                     std::get<double>(best->at("aggregateRating.ratingValue").v))
      best = &row;
  }
  REQUIRE(best);
  CHECK(rs.rows[0].at("id") == best->at("id"));
}

TEST_CASE("execute: lookup resolution") {
  auto fx = testgen::load_fixture("restaurant");
  CHECK(fx.kb.resolve_lookup("shake shack", "Restaurant") == EntityId{"Restaurant", "r1"});
  CHECK(fx.kb.resolve_lookup("Shake Shack", "Restaurant") == EntityId{"Restaurant", "r1"});
  CHECK_THROWS_AS(fx.kb.resolve_lookup("nowhere", "Restaurant"), RuntimeError);
  try {
    fx.kb.resolve_lookup("nowhere", "Restaurant");
  } catch (const RuntimeError& e) {
    CHECK(e.kind == RuntimeError::Kind::lookup_not_found);
  }
  // ambiguity is an error, not a silent pick
  KnowledgeBase kb = fx.kb;
  Row dup;
  dup["id"] = Value(EntityId{"Restaurant", "r99"});
  dup["name"] = Value::string("shake shack");
  kb.add_row("Restaurant", std::move(dup));
  try {
    kb.resolve_lookup("shake shack", "Restaurant");
    FAIL("expected lookup_ambiguous");
  } catch (const RuntimeError& e) {
    CHECK(e.kind == RuntimeError::Kind::lookup_ambiguous);
    CHECK(std::string(e.what()).find("2") != std::string::npos);
  }
}

TEST_CASE("execute: index out of range composes as empty") {
  auto fx = testgen::load_fixture("restaurant");
  CHECK(run(fx, "@Restaurant [ 99 ]").rows.empty());
  CHECK(run(fx, "( @Restaurant , false ) [ 1 ]").rows.empty());
}

TEST_CASE("execute: slice algebra") {
  auto fx = testgen::load_fixture("restaurant");
  const auto n = static_cast<long long>(fx.kb.table("Restaurant")->rows.size());
  for (long long a : {1, 2, 5, 11}) {
    for (long long b : {1, 3, 12, 40}) {
      ResultSet rs = run(fx, "@Restaurant [ " + std::to_string(a) + " : " + std::to_string(b) +
                                 " ]");
      const long long expected = std::max<long long>(0, std::min(b, n) - a + 1);
      CHECK(static_cast<long long>(rs.rows.size()) == expected);
    }
  }
}

TEST_CASE("execute: join cardinality and shadowing") {
  auto fx = testgen::load_fixture("restaurant");
  const auto n1 = fx.kb.table("Restaurant")->rows.size();
  const auto n2 = fx.kb.table("Review")->rows.size();
  ResultSet rs = run(fx, "@Restaurant join @Review");
  CHECK(rs.rows.size() == n1 * n2);
  for (const Row& row : rs.rows)
    CHECK(std::get<EntityId>(row.at("id").v).table == "Review");
}

TEST_CASE("execute: count equals un-aggregated size") {
  auto fx = testgen::load_fixture("restaurant");
  const std::string inner = "@Restaurant , servesCuisine == \" chinese \"";
  ResultSet plain = run(fx, inner);
  ResultSet counted = run(fx, "aggregate count of ( " + inner + " )");
  CHECK(std::get<double>(counted.rows[0].at("result").v) ==
        static_cast<double>(plain.rows.size()));
}

TEST_CASE("execute: sort is stable and puts nulls last") {
  auto fx = testgen::load_fixture("restaurant");
  KnowledgeBase kb = fx.kb;
  // two rows tied on rating 4.1 in insertion order r1 < r98, one null row
  Row tied;
  tied["id"] = Value(EntityId{"Restaurant", "r98"});
  tied["name"] = Value::string("tied place");
  tied["aggregateRating.ratingValue"] = Value::number(4.1);
  kb.add_row("Restaurant", std::move(tied));
  Row hole;
  hole["id"] = Value(EntityId{"Restaurant", "r97"});
  hole["name"] = Value::string("null place");
  hole["aggregateRating.ratingValue"] = Value::null();
  kb.add_row("Restaurant", std::move(hole));

  AstPtr q = parse("sort aggregateRating.ratingValue asc of @Restaurant");
  typecheck(*q, fx.schema);
  ResultSet rs = execute(*q, kb, fx.schema, sf_context());
  REQUIRE(rs.rows.size() == fx.kb.table("Restaurant")->rows.size() + 2);
  CHECK(std::get<EntityId>(rs.rows.back().at("id").v).id == "r97");
  // stability: r1 (inserted first) precedes r98 at the same key
  size_t pos_r1 = 0, pos_r98 = 0;
  for (size_t i = 0; i < rs.rows.size(); ++i) {
    const std::string id = std::get<EntityId>(rs.rows[i].at("id").v).id;
    if (id == "r1") pos_r1 = i;
    if (id == "r98") pos_r98 = i;
  }
  CHECK(pos_r1 < pos_r98);
}

TEST_CASE("execute: nulls fail comparisons and are skipped by aggregates") {
  auto fx = testgen::load_fixture("restaurant");
  KnowledgeBase kb;
  for (int i = 0; i < 3; ++i) {
    Row row;
    row["id"] = Value(EntityId{"Restaurant", "x" + std::to_string(i)});
    row["name"] = Value::string("place " + std::to_string(i));
    row["aggregateRating.ratingValue"] = i == 0 ? Value::number(4.0) : Value::null();
    kb.add_row("Restaurant", std::move(row));
  }
  AstPtr sel = parse("@Restaurant , aggregateRating.ratingValue <= 100");
  typecheck(*sel, fx.schema);
  CHECK(execute(*sel, kb, fx.schema, sf_context()).rows.size() == 1);  // nulls fail <=
  // negation of a null comparison holds (three-valued logic collapsed)
  AstPtr neg = parse("@Restaurant , ! aggregateRating.ratingValue <= 100");
  typecheck(*neg, fx.schema);
  CHECK(execute(*neg, kb, fx.schema, sf_context()).rows.size() == 2);

  AstPtr avg = parse("aggregate avg aggregateRating.ratingValue of @Restaurant");
  typecheck(*avg, fx.schema);
  CHECK(std::get<double>(execute(*avg, kb, fx.schema, sf_context()).rows[0].at("result").v) ==
        4.0);
  // all-null input aggregates to a null result row
  AstPtr avg_null =
      parse("aggregate avg aggregateRating.ratingValue of ( @Restaurant , name =~ \" place 1 \" )");
  typecheck(*avg_null, fx.schema);
  CHECK(execute(*avg_null, kb, fx.schema, sf_context()).rows[0].at("result").is_null());
}

TEST_CASE("execute: exists matches the brute-force link scan") {
  auto fx = testgen::load_fixture("restaurant");
  ResultSet rs = run(fx,
                     "@Restaurant , exists ( ( @Review , reviewRating.ratingValue <= 2 ) , "
                     "in_array ( id , review ) )");
  // brute force: restaurants whose review array holds a review rated <= 2
  std::set<std::string> expected;
  for (const Row& r : fx.kb.table("Restaurant")->rows) {
    const auto* links = std::get_if<ValueList>(&r.at("review").v);
    if (!links) continue;
    for (const Row& v : fx.kb.table("Review")->rows) {
      const Value& rating = v.at("reviewRating.ratingValue");
      if (rating.is_null() || std::get<double>(rating.v) > 2) continue;
      for (const Value& link : *links)
        if (link == v.at("id")) expected.insert(std::get<EntityId>(r.at("id").v).id);
    }
  }
  CHECK(ids_of(rs) == expected);
  CHECK(!rs.rows.empty());
}

TEST_CASE("execute: division by zero and missing context are runtime errors") {
  auto fx = testgen::load_fixture("restaurant");
  AstPtr div = parse(
      "compute aggregateRating.ratingValue / ( aggregateRating.reviewCount - "
      "aggregateRating.reviewCount ) of @Restaurant");
  typecheck(*div, fx.schema);
  CHECK_THROWS_AS(execute(*div, fx.kb, fx.schema, sf_context()), RuntimeError);

  AstPtr here_q = parse("compute distance ( geo , here ) of @Restaurant");
  typecheck(*here_q, fx.schema);
  EvalContext empty;
  try {
    execute(*here_q, fx.kb, fx.schema, empty);
    FAIL("expected missing_context");
  } catch (const RuntimeError& e) {
    CHECK(e.kind == RuntimeError::Kind::missing_context);
  }
}

TEST_CASE("execute: projection keeps id, computation appends a column") {
  auto fx = testgen::load_fixture("restaurant");
  ResultSet proj = run(fx, "[ servesCuisine ] of @Restaurant");
  REQUIRE(!proj.rows.empty());
  CHECK(proj.rows[0].size() == 2);
  CHECK(proj.rows[0].count("id") == 1);

  ResultSet comp = run(fx, "compute count ( review ) of @Restaurant");
  for (const Row& row : comp.rows) {
    const auto* links = std::get_if<ValueList>(&row.at("review").v);
    CHECK(std::get<double>(row.at("count").v) ==
          static_cast<double>(links ? links->size() : 0));
  }
}
