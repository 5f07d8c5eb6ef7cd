#include <doctest.h>

#include <random>

#include "dbtalk/errors.hpp"
#include "dbtalk/parser.hpp"
#include "dbtalk/printer.hpp"
#include "support/random_query.hpp"

using namespace dbtalk;

TEST_CASE("parse: bare table reference") {
  AstPtr q = parse("@Restaurant");
  REQUIRE(std::holds_alternative<TableRef>(q->node));
  CHECK(std::get<TableRef>(q->node).table == "Restaurant");
  CHECK(print(*q) == "@Restaurant");
}

TEST_CASE("parse: nearest-restaurant query") {
  AstPtr q = parse("( sort distance asc of compute distance ( geo , here ) of @Restaurant ) [ 1 ]");
  AstPtr expected = build::index(
      build::sort("distance", SortDir::asc,
                  build::compute(build::distance(build::val(Value::field("geo")),
                                                 build::val(Value::here())),
                                 std::nullopt, build::table("Restaurant"))),
      Value::number(1));
  CHECK(*q == *expected);
  CHECK(print(*q) ==
        "( sort distance asc of compute distance ( geo , here ) of @Restaurant ) [ 1 ]");
}

TEST_CASE("parse: one-star-review query") {
  const std::string text =
      "[ author ] of ( ( @Restaurant , id == lookup ( \" shake shack \" , @Restaurant ) ) join "
      "( @Review , reviewRating.ratingValue == 1 ) ) , in_array ( id , review )";
  AstPtr q = parse(text);
  AstPtr expected = build::project(
      {"author"},
      build::where(
          build::join(build::where(build::table("Restaurant"),
                                   build::cmp(Value::field("id"), CmpOp::eq,
                                              Value(LookupRef{"shake shack", "Restaurant", -1}))),
                      build::where(build::table("Review"),
                                   build::cmp(Value::field("reviewRating.ratingValue"), CmpOp::eq,
                                              Value::number(1)))),
          build::cmp(Value::field("id"), CmpOp::in_array, Value::field("review"))));
  CHECK(*q == *expected);
  CHECK(print(*q) == text);
}

TEST_CASE("print: selection with string literal is lowercased") {
  AstPtr q = build::where(build::table("Restaurant"),
                          build::cmp(Value::field("servesCuisine"), CmpOp::eq,
                                     Value::string("chinese")));
  CHECK(print(*q) == "@Restaurant , servesCuisine == \" chinese \"");
  // parsing an uppercase literal normalizes it
  CHECK(*parse("@Restaurant , servesCuisine == \" Chinese \"") == *q);
}

TEST_CASE("parse: measures convert to SI at parse time") {
  AstPtr q = parse("@Restaurant , deliveryRadius >= 10 mi");
  const auto& sel = std::get<Selection>(q->node);
  const auto& cmp = std::get<FCmp>(sel.filter->node);
  const auto& m = std::get<MeasureVal>(cmp.rhs.v);
  CHECK(m.si == doctest::Approx(16093.44));
  CHECK(m.display == 10);
  CHECK(m.unit == "mi");
  CHECK(print(*q) == "@Restaurant , deliveryRadius >= 10 mi");
}

TEST_CASE("parse: filter connectives and precedence") {
  AstPtr q = parse("@T , a == 1 || b == 2 && ! c == 3");
  const auto& sel = std::get<Selection>(q->node);
  const auto* orf = std::get_if<FOr>(&sel.filter->node);
  REQUIRE(orf);
  CHECK(std::holds_alternative<FCmp>(orf->lhs->node));
  const auto* andf = std::get_if<FAnd>(&orf->rhs->node);
  REQUIRE(andf);
  CHECK(std::holds_alternative<FNot>(andf->rhs->node));
  CHECK(print(*q) == "@T , a == 1 || b == 2 && ! c == 3");
}

TEST_CASE("parse: slices, dates, times, placeholders") {
  CHECK(print(*parse("@T [ 2 : 5 ]")) == "@T [ 2 : 5 ]");
  CHECK(print(*parse("@T , opened >= 2020-01-15")) == "@T , opened >= 2020-01-15");
  CHECK(print(*parse("@T , checkoutTime >= 12:00")) == "@T , checkoutTime >= 12:00:00");
  CHECK(print(*parse("@T , servesCuisine == VALUE_0")) == "@T , servesCuisine == VALUE_0");
  CHECK(print(*parse("@T , id == lookup ( VALUE_2 , @T )")) ==
        "@T , id == lookup ( VALUE_2 , @T )");
}

TEST_CASE("parse: redundant parentheses are accepted and canonicalized") {
  CHECK(print(*parse("( ( @T ) )")) == "@T");
  CHECK(print(*parse("@A join @B , x == 1")) == "( @A join @B ) , x == 1");
  CHECK(print(*parse("@T , ( a == 1 && b == 2 )")) == "@T , a == 1 && b == 2");
}

TEST_CASE("parse: exists keeps its two parts apart") {
  const std::string text =
      "@Restaurant , exists ( ( @Review , reviewRating.ratingValue >= 4 ) , in_array ( id , review ) )";
  AstPtr q = parse(text);
  const auto& sel = std::get<Selection>(q->node);
  const auto* ex = std::get_if<FExists>(&sel.filter->node);
  REQUIRE(ex);
  CHECK(std::holds_alternative<Selection>(ex->subquery->node));
  CHECK(print(*q) == text);
}

TEST_CASE("parse: syntax errors carry position and expectations") {
  try {
    parse("@Restaurant , servesCuisine ==");
    FAIL("expected SyntaxError");
  } catch (const SyntaxError& e) {
    CHECK(e.position == 4);
    CHECK(!e.expected.empty());
  }
  CHECK_THROWS_AS(parse("sort of @T"), SyntaxError);
  CHECK_THROWS_AS(parse("@T , "), SyntaxError);
  CHECK_THROWS_AS(parse("@T extra"), SyntaxError);
  CHECK_THROWS_AS(parse(""), SyntaxError);
  CHECK_THROWS_AS(parse("@T , a == \" unterminated"), SyntaxError);
}

TEST_CASE("roundtrip: parse(print(q)) == q over random trees") {
  std::mt19937_64 rng(20240817);
  for (int i = 0; i < 600; ++i) {
    AstPtr q = testgen::make_printable_ast(rng, 6);
    const std::string text = print(*q);
    AstPtr back;
    try {
      back = parse(text);
    } catch (const SyntaxError& e) {
      MESSAGE("failed to reparse: " << text);
      throw;
    }
    if (!(*back == *q)) MESSAGE("roundtrip mismatch on: " << text);
    REQUIRE(*back == *q);
    CHECK(print(*back) == text);
  }
}
