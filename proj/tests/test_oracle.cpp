#include <doctest.h>

#include <random>

#include "dbtalk/errors.hpp"
#include "dbtalk/executor.hpp"
#include "dbtalk/parser.hpp"
#include "dbtalk/printer.hpp"
#include "dbtalk/typecheck.hpp"
#include "support/random_query.hpp"
#include "support/reference_eval.hpp"

using namespace dbtalk;

// Seeded random queries against the naive set-comprehension evaluator.
// The full-size run (1000 queries, 50 KBs) lives in the acceptance suite;
// this is the fast everyday version of the same property.
TEST_CASE("oracle: engine matches the reference evaluator") {
  std::mt19937_64 rng(424242);
  EvalContext ctx;
  ctx.here = GeoPoint{37.5, -122.2};
  ctx.now = DateVal{"2023-06-15"};

  int executed = 0;
  for (int world_i = 0; world_i < 10; ++world_i) {
    auto world = testgen::make_world(rng, 14);
    for (int q_i = 0; q_i < 25; ++q_i) {
      AstPtr q = testgen::make_query(rng, world, 5);
      try {
        typecheck(*q, world.schema);
      } catch (const TypeError&) {
        continue;  // generator slack; skipped queries don't count
      }
      ResultSet engine = execute(*q, world.kb, world.schema, ctx);
      auto reference = refeval::evaluate(*q, world.kb, world.schema, ctx);
      const std::string lhs = refeval::canonical_rows(engine.rows);
      const std::string rhs = refeval::canonical_rows(reference);
      if (lhs != rhs) MESSAGE("query: " << print(*q));
      REQUIRE(lhs == rhs);
      ++executed;
    }
  }
  CHECK(executed > 200);
}

// Order-sensitive comparison for the order-defining operators.
TEST_CASE("oracle: sort, index and slice agree row-for-row in order") {
  std::mt19937_64 rng(777);
  EvalContext ctx;
  ctx.here = GeoPoint{37.5, -122.2};
  for (int i = 0; i < 60; ++i) {
    auto world = testgen::make_world(rng, 12);
    AstPtr q = build::slice(
        build::sort("num", i % 2 ? SortDir::asc : SortDir::desc, build::table("Alpha")),
        Value::number(1 + i % 4), Value::number(3 + i % 5));
    typecheck(*q, world.schema);
    ResultSet engine = execute(*q, world.kb, world.schema, ctx);
    auto reference = refeval::evaluate(*q, world.kb, world.schema, ctx);
    REQUIRE(refeval::ordered_rows(engine.rows) == refeval::ordered_rows(reference));
  }
}
