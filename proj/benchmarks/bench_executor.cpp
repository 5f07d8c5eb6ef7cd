#include <benchmark/benchmark.h>

#include "dbtalk/executor.hpp"
#include "dbtalk/parser.hpp"
#include "dbtalk/typecheck.hpp"

namespace {

using namespace dbtalk;

struct World {
  NlSchema schema;
  KnowledgeBase kb;
  EvalContext ctx;

  World() {
    schema = NlSchema::load(std::filesystem::path(DBTALK_FIXTURE_DIR) / "restaurant" /
                            "schema.json");
    kb = KnowledgeBase::load_dir(std::filesystem::path(DBTALK_FIXTURE_DIR) / "restaurant" / "kb",
                                 schema);
    ctx.here = GeoPoint{37.7793, -122.4193};
    ctx.now = DateVal{"2023-06-15"};
  }
};

const World& world() {
  static World w;
  return w;
}

void bm_selection(benchmark::State& state) {
  auto q = parse("@Restaurant , aggregateRating.ratingValue >= 4 && servesCuisine == \" chinese \"");
  typecheck(*q, world().schema);
  for (auto _ : state)
    benchmark::DoNotOptimize(execute(*q, world().kb, world().schema, world().ctx));
}

void bm_join_exists(benchmark::State& state) {
  auto q = parse(
      "@Restaurant , exists ( ( @Review , reviewRating.ratingValue <= 2 ) , in_array ( id , "
      "review ) )");
  typecheck(*q, world().schema);
  for (auto _ : state)
    benchmark::DoNotOptimize(execute(*q, world().kb, world().schema, world().ctx));
}

void bm_nearest(benchmark::State& state) {
  auto q = parse("( sort distance asc of compute distance ( geo , here ) of @Restaurant ) [ 1 ]");
  typecheck(*q, world().schema);
  for (auto _ : state)
    benchmark::DoNotOptimize(execute(*q, world().kb, world().schema, world().ctx));
}

}  // namespace

BENCHMARK(bm_selection);
BENCHMARK(bm_join_exists);
BENCHMARK(bm_nearest);
