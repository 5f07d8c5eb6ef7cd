#include <benchmark/benchmark.h>

#include "dbtalk/parser.hpp"
#include "dbtalk/printer.hpp"

namespace {

const char* kQuery =
    "[ author ] of ( ( @Restaurant , id == lookup ( \" shake shack \" , @Restaurant ) ) join "
    "( @Review , reviewRating.ratingValue == 1 ) ) , in_array ( id , review )";

void bm_parse(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(dbtalk::parse(kQuery));
}

void bm_print(benchmark::State& state) {
  auto q = dbtalk::parse(kQuery);
  for (auto _ : state) benchmark::DoNotOptimize(dbtalk::print(*q));
}

void bm_roundtrip(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(dbtalk::print(*dbtalk::parse(kQuery)));
}

}  // namespace

BENCHMARK(bm_parse);
BENCHMARK(bm_print);
BENCHMARK(bm_roundtrip);
