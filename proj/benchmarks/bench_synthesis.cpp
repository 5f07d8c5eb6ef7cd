#include <benchmark/benchmark.h>

#include "dbtalk/generic_library.hpp"
#include "dbtalk/schema.hpp"
#include "dbtalk/template_engine.hpp"

namespace {

using namespace dbtalk;

const NlSchema& schema() {
  static NlSchema s =
      NlSchema::load(std::filesystem::path(DBTALK_FIXTURE_DIR) / "hotel" / "schema.json");
  return s;
}

void bm_instantiate_library(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(builtin_templates(schema()));
}

void bm_expand(benchmark::State& state) {
  auto templates = builtin_templates(schema());
  ExpansionConfig cfg;
  cfg.max_depth = static_cast<int>(state.range(0));
  cfg.seed = 42;
  cfg.default_target = 60;
  for (auto _ : state) {
    auto out = expand(templates, schema(), cfg);
    benchmark::DoNotOptimize(out);
    state.counters["derivations"] = static_cast<double>(out.size());
  }
}

}  // namespace

BENCHMARK(bm_instantiate_library);
BENCHMARK(bm_expand)->Arg(3)->Arg(4)->Arg(5);

BENCHMARK_MAIN();
