#include <memory>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "lego/bundle.hpp"
#include "lego/lego_sketch.hpp"
#include "lego/sketch.hpp"
#include "lego/streams.hpp"

namespace {

constexpr std::size_t kBudget = 100 * 1024;

const std::vector<std::string>& stream() {
  static const auto items = lego::gen_stream({10000, 1.0, 100000, 42});
  return items;
}

lego::SketchKind kind_of(const benchmark::State& state) {
  return static_cast<lego::SketchKind>(state.range(0));
}

void BM_Store(benchmark::State& state) {
  const auto& items = stream();
  auto sketch = lego::make_sketch(kind_of(state), kBudget);
  std::size_t i = 0;
  for (auto _ : state) {
    sketch->store(items[i]);
    if (++i == items.size()) i = 0;
  }
  state.SetItemsProcessed(state.iterations());
  state.SetLabel(std::string(lego::to_string(kind_of(state))));
}

void BM_Query(benchmark::State& state) {
  const auto& items = stream();
  auto sketch = lego::make_sketch(kind_of(state), kBudget);
  for (const auto& item : items) sketch->store(item);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sketch->query(items[i]));
    if (++i == items.size()) i = 0;
  }
  state.SetItemsProcessed(state.iterations());
  state.SetLabel(std::string(lego::to_string(kind_of(state))));
}

void BM_LegoMerge(benchmark::State& state) {
  const auto bundle =
      std::make_shared<const lego::WeightBundle>(lego::WeightBundle::untrained(42));
  const auto bricks = static_cast<std::size_t>(state.range(0));
  lego::LegoSketch a(bundle, bricks), b(bundle, bricks);
  for (const auto& item : stream()) b.store(item);
  for (auto _ : state) a.merge(b);
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(b.memory_bytes()));
}

void kinds(benchmark::internal::Benchmark* b) {
  for (auto kind : {lego::SketchKind::cm, lego::SketchKind::cs, lego::SketchKind::lego,
                    lego::SketchKind::d_cms, lego::SketchKind::d_lego}) {
    b->Arg(static_cast<int>(kind));
  }
}

BENCHMARK(BM_Store)->Apply(kinds);
BENCHMARK(BM_Query)->Apply(kinds);
BENCHMARK(BM_LegoMerge)->Arg(1)->Arg(4);

}  // namespace

BENCHMARK_MAIN();
