#include <benchmark/benchmark.h>

#include <random>

#include "fixtures.hpp"
#include "flexq/aggregator.hpp"
#include "flexq/kernels.hpp"

using namespace flexq;

namespace {

constexpr const char* kCatalog = "X L trapezoid 10 30 60 80\nY L trapezoid 0 0 40 70\n";
constexpr const char* kQuery = "SELECT AVG(Z) FROM r WHERE X IS L AND Y IS L";

struct Setup {
  Relation rel;
  KnowledgeBase kb;
  ApproximateQuery aq;

  explicit Setup(std::size_t m, double sample_pct = 1.0)
      : rel(make_relation(m)),
        kb(build_kb(rel, parse_catalog(kCatalog), 0.0)),
        aq(rewrite(parse_query(kQuery), sample_pct, kb)) {}

  static Relation make_relation(std::size_t m) {
    std::mt19937_64 rng(7);
    return fixtures::random_relation(m, rng);
  }
};

std::vector<kernels::LabelColumn> label_columns(const Relation& rel) {
  return {{rel.numeric_column("X").values, {10, 30, 60, 80}}, {rel.numeric_column("Y").values, {0, 0, 40, 70}}};
}

template <bool Parallel>
void membership_matrix(benchmark::State& state) {
  Setup s(static_cast<std::size_t>(state.range(0)));
  auto cols = label_columns(s.rel);
  for (auto _ : state) {
    auto m = Parallel ? kernels::membership_matrix_parallel(cols, s.rel.size(), 0.2)
                      : kernels::membership_matrix_serial(cols, s.rel.size(), 0.2);
    benchmark::DoNotOptimize(m.entries.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void qualifying_scan(benchmark::State& state) {
  Setup s(static_cast<std::size_t>(state.range(0)));
  auto labels = std::vector<std::uint32_t>{0, 1};
  auto values = s.rel.numeric_column("Z").values;
  for (auto _ : state) {
    auto t = Parallel ? kernels::qualifying_scan_parallel(s.kb, labels, values)
                      : kernels::qualifying_scan_serial(s.kb, labels, values);
    benchmark::DoNotOptimize(t.sum);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

// Cost of one batch of a complete stream, at sample percentage range(0).
void stream_step(benchmark::State& state) {
  Setup s(10000, static_cast<double>(state.range(0)));
  std::size_t batches = 0;
  for (auto _ : state) {
    OnlineAggregation agg(s.kb, s.rel, s.aq, 3);
    while (agg.step()) ++batches;
  }
  // Per-batch time is Time / batches.
  state.counters["batches"] = benchmark::Counter(static_cast<double>(batches), benchmark::Counter::kAvgIterations);
}

// Time to the first progress event, against the exact scan below.
void first_event(benchmark::State& state) {
  Setup s(10000);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    OnlineAggregation agg(s.kb, s.rel, s.aq, ++seed);
    benchmark::DoNotOptimize(agg.step()->estimate);
  }
}

void exact_scan(benchmark::State& state) {
  Setup s(10000);
  auto exec = state.range(0) ? Execution::parallel : Execution::serial;
  for (auto _ : state) benchmark::DoNotOptimize(exact_answer(s.kb, s.aq, s.rel, exec).value);
}

}  // namespace

BENCHMARK(membership_matrix<false>)->Arg(10000)->Arg(1000000)->UseRealTime();
BENCHMARK(membership_matrix<true>)->Arg(10000)->Arg(1000000)->UseRealTime();
BENCHMARK(qualifying_scan<false>)->Arg(10000)->Arg(1000000)->UseRealTime();
BENCHMARK(qualifying_scan<true>)->Arg(10000)->Arg(1000000)->UseRealTime();
BENCHMARK(stream_step)->Arg(1)->Arg(5)->Arg(10);
BENCHMARK(first_event);
BENCHMARK(exact_scan)->Arg(0)->Arg(1)->UseRealTime();

BENCHMARK_MAIN();
