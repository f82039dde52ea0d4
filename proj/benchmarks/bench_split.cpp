#include <benchmark/benchmark.h>

#include "priorshift/splitter.hpp"
#include "priorshift/synth.hpp"

namespace {

using namespace priorshift;

Corpus make_corpus(std::size_t n) {
  return generate_synthetic_corpus(default_synth_config(n, 0.8), 7);
}

void BM_BuildGroups(benchmark::State& state) {
  const Corpus corpus = make_corpus(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    GroupSet groups = build_groups(corpus);
    benchmark::DoNotOptimize(groups.groups.size());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BuildGroups)->Arg(1000)->Arg(10000)->Arg(100000);

void BM_GreedyResplit(benchmark::State& state) {
  const Corpus corpus = make_corpus(static_cast<std::size_t>(state.range(0)));
  const GroupSet groups = build_groups(corpus);
  for (auto _ : state) {
    SplitAssignment assignment = greedy_resplit(groups, corpus);
    benchmark::DoNotOptimize(assignment.trace.size());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GreedyResplit)->Arg(1000)->Arg(10000)->Arg(100000);

void BM_CoverageStats(benchmark::State& state) {
  const Corpus corpus = make_corpus(static_cast<std::size_t>(state.range(0)));
  const GroupSet groups = build_groups(corpus);
  const SplitAssignment assignment = greedy_resplit(groups, corpus);
  const SplitRecords records = derive_records(groups, assignment);
  for (auto _ : state) {
    CoverageStats stats =
        compute_coverage_stats(corpus, records.train, records.test, 1000);
    benchmark::DoNotOptimize(stats.question_concept_coverage);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CoverageStats)->Arg(1000)->Arg(10000);

}  // namespace
