#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "priorshift/kmeans.hpp"
#include "priorshift/rng.hpp"

namespace {

using namespace priorshift;

std::vector<std::vector<double>> blob_points(std::size_t n, std::size_t dim,
                                             std::size_t blobs) {
  std::mt19937_64 gen(11);
  std::vector<std::vector<double>> points;
  points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t blob = i % blobs;
    std::vector<double> p(dim);
    for (std::size_t d = 0; d < dim; ++d)
      p[d] = static_cast<double>(blob == d % blobs ? 50 : 0) + rng::u01(gen);
    points.push_back(std::move(p));
  }
  return points;
}

void BM_Kmeans(benchmark::State& state) {
  const auto points = blob_points(static_cast<std::size_t>(state.range(0)), 16, 8);
  for (auto _ : state) {
    KmeansResult result = kmeans(points, 8, 7);
    benchmark::DoNotOptimize(result.iterations);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Kmeans)->Arg(256)->Arg(1024)->Arg(4096);

}  // namespace

BENCHMARK_MAIN();
