#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "priorshift/errors.hpp"
#include "priorshift/kmeans.hpp"
#include "priorshift/rng.hpp"

using namespace priorshift;

namespace {

double sse_of_partition(const std::vector<std::vector<double>>& points,
                        const std::vector<int>& assignment, int k) {
  double total = 0.0;
  for (int c = 0; c < k; ++c) {
    std::vector<double> mean(points[0].size(), 0.0);
    std::size_t count = 0;
    for (std::size_t i = 0; i < points.size(); ++i)
      if (assignment[i] == c) {
        ++count;
        for (std::size_t d = 0; d < mean.size(); ++d) mean[d] += points[i][d];
      }
    if (count == 0) continue;
    for (auto& v : mean) v /= static_cast<double>(count);
    for (std::size_t i = 0; i < points.size(); ++i)
      if (assignment[i] == c)
        for (std::size_t d = 0; d < mean.size(); ++d) {
          const double diff = points[i][d] - mean[d];
          total += diff * diff;
        }
  }
  return total;
}

// optimal two-cluster cost by trying every assignment
double brute_force_best_sse(const std::vector<std::vector<double>>& points) {
  const std::size_t n = points.size();
  double best = std::numeric_limits<double>::max();
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    std::vector<int> assignment(n);
    for (std::size_t i = 0; i < n; ++i) assignment[i] = (mask >> i) & 1;
    best = std::min(best, sse_of_partition(points, assignment, 2));
  }
  return best;
}

std::vector<std::vector<double>> random_points(std::size_t n, std::size_t dim,
                                               std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<std::vector<double>> points(n, std::vector<double>(dim));
  for (auto& p : points)
    for (auto& v : p) v = 10.0 * rng::u01(gen);
  return points;
}

}  // namespace

TEST_CASE("two separated pairs recover the optimal clustering") {
  const std::vector<std::vector<double>> points = {{0.0}, {1.0}, {10.0}, {11.0}};
  const KmeansResult result = kmeans(points, 2, 7);

  // brute force over all 16 assignments says the best cost is 1.0
  const double best = brute_force_best_sse(points);
  CHECK(best == doctest::Approx(1.0));
  REQUIRE(!result.inertia.empty());
  CHECK(result.inertia.back() == doctest::Approx(best));

  std::vector<double> centers = {result.centroids[0][0], result.centroids[1][0]};
  std::sort(centers.begin(), centers.end());
  CHECK(centers[0] == doctest::Approx(0.5));
  CHECK(centers[1] == doctest::Approx(10.5));
  CHECK(result.assignment[0] == result.assignment[1]);
  CHECK(result.assignment[2] == result.assignment[3]);
  CHECK(result.assignment[0] != result.assignment[2]);
}

TEST_CASE("kmeans result is well formed and deterministic") {
  const auto points = random_points(120, 5, 3);
  const KmeansResult a = kmeans(points, 6, 42);
  const KmeansResult b = kmeans(points, 6, 42);
  CHECK(a.assignment == b.assignment);
  CHECK(a.centroids == b.centroids);
  CHECK(a.inertia == b.inertia);

  REQUIRE(a.centroids.size() == 6);
  REQUIRE(a.assignment.size() == points.size());
  for (int c : a.assignment) {
    CHECK(c >= 0);
    CHECK(c < 6);
  }
}

TEST_CASE("inertia never increases between iterations") {
  for (std::uint64_t seed : {1, 2, 3, 4, 5, 6, 7, 8}) {
    for (int k : {1, 2, 5, 17}) {
      const auto points = random_points(80, 3, seed);
      const KmeansResult result = kmeans(points, k, seed * 31);
      CAPTURE(seed);
      CAPTURE(k);
      for (std::size_t i = 1; i < result.inertia.size(); ++i)
        CHECK(result.inertia[i] <= result.inertia[i - 1] + 1e-9);
    }
  }
}

TEST_CASE("k equal to one yields the global mean") {
  const auto points = random_points(50, 4, 9);
  const KmeansResult result = kmeans(points, 1, 5);
  std::vector<double> mean(4, 0.0);
  for (const auto& p : points)
    for (std::size_t d = 0; d < 4; ++d) mean[d] += p[d];
  for (auto& v : mean) v /= 50.0;
  double sse = 0.0;
  for (const auto& p : points)
    for (std::size_t d = 0; d < 4; ++d) sse += (p[d] - mean[d]) * (p[d] - mean[d]);
  for (std::size_t d = 0; d < 4; ++d)
    CHECK(result.centroids[0][d] == doctest::Approx(mean[d]));
  CHECK(result.inertia.back() == doctest::Approx(sse));
}

TEST_CASE("k equal to the point count drives inertia to zero") {
  const auto points = random_points(12, 2, 13);
  const KmeansResult result = kmeans(points, 12, 3);
  CHECK(result.inertia.back() == doctest::Approx(0.0));
  std::set<int> used(result.assignment.begin(), result.assignment.end());
  CHECK(used.size() == 12);  // every point owns a cluster
}

TEST_CASE("identical points terminate with zero inertia") {
  const std::vector<std::vector<double>> points(20, {3.0, 3.0});
  const KmeansResult result = kmeans(points, 4, 1);
  CHECK(result.inertia.back() == doctest::Approx(0.0));
  CHECK(result.iterations <= 100);
}

TEST_CASE("duplicate-heavy input exercises empty cluster repair") {
  // three distinct values, eight clusters: repair must steal points
  std::vector<std::vector<double>> points;
  for (int i = 0; i < 30; ++i) points.push_back({static_cast<double>(i % 3)});
  const KmeansResult result = kmeans(points, 8, 17);
  for (std::size_t i = 1; i < result.inertia.size(); ++i)
    CHECK(result.inertia[i] <= result.inertia[i - 1] + 1e-9);
  for (int c : result.assignment) {
    CHECK(c >= 0);
    CHECK(c < 8);
  }
}

TEST_CASE("kmeans rejects bad arguments") {
  const auto points = random_points(10, 2, 1);
  CHECK_THROWS_AS(kmeans(points, 0, 1), ConfigError);
  CHECK_THROWS_AS(kmeans(points, -1, 1), ConfigError);
  CHECK_THROWS_AS(kmeans(points, 11, 1), ConfigError);
  CHECK_THROWS_AS(kmeans({}, 1, 1), ConfigError);
}
