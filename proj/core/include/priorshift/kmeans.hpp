#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace priorshift {

struct KmeansResult {
  std::vector<std::vector<double>> centroids;  // cluster id -> centroid
  std::vector<int> assignment;                 // point -> cluster id
  std::vector<double> inertia;                 // per iteration, non-increasing
  std::size_t iterations = 0;
};

// Lloyd's algorithm with k-means++ seeding. Fully deterministic for a fixed
// seed: ties go to the lowest index, empty clusters are re-seeded from the
// farthest point.
KmeansResult kmeans(const std::vector<std::vector<double>>& points, int cluster_count,
                    std::uint64_t seed, int max_iters = 100, double tol = 1e-6);

}  // namespace priorshift
