#include "priorshift/kmeans.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "priorshift/errors.hpp"
#include "priorshift/rng.hpp"

namespace priorshift {

namespace {

double dist2(const std::vector<double>& a, const std::vector<double>& b) {
  double sum = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    const double diff = a[d] - b[d];
    sum += diff * diff;
  }
  return sum;
}

// k-means++: D^2 sampling against the chosen centers; degenerate all-zero
// weights fall back to the smallest unchosen index
std::vector<std::size_t> seed_centers(const std::vector<std::vector<double>>& points,
                                      std::size_t k, std::mt19937_64& gen) {
  const std::size_t n = points.size();
  std::vector<std::size_t> centers;
  std::vector<bool> chosen(n, false);
  std::vector<double> d2(n, std::numeric_limits<double>::max());

  std::size_t first = rng::below(gen, n);
  centers.push_back(first);
  chosen[first] = true;
  for (std::size_t i = 0; i < n; ++i) d2[i] = dist2(points[i], points[first]);

  while (centers.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (!chosen[i]) total += d2[i];
    std::size_t pick = n;
    if (total > 0.0) {
      const double r = rng::u01(gen) * total;
      double cum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (chosen[i] || d2[i] == 0.0) continue;
        cum += d2[i];
        if (cum > r) {
          pick = i;
          break;
        }
        pick = i;  // floating slack: keep the last positive-weight index
      }
    }
    if (pick == n)
      for (std::size_t i = 0; i < n; ++i)
        if (!chosen[i]) {
          pick = i;
          break;
        }
    centers.push_back(pick);
    chosen[pick] = true;
    for (std::size_t i = 0; i < n; ++i)
      d2[i] = std::min(d2[i], dist2(points[i], points[pick]));
  }
  return centers;
}

}  // namespace

KmeansResult kmeans(const std::vector<std::vector<double>>& points, int cluster_count,
                    std::uint64_t seed, int max_iters, double tol) {
  if (cluster_count < 1) throw ConfigError("kmeans: cluster count must be positive");
  const std::size_t n = points.size();
  const std::size_t k = static_cast<std::size_t>(cluster_count);
  if (n < k)
    throw ConfigError("kmeans: need at least " + std::to_string(k) + " points, got " +
                      std::to_string(n));
  const std::size_t dim = points[0].size();
  for (const auto& p : points)
    if (p.size() != dim) throw ConfigError("kmeans: inconsistent point dimensions");

  std::mt19937_64 gen(seed);
  KmeansResult result;
  for (std::size_t c : seed_centers(points, k, gen)) result.centroids.push_back(points[c]);
  result.assignment.assign(n, 0);
  std::vector<int> previous(n, -1);
  std::vector<std::size_t> cluster_size(k, 0);

  for (int iter = 0; iter < max_iters; ++iter) {
    // assignment: nearest centroid, lowest index on ties
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = dist2(points[i], result.centroids[0]);
      for (std::size_t c = 1; c < k; ++c) {
        const double d = dist2(points[i], result.centroids[c]);
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(c);
        }
      }
      if (result.assignment[i] != best) changed = true;
      result.assignment[i] = best;
    }

    // empty clusters steal the point farthest from its centroid
    cluster_size.assign(k, 0);
    for (int a : result.assignment) ++cluster_size[static_cast<std::size_t>(a)];
    bool repaired = false;
    for (std::size_t c = 0; c < k; ++c) {
      if (cluster_size[c] != 0) continue;
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        const auto home = static_cast<std::size_t>(result.assignment[i]);
        if (cluster_size[home] <= 1) continue;  // do not empty another cluster
        const double d = dist2(points[i], result.centroids[home]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      if (far_d < 0.0) continue;  // nothing stealable
      --cluster_size[static_cast<std::size_t>(result.assignment[far])];
      result.assignment[far] = static_cast<int>(c);
      ++cluster_size[c];
      result.centroids[c] = points[far];
      repaired = true;
      changed = true;
    }

    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      inertia += dist2(points[i], result.centroids[static_cast<std::size_t>(
                                      result.assignment[i])]);
    result.inertia.push_back(inertia);
    result.iterations = static_cast<std::size_t>(iter) + 1;

    // means update
    std::vector<std::vector<double>> next(k, std::vector<double>(dim, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      auto& acc = next[static_cast<std::size_t>(result.assignment[i])];
      for (std::size_t d = 0; d < dim; ++d) acc[d] += points[i][d];
    }
    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      if (cluster_size[c] == 0) continue;  // keep the old centroid
      for (std::size_t d = 0; d < dim; ++d) next[c][d] /= static_cast<double>(cluster_size[c]);
      shift = std::max(shift, dist2(result.centroids[c], next[c]));
      result.centroids[c] = next[c];
    }

    const bool stable = !changed && previous == result.assignment;
    previous = result.assignment;
    if ((stable && !repaired) || shift < tol * tol) break;
  }
  return result;
}

}  // namespace priorshift
