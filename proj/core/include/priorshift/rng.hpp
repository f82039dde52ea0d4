#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace priorshift::rng {

// std::shuffle and the std distributions are implementation-defined, so all
// randomized choices go through these helpers to keep outputs reproducible.

inline double u01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

inline std::uint64_t below(std::mt19937_64& gen, std::uint64_t n) {
  return n ? gen() % n : 0;
}

template <typename T>
void shuffle(std::vector<T>& values, std::mt19937_64& gen) {
  for (std::size_t i = values.size(); i > 1; --i)
    std::swap(values[i - 1], values[below(gen, i)]);
}

template <typename T>
std::vector<T> sample_without_replacement(std::vector<T> values, std::size_t n,
                                          std::mt19937_64& gen) {
  if (n >= values.size()) return values;
  // partial Fisher-Yates: the first n slots become the sample
  for (std::size_t i = 0; i < n; ++i)
    std::swap(values[i], values[i + below(gen, values.size() - i)]);
  values.resize(n);
  return values;
}

inline std::uint64_t fnv1a(std::string_view text,
                           std::uint64_t h = 1469598103934665603ULL) {
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace priorshift::rng
