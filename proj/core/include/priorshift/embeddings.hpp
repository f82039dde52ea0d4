#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace priorshift {

// word -> dense vector table in the usual "word v1 .. vd" text layout
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dimension) : dimension_(dimension) {}

  static EmbeddingTable load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;  // sorted by word, %.6f

  void insert(const std::string& word, std::vector<float> vector);
  const std::vector<float>* lookup(const std::string& word) const;

  // mean of the in-vocabulary word vectors of the phrase, absent if none
  std::optional<std::vector<double>> phrase_vector(const std::string& phrase) const;

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return table_.size(); }
  std::size_t duplicate_count() const { return duplicates_; }

 private:
  std::size_t dimension_ = 0;
  std::unordered_map<std::string, std::vector<float>> table_;
  std::size_t duplicates_ = 0;
};

}  // namespace priorshift
