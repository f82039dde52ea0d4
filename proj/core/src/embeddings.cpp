#include "priorshift/embeddings.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>

#include "priorshift/errors.hpp"
#include "priorshift/text.hpp"

namespace priorshift {

EmbeddingTable EmbeddingTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("embedding file not readable: " + path.string());
  EmbeddingTable table;
  std::string line;
  std::size_t line_no = 0;
  std::vector<float> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const char* p = line.data();
    const char* end = p + line.size();
    while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
    const char* word_begin = p;
    while (p < end && *p != ' ' && *p != '\t') ++p;
    std::string word(word_begin, p);
    if (word.empty()) continue;
    values.clear();
    while (p < end) {
      while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
      if (p >= end) break;
      float v = 0.0f;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc())
        throw DataError(path.string() + ": line " + std::to_string(line_no) +
                        ": bad float value");
      values.push_back(v);
      p = next;
    }
    if (table.dimension_ == 0) {
      if (values.empty())
        throw DataError(path.string() + ": line " + std::to_string(line_no) +
                        ": no vector values on the first line");
      table.dimension_ = values.size();
    }
    if (values.size() != table.dimension_)
      throw DataError(path.string() + ": line " + std::to_string(line_no) +
                      ": expected " + std::to_string(table.dimension_) +
                      " values, got " + std::to_string(values.size()));
    auto [it, inserted] = table.table_.emplace(std::move(word), values);
    if (!inserted) {
      it->second = values;  // last entry wins
      ++table.duplicates_;
    }
  }
  if (table.table_.empty())
    throw DataError(path.string() + ": empty embedding table");
  return table;
}

void EmbeddingTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("output file not writable: " + path.string());
  std::map<std::string, const std::vector<float>*> sorted;
  for (const auto& [word, vec] : table_) sorted[word] = &vec;
  char buf[64];
  for (const auto& [word, vec] : sorted) {
    out << word;
    for (float v : *vec) {
      std::snprintf(buf, sizeof buf, " %.6f", static_cast<double>(v));
      out << buf;
    }
    out << '\n';
  }
}

void EmbeddingTable::insert(const std::string& word, std::vector<float> vector) {
  if (dimension_ == 0) dimension_ = vector.size();
  if (vector.size() != dimension_)
    throw ConfigError("embedding insert: dimension mismatch for \"" + word + "\"");
  auto [it, inserted] = table_.emplace(word, std::move(vector));
  if (!inserted) ++duplicates_;
}

const std::vector<float>* EmbeddingTable::lookup(const std::string& word) const {
  auto it = table_.find(word);
  return it == table_.end() ? nullptr : &it->second;
}

std::optional<std::vector<double>> EmbeddingTable::phrase_vector(
    const std::string& phrase) const {
  std::vector<double> sum(dimension_, 0.0);
  std::size_t hits = 0;
  for (const auto& word : split_words(phrase)) {
    if (const auto* vec = lookup(word)) {
      for (std::size_t d = 0; d < dimension_; ++d) sum[d] += (*vec)[d];
      ++hits;
    }
  }
  if (hits == 0) return std::nullopt;
  for (double& v : sum) v /= static_cast<double>(hits);
  return sum;
}

}  // namespace priorshift
