#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace priorshift {

using WordSet = std::set<std::string>;

class StopWordList {
 public:
  StopWordList() = default;
  explicit StopWordList(const std::vector<std::string>& words);

  // "is are the a an of in on at to what this that"
  static StopWordList default_list();
  // one word per line, '#' starts a comment
  static StopWordList from_file(const std::filesystem::path& path);

  bool contains(const std::string& word) const { return words_.count(word) != 0; }
  const std::set<std::string>& words() const { return words_; }
  std::uint64_t hash() const;  // fnv-1a over the sorted word list

  bool operator==(const StopWordList&) const = default;

 private:
  std::set<std::string> words_;
};

// lowercase, strip everything but letters/digits/whitespace, collapse runs of
// whitespace, trim. Idempotent.
std::string normalize_answer(std::string_view raw);

// lowercase maximal alphanumeric runs, in order of appearance
std::vector<std::string> split_words(std::string_view text);

// unique split_words minus stop words
WordSet tokenize_concepts(std::string_view text, const StopWordList& stopwords);

// most frequent normalized answer, lexicographically smallest on ties
std::string majority_ground_truth(const std::vector<std::string>& answers);

std::string to_lower(std::string_view text);

}  // namespace priorshift
