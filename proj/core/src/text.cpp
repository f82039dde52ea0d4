#include "priorshift/text.hpp"

#include <cctype>
#include <fstream>
#include <map>

#include "priorshift/errors.hpp"
#include "priorshift/rng.hpp"

namespace priorshift {

namespace {

bool is_alnum(unsigned char c) { return std::isalnum(c) != 0; }
bool is_space(unsigned char c) { return std::isspace(c) != 0; }

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

}  // namespace

StopWordList::StopWordList(const std::vector<std::string>& words) {
  for (const auto& w : words) {
    std::string t = to_lower(trim(w));
    if (!t.empty()) words_.insert(t);
  }
}

StopWordList StopWordList::default_list() {
  return StopWordList({"is", "are", "the", "a", "an", "of", "in", "on", "at", "to",
                       "what", "this", "that"});
}

StopWordList StopWordList::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("stop-word file not readable: " + path.string());
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    words.push_back(line);
  }
  return StopWordList(words);
}

std::uint64_t StopWordList::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& w : words_) {
    h = rng::fnv1a(w, h);
    h = rng::fnv1a("\n", h);
  }
  return h;
}

std::string to_lower(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (unsigned char c : text) out.push_back(static_cast<char>(std::tolower(c)));
  return out;
}

std::string normalize_answer(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (unsigned char c : raw) {
    if (is_alnum(c)) {
      if (pending_space && !out.empty()) out.push_back(' ');
      pending_space = false;
      out.push_back(static_cast<char>(std::tolower(c)));
    } else if (is_space(c)) {
      pending_space = true;
    }
    // punctuation drops out without splitting the word
  }
  return out;
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  for (unsigned char c : text) {
    if (is_alnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      words.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

WordSet tokenize_concepts(std::string_view text, const StopWordList& stopwords) {
  WordSet set;
  for (auto& word : split_words(text))
    if (!stopwords.contains(word)) set.insert(std::move(word));
  return set;
}

std::string majority_ground_truth(const std::vector<std::string>& answers) {
  if (answers.empty()) throw DataError("majority_ground_truth: empty answer multiset");
  std::map<std::string, std::size_t> counts;
  for (const auto& a : answers) ++counts[normalize_answer(a)];
  const std::string* best = nullptr;
  std::size_t best_count = 0;
  for (const auto& [answer, count] : counts) {
    if (count > best_count) {  // map order keeps the lexicographic tie-break
      best = &answer;
      best_count = count;
    }
  }
  return *best;
}

}  // namespace priorshift
