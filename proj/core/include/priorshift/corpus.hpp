#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "priorshift/text.hpp"

namespace priorshift {

// One question/answer data point. ground_truth is always in normalized form;
// human_answers keeps the raw annotator strings.
struct QaRecord {
  std::string record_id;
  std::string image_id;
  std::string question_text;
  std::vector<std::string> human_answers;
  std::string ground_truth;
  std::string question_type;
  std::string answer_type;                   // optional annotation hint
  std::vector<std::string> latent_concepts;  // synthetic corpora only, sorted

  bool operator==(const QaRecord&) const = default;
};

class QuestionTypeList {
 public:
  static constexpr const char* kFallback = "__other__";

  QuestionTypeList();
  explicit QuestionTypeList(const std::vector<std::string>& prefixes);
  // one prefix per line, '#' starts a comment
  static QuestionTypeList from_file(const std::filesystem::path& path);

  // sorted, lowercase, unique; always contains the fallback entry
  const std::vector<std::string>& prefixes() const { return prefixes_; }

  bool operator==(const QuestionTypeList&) const = default;

 private:
  std::vector<std::string> prefixes_;
};

// longest listed prefix matching the lowercased question at a word boundary,
// fallback otherwise
std::string assign_question_type(std::string_view question_text,
                                 const QuestionTypeList& qtypes);

struct Corpus {
  std::vector<QaRecord> records;
  QuestionTypeList qtypes;
  StopWordList stopwords;

  bool operator==(const Corpus&) const = default;
};

Corpus load_vqa_annotations(const std::filesystem::path& questions_path,
                            const std::filesystem::path& annotations_path,
                            const QuestionTypeList& qtypes);

Corpus load_jsonl_corpus(const std::filesystem::path& path,
                         const QuestionTypeList& qtypes,
                         const StopWordList& stopwords = StopWordList::default_list());

void save_jsonl_corpus(const Corpus& corpus, const std::vector<std::size_t>& record_idx,
                       const std::filesystem::path& path);

// distinct ground truths with instance counts, ordered count desc then answer asc
std::vector<std::pair<std::string, std::size_t>> ranked_answers(
    const Corpus& corpus, const std::vector<std::size_t>& record_idx);

std::vector<std::size_t> all_record_indices(const Corpus& corpus);

}  // namespace priorshift
