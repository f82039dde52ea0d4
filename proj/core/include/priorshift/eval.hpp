#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "priorshift/corpus.hpp"

namespace priorshift {

enum class AnswerCategory { YesNo, Number, Other };

// annotation hint wins when present; otherwise yes/no by value, number when
// the ground truth is a base-10 integer or a number word zero..ten
AnswerCategory categorize_answer(const std::string& ground_truth,
                                 const std::string& answer_type_hint = "");

// consensus metric: min(matching human answers / 3, 1). A single-answer
// multiset degrades to exact match.
double vqa_accuracy(const std::string& predicted,
                    const std::vector<std::string>& human_answers);

enum class PriorMode { PerQtype, Global };

struct PriorModel {
  PriorMode mode = PriorMode::PerQtype;
  std::map<std::string, std::string> per_qtype;  // covers every train qtype
  std::string global_answer;
};

// most popular train answer, per question type and globally; counted over the
// full human-answer multiset unless fit_on_answer_multisets is off
PriorModel fit_prior(const Corpus& corpus, const std::vector<std::size_t>& train_idx,
                     PriorMode mode, bool fit_on_answer_multisets = true);

// per-qtype answer with global fallback for unseen qtypes
std::string predict_prior(const PriorModel& model, const QaRecord& record);

struct PredictionFile {
  std::string model_name;
  std::unordered_map<std::string, std::string> answers;  // record id -> normalized
};

// JSONL {id, answer} lines, or a JSON array of {question_id, answer}
PredictionFile load_predictions(const std::filesystem::path& path);

struct ScoreBreakdown {
  double overall = 0.0, yes_no = 0.0, number = 0.0, other = 0.0;  // percent
  std::size_t total = 0, yes_no_count = 0, number_count = 0, other_count = 0;
  std::size_t missing_predictions = 0;
};

ScoreBreakdown evaluate(const PredictionFile& predictions, const Corpus& corpus,
                        const std::vector<std::size_t>& test_idx, bool strict = false);

std::string format_score_table(
    const std::vector<std::pair<std::string, ScoreBreakdown>>& rows);

}  // namespace priorshift
