#include "priorshift/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>

#include <json.hpp>

#include "priorshift/errors.hpp"

namespace priorshift {

namespace {

using nlohmann::json;

bool is_integer_literal(const std::string& text) {
  if (text.empty()) return false;
  for (unsigned char c : text)
    if (!std::isdigit(c)) return false;
  return true;
}

bool is_number_word(const std::string& text) {
  static const std::set<std::string> words = {"zero", "one", "two",  "three", "four",
                                             "five", "six", "seven", "eight", "nine",
                                             "ten"};
  return words.count(text) != 0;
}

std::string id_to_string(const json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_integer()) return std::to_string(value.get<long long>());
  if (value.is_number_unsigned()) return std::to_string(value.get<unsigned long long>());
  throw DataError("prediction file: expected a string or integer id");
}

}  // namespace

AnswerCategory categorize_answer(const std::string& ground_truth,
                                 const std::string& answer_type_hint) {
  if (answer_type_hint == "yes/no") return AnswerCategory::YesNo;
  if (answer_type_hint == "number") return AnswerCategory::Number;
  if (answer_type_hint == "other") return AnswerCategory::Other;
  if (ground_truth == "yes" || ground_truth == "no") return AnswerCategory::YesNo;
  if (is_integer_literal(ground_truth) || is_number_word(ground_truth))
    return AnswerCategory::Number;
  return AnswerCategory::Other;
}

double vqa_accuracy(const std::string& predicted,
                    const std::vector<std::string>& human_answers) {
  if (human_answers.empty())
    throw DataError("vqa_accuracy: empty human answer multiset");
  if (human_answers.size() == 1)
    return normalize_answer(human_answers.front()) == predicted ? 1.0 : 0.0;
  std::size_t matches = 0;
  for (const auto& answer : human_answers)
    if (normalize_answer(answer) == predicted) ++matches;
  return std::min(static_cast<double>(matches) / 3.0, 1.0);
}

PriorModel fit_prior(const Corpus& corpus, const std::vector<std::size_t>& train_idx,
                     PriorMode mode, bool fit_on_answer_multisets) {
  PriorModel model;
  model.mode = mode;
  std::map<std::string, std::map<std::string, std::size_t>> per_qtype;
  std::map<std::string, std::size_t> global;
  for (std::size_t i : train_idx) {
    const QaRecord& rec = corpus.records.at(i);
    auto count = [&](const std::string& answer) {
      if (answer.empty()) return;
      ++per_qtype[rec.question_type][answer];
      ++global[answer];
    };
    if (fit_on_answer_multisets && !rec.human_answers.empty())
      for (const auto& a : rec.human_answers) count(normalize_answer(a));
    else
      count(rec.ground_truth);
  }
  auto mode_of = [](const std::map<std::string, std::size_t>& counts) {
    const std::string* best = nullptr;
    std::size_t best_count = 0;
    for (const auto& [answer, count] : counts)
      if (count > best_count) {  // map order keeps the lexicographic tie-break
        best = &answer;
        best_count = count;
      }
    return best ? *best : std::string();
  };
  for (const auto& [qtype, counts] : per_qtype) model.per_qtype[qtype] = mode_of(counts);
  model.global_answer = mode_of(global);
  return model;
}

std::string predict_prior(const PriorModel& model, const QaRecord& record) {
  if (model.mode == PriorMode::Global) return model.global_answer;
  auto it = model.per_qtype.find(record.question_type);
  return it == model.per_qtype.end() ? model.global_answer : it->second;
}

PredictionFile load_predictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("prediction file not readable: " + path.string());
  PredictionFile file;
  file.model_name = path.stem().string();

  // a leading '[' means the challenge-style JSON array layout
  char first = 0;
  while (in.get(first) && std::isspace(static_cast<unsigned char>(first))) {
  }
  in.clear();
  in.seekg(0);
  if (first == '[') {
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw DataError(path.string() + ": JSON parse error: " + e.what());
    }
    for (const auto& entry : j) {
      if (!entry.contains("question_id") || !entry.contains("answer"))
        throw DataError(path.string() + ": array entries need question_id and answer");
      file.answers[id_to_string(entry["question_id"])] =
          normalize_answer(entry["answer"].get<std::string>());
    }
  } else {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      bool blank = true;
      for (unsigned char c : line)
        if (!std::isspace(c)) {
          blank = false;
          break;
        }
      if (blank) continue;
      json j;
      try {
        j = json::parse(line);
      } catch (const json::parse_error& e) {
        throw DataError(path.string() + ": line " + std::to_string(line_no) +
                        ": JSON parse error: " + e.what());
      }
      if (!j.contains("id") || !j.contains("answer"))
        throw DataError(path.string() + ": line " + std::to_string(line_no) +
                        ": lines need id and answer");
      file.answers[id_to_string(j["id"])] =
          normalize_answer(j["answer"].get<std::string>());
    }
  }
  return file;
}

ScoreBreakdown evaluate(const PredictionFile& predictions, const Corpus& corpus,
                        const std::vector<std::size_t>& test_idx, bool strict) {
  std::set<std::string> known_ids;
  for (std::size_t i : test_idx) known_ids.insert(corpus.records.at(i).record_id);
  std::vector<std::string> unknown;
  for (const auto& [id, answer] : predictions.answers)
    if (!known_ids.count(id)) {
      unknown.push_back(id);
      if (unknown.size() >= 10) break;
    }
  if (!unknown.empty()) {
    std::sort(unknown.begin(), unknown.end());
    std::string msg = "predictions for unknown record ids:";
    for (const auto& id : unknown) msg += " " + id;
    throw DataError(msg);
  }

  ScoreBreakdown breakdown;
  double sum_all = 0.0, sum_yn = 0.0, sum_num = 0.0, sum_other = 0.0;
  for (std::size_t i : test_idx) {
    const QaRecord& rec = corpus.records.at(i);
    double accuracy = 0.0;
    auto it = predictions.answers.find(rec.record_id);
    if (it == predictions.answers.end()) {
      if (strict)
        throw DataError("missing prediction for record id " + rec.record_id);
      ++breakdown.missing_predictions;
    } else if (!rec.human_answers.empty()) {
      accuracy = vqa_accuracy(it->second, rec.human_answers);
    } else {
      accuracy = it->second == rec.ground_truth && !rec.ground_truth.empty() ? 1.0 : 0.0;
    }
    sum_all += accuracy;
    ++breakdown.total;
    switch (categorize_answer(rec.ground_truth, rec.answer_type)) {
      case AnswerCategory::YesNo:
        sum_yn += accuracy;
        ++breakdown.yes_no_count;
        break;
      case AnswerCategory::Number:
        sum_num += accuracy;
        ++breakdown.number_count;
        break;
      case AnswerCategory::Other:
        sum_other += accuracy;
        ++breakdown.other_count;
        break;
    }
  }
  auto percent = [](double sum, std::size_t n) {
    return n == 0 ? 0.0 : 100.0 * sum / static_cast<double>(n);
  };
  breakdown.overall = percent(sum_all, breakdown.total);
  breakdown.yes_no = percent(sum_yn, breakdown.yes_no_count);
  breakdown.number = percent(sum_num, breakdown.number_count);
  breakdown.other = percent(sum_other, breakdown.other_count);
  return breakdown;
}

std::string format_score_table(
    const std::vector<std::pair<std::string, ScoreBreakdown>>& rows) {
  std::size_t name_w = 5;
  for (const auto& [name, b] : rows) name_w = std::max(name_w, name.size());
  char buf[256];
  std::string out;
  std::snprintf(buf, sizeof buf, "%-*s  %8s  %8s  %8s  %8s\n",
                static_cast<int>(name_w), "Model", "Overall", "Yes/No", "Number",
                "Other");
  out += buf;
  for (const auto& [name, b] : rows) {
    std::snprintf(buf, sizeof buf, "%-*s  %8.2f  %8.2f  %8.2f  %8.2f\n",
                  static_cast<int>(name_w), name.c_str(), b.overall, b.yes_no, b.number,
                  b.other);
    out += buf;
  }
  return out;
}

}  // namespace priorshift
