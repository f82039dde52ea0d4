#include "priorshift/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "priorshift/errors.hpp"

namespace priorshift {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string id_to_string(const json& value, const char* what) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_integer()) return std::to_string(value.get<long long>());
  if (value.is_number_unsigned()) return std::to_string(value.get<unsigned long long>());
  throw DataError(std::string(what) + ": expected a string or integer id");
}

json parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("input file not readable: " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(path.string() + ": JSON parse error at byte " +
                    std::to_string(e.byte) + ": " + e.what());
  }
}

}  // namespace

QuestionTypeList::QuestionTypeList() { prefixes_.push_back(kFallback); }

QuestionTypeList::QuestionTypeList(const std::vector<std::string>& prefixes) {
  std::set<std::string> unique;
  for (const auto& p : prefixes) {
    std::string t = to_lower(trim(p));
    if (!t.empty()) unique.insert(t);
  }
  unique.insert(kFallback);
  prefixes_.assign(unique.begin(), unique.end());
}

QuestionTypeList QuestionTypeList::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("question-type file not readable: " + path.string());
  std::vector<std::string> prefixes;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    prefixes.push_back(line);
  }
  return QuestionTypeList(prefixes);
}

std::string assign_question_type(std::string_view question_text,
                                 const QuestionTypeList& qtypes) {
  std::string q = to_lower(question_text);
  const std::string* best = nullptr;
  for (const auto& prefix : qtypes.prefixes()) {
    if (prefix == QuestionTypeList::kFallback) continue;
    if (q.size() < prefix.size() || q.compare(0, prefix.size(), prefix) != 0) continue;
    if (q.size() > prefix.size() &&
        std::isalnum(static_cast<unsigned char>(q[prefix.size()])))
      continue;  // word boundary required
    if (!best || prefix.size() > best->size()) best = &prefix;
  }
  return best ? *best : QuestionTypeList::kFallback;
}

Corpus load_vqa_annotations(const std::filesystem::path& questions_path,
                            const std::filesystem::path& annotations_path,
                            const QuestionTypeList& qtypes) {
  json qfile = parse_file(questions_path);
  json afile = parse_file(annotations_path);
  if (!qfile.contains("questions") || !qfile["questions"].is_array())
    throw DataError(questions_path.string() + ": missing \"questions\" array");
  if (!afile.contains("annotations") || !afile["annotations"].is_array())
    throw DataError(annotations_path.string() + ": missing \"annotations\" array");

  std::map<std::string, const json*> by_qid;
  for (const auto& ann : afile["annotations"])
    by_qid[id_to_string(ann.at("question_id"), "annotation question_id")] = &ann;

  Corpus corpus;
  corpus.qtypes = qtypes;
  corpus.stopwords = StopWordList::default_list();
  corpus.records.reserve(qfile["questions"].size());

  std::vector<std::string> orphans;
  std::set<std::string> seen;
  for (const auto& q : qfile["questions"]) {
    std::string qid = id_to_string(q.at("question_id"), "question_id");
    seen.insert(qid);
    auto it = by_qid.find(qid);
    if (it == by_qid.end()) {
      if (orphans.size() < 10) orphans.push_back(qid);
      continue;
    }
    const json& ann = *it->second;
    QaRecord rec;
    rec.record_id = qid;
    rec.image_id = id_to_string(q.at("image_id"), "image_id");
    rec.question_text = q.at("question").get<std::string>();
    if (ann.contains("answers"))
      for (const auto& a : ann["answers"])
        rec.human_answers.push_back(a.at("answer").get<std::string>());
    rec.ground_truth = normalize_answer(ann.at("multiple_choice_answer").get<std::string>());
    rec.question_type = ann.value("question_type", std::string());
    if (rec.question_type.empty())
      rec.question_type = assign_question_type(rec.question_text, qtypes);
    rec.answer_type = ann.value("answer_type", std::string());
    corpus.records.push_back(std::move(rec));
  }
  if (!orphans.empty()) {
    std::string msg = "questions without annotations:";
    for (const auto& id : orphans) msg += " " + id;
    throw DataError(msg);
  }
  for (const auto& [qid, ann] : by_qid) {
    if (!seen.count(qid)) {
      orphans.push_back(qid);
      if (orphans.size() >= 10) break;
    }
  }
  if (!orphans.empty()) {
    std::string msg = "annotations without questions:";
    for (const auto& id : orphans) msg += " " + id;
    throw DataError(msg);
  }
  return corpus;
}

Corpus load_jsonl_corpus(const std::filesystem::path& path,
                         const QuestionTypeList& qtypes,
                         const StopWordList& stopwords) {
  std::ifstream in(path);
  if (!in) throw ConfigError("input file not readable: " + path.string());
  Corpus corpus;
  corpus.qtypes = qtypes;
  corpus.stopwords = stopwords;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(path.string() + ": line " + std::to_string(line_no) +
                      ": JSON parse error: " + e.what());
    }
    QaRecord rec;
    try {
      rec.record_id = id_to_string(j.at("id"), "id");
      rec.question_text = j.at("question").get<std::string>();
    } catch (const json::exception& e) {
      throw DataError(path.string() + ": line " + std::to_string(line_no) + ": " +
                      e.what());
    }
    if (j.contains("image") && !j["image"].is_null())
      rec.image_id = id_to_string(j["image"], "image");
    if (j.contains("answers") && j["answers"].is_array())
      for (const auto& a : j["answers"]) rec.human_answers.push_back(a.get<std::string>());
    if (j.contains("answer") && j["answer"].is_string()) {
      // an explicit ground truth wins over the majority rule
      rec.ground_truth = normalize_answer(j["answer"].get<std::string>());
      if (rec.human_answers.empty())
        rec.human_answers.push_back(j["answer"].get<std::string>());
    } else if (!rec.human_answers.empty()) {
      rec.ground_truth = majority_ground_truth(rec.human_answers);
    } else {
      throw DataError(path.string() + ": line " + std::to_string(line_no) +
                      ": missing \"answers\" or \"answer\"");
    }
    rec.question_type = j.value("qtype", std::string());
    if (rec.question_type.empty())
      rec.question_type = assign_question_type(rec.question_text, qtypes);
    rec.answer_type = j.value("answer_type", std::string());
    if (j.contains("concepts") && j["concepts"].is_array()) {
      std::set<std::string> concepts;
      for (const auto& c : j["concepts"]) concepts.insert(c.get<std::string>());
      rec.latent_concepts.assign(concepts.begin(), concepts.end());
    }
    corpus.records.push_back(std::move(rec));
  }
  return corpus;
}

void save_jsonl_corpus(const Corpus& corpus, const std::vector<std::size_t>& record_idx,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("output file not writable: " + path.string());
  for (std::size_t idx : record_idx) {
    const QaRecord& rec = corpus.records.at(idx);
    ordered_json j;
    j["id"] = rec.record_id;
    j["image"] = rec.image_id;
    j["question"] = rec.question_text;
    j["qtype"] = rec.question_type;
    j["answer"] = rec.ground_truth;
    if (!rec.human_answers.empty()) j["answers"] = rec.human_answers;
    if (!rec.answer_type.empty()) j["answer_type"] = rec.answer_type;
    if (!rec.latent_concepts.empty()) j["concepts"] = rec.latent_concepts;
    out << j.dump() << '\n';
  }
}

std::vector<std::pair<std::string, std::size_t>> ranked_answers(
    const Corpus& corpus, const std::vector<std::size_t>& record_idx) {
  std::map<std::string, std::size_t> counts;
  for (std::size_t idx : record_idx) {
    const auto& gt = corpus.records.at(idx).ground_truth;
    if (!gt.empty()) ++counts[gt];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return ranked;
}

std::vector<std::size_t> all_record_indices(const Corpus& corpus) {
  std::vector<std::size_t> idx(corpus.records.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  return idx;
}

}  // namespace priorshift
