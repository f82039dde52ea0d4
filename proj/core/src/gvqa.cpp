#include "priorshift/gvqa.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>

#include <json.hpp>

#include "priorshift/errors.hpp"
#include "priorshift/kmeans.hpp"
#include "priorshift/rng.hpp"

namespace priorshift {

namespace {

using nlohmann::ordered_json;

const std::set<std::string>& auxiliaries() {
  static const std::set<std::string> words = {"is",  "are",  "was",   "were", "do",
                                              "does", "did",  "has",   "have", "had",
                                              "can",  "could", "will", "would",
                                              "should"};
  return words;
}

const std::set<std::string>& skip_words() {
  // determiners, pronouns, and the glue words that sit between the subject
  // and the concept being verified
  static const std::set<std::string> words = {
      "the",  "a",    "an",   "this", "that", "these", "those",
      "it",   "he",   "she",  "they", "you",  "i",     "we",
      "me",   "him",  "her",  "us",   "them", "my",    "your",
      "his",  "hers", "its",  "our",  "their",
      "wearing", "there"};
  return words;
}

int nearest_centroid(const ClusterModel& model, const std::vector<double>& vec) {
  int best = 0;
  double best_d = std::numeric_limits<double>::max();
  for (std::size_t c = 0; c < model.centroids.size(); ++c) {
    double d = 0.0;
    for (std::size_t k = 0; k < vec.size(); ++k) {
      const double diff = vec[k] - model.centroids[c][k];
      d += diff * diff;
    }
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

}  // namespace

Route classify_question(std::string_view question_text) {
  const auto words = split_words(question_text);
  if (!words.empty() && auxiliaries().count(words.front())) return Route::YesNo;
  return Route::NonYesNo;
}

std::string extract_qmain(const std::string& question_text, const std::string& qtype) {
  if (qtype == QuestionTypeList::kFallback) return question_text;
  const std::string lowered = to_lower(question_text);
  if (lowered.size() < qtype.size() || lowered.compare(0, qtype.size(), qtype) != 0)
    return question_text;  // unmatched prefix: leave the question alone
  if (lowered.size() > qtype.size() &&
      std::isalnum(static_cast<unsigned char>(lowered[qtype.size()])))
    return question_text;
  std::string rest = question_text.substr(qtype.size());
  std::size_t b = 0;
  while (b < rest.size() && std::isspace(static_cast<unsigned char>(rest[b]))) ++b;
  return rest.substr(b);
}

std::optional<std::string> extract_verification_concept(
    const std::string& question_text) {
  auto words = split_words(question_text);
  if (!words.empty() && auxiliaries().count(words.front()))
    words.erase(words.begin());
  std::string last;
  for (const auto& w : words)
    if (!skip_words().count(w)) last = w;
  if (last.empty()) return std::nullopt;
  return last;
}

ConceptVocabulary::ConceptVocabulary(std::vector<VocabEntry> entries, double coverage)
    : entries_(std::move(entries)), coverage_(coverage) {
  for (std::size_t i = 0; i < entries_.size(); ++i) index_[entries_[i].word] = i;
}

std::optional<std::size_t> ConceptVocabulary::index_of(
    const std::string& word) const {
  auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> default_object_qtypes() {
  return {"__other__",       "what is",        "what is the", "what is this",
          "what is in the",  "what is on the", "what animal is",
          "what kind of",    "what type of"};
}

ConceptVocabulary build_concept_vocabulary(const Corpus& corpus,
                                           const std::vector<std::size_t>& train_idx,
                                           std::size_t size,
                                           const std::vector<std::string>& object_qtypes) {
  if (size == 0) throw ConfigError("concept vocabulary size must be positive");
  const std::set<std::string> object_set(object_qtypes.begin(), object_qtypes.end());
  std::map<std::string, std::size_t> counts;
  std::set<std::string> object_words;
  std::size_t total = 0;
  for (std::size_t i : train_idx) {
    const QaRecord& rec = corpus.records.at(i);
    const std::string qmain = extract_qmain(rec.question_text, rec.question_type);
    for (const auto& w : split_words(qmain)) {
      if (corpus.stopwords.contains(w)) continue;
      ++counts[w];
      ++total;
    }
    for (const auto& w : split_words(rec.ground_truth)) {
      if (corpus.stopwords.contains(w)) continue;
      ++counts[w];
      ++total;
      if (object_set.count(rec.question_type)) object_words.insert(w);
    }
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (ranked.size() > size) ranked.resize(size);

  std::vector<VocabEntry> entries;
  entries.reserve(ranked.size());
  std::size_t kept = 0;
  for (auto& [word, count] : ranked) {
    VocabEntry entry;
    entry.word = word;
    entry.kind = object_words.count(word) ? ConceptKind::Object : ConceptKind::Attribute;
    entry.frequency = count;
    kept += count;
    entries.push_back(std::move(entry));
  }
  const double coverage =
      total == 0 ? 1.0 : static_cast<double>(kept) / static_cast<double>(total);
  return ConceptVocabulary(std::move(entries), coverage);
}

std::vector<std::string> answer_classes(const Corpus& corpus,
                                        const std::vector<std::size_t>& train_idx,
                                        std::size_t k) {
  const auto ranked = ranked_answers(corpus, train_idx);
  std::vector<std::string> classes;
  for (std::size_t i = 0; i < ranked.size() && classes.size() < k; ++i) {
    if (ranked[i].first == "yes" || ranked[i].first == "no") continue;
    classes.push_back(ranked[i].first);
  }
  return classes;
}

ClusterModel build_cluster_model(const std::vector<std::string>& answer_classes,
                                 const ConceptVocabulary& vocab,
                                 const EmbeddingTable& embeddings, int cluster_count,
                                 std::uint64_t seed) {
  if (cluster_count < 1)
    throw ConfigError("build_cluster_model: cluster count must be positive");
  ClusterModel model;
  model.cluster_count = cluster_count;
  model.seed = seed;

  std::vector<std::string> embeddable;
  std::vector<std::vector<double>> points;
  std::vector<std::string> oov;
  for (const auto& answer : answer_classes) {
    if (answer == "yes" || answer == "no") continue;
    if (auto vec = embeddings.phrase_vector(answer)) {
      embeddable.push_back(answer);
      points.push_back(std::move(*vec));
    } else {
      oov.push_back(answer);
    }
  }
  if (points.size() < static_cast<std::size_t>(cluster_count)) {
    const std::size_t considered = embeddable.size() + oov.size();
    const double oov_rate =
        considered == 0 ? 1.0
                        : static_cast<double>(oov.size()) / static_cast<double>(considered);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.1f", 100.0 * oov_rate);
    throw DataError("build_cluster_model: only " + std::to_string(points.size()) +
                    " embeddable answers for " + std::to_string(cluster_count) +
                    " clusters (" + buf + "% out of vocabulary)");
  }

  const KmeansResult clustering = kmeans(points, cluster_count, seed);
  model.centroids = clustering.centroids;
  for (std::size_t i = 0; i < embeddable.size(); ++i)
    model.answer_to_cluster[embeddable[i]] = clustering.assignment[i];

  // the most common clustered answer anchors every fallback
  model.fallback_cluster_id = clustering.assignment.empty() ? 0 : clustering.assignment[0];
  for (const auto& answer : oov) model.answer_to_cluster[answer] = model.fallback_cluster_id;

  // object cluster: the one holding the most OBJECT-kind answers
  std::vector<std::size_t> object_counts(static_cast<std::size_t>(cluster_count), 0);
  bool any_object = false;
  for (std::size_t i = 0; i < embeddable.size(); ++i) {
    const auto idx = vocab.index_of(embeddable[i]);
    if (idx && vocab.entries()[*idx].kind == ConceptKind::Object) {
      ++object_counts[static_cast<std::size_t>(clustering.assignment[i])];
      any_object = true;
    }
  }
  model.object_cluster_id = model.fallback_cluster_id;
  if (any_object) {
    std::size_t best = 0;
    for (std::size_t c = 0; c < object_counts.size(); ++c)
      if (object_counts[c] > object_counts[best]) best = c;
    model.object_cluster_id = static_cast<int>(best);
  }

  for (const auto& entry : vocab.entries()) {
    int cluster;
    if (entry.kind == ConceptKind::Object) {
      cluster = model.object_cluster_id;
    } else if (auto vec = embeddings.phrase_vector(entry.word)) {
      cluster = nearest_centroid(model, *vec);
    } else {
      cluster = model.fallback_cluster_id;
    }
    model.concept_to_cluster[entry.word] = cluster;
  }

  model.cluster_concepts.assign(static_cast<std::size_t>(cluster_count), {});
  for (const auto& [word, cluster] : model.concept_to_cluster)
    model.cluster_concepts[static_cast<std::size_t>(cluster)].push_back(word);
  return model;
}

void save_vocab_json(const ConceptVocabulary& vocab, const std::filesystem::path& path) {
  ordered_json j;
  j["size"] = vocab.size();
  j["coverage"] = vocab.coverage();
  j["kind_inference"] = "qtype-heuristic";
  j["concepts"] = ordered_json::array();
  for (const auto& entry : vocab.entries())
    j["concepts"].push_back(
        {{"concept", entry.word},
         {"kind", entry.kind == ConceptKind::Object ? "object" : "attribute"},
         {"frequency", entry.frequency}});
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("output file not writable: " + path.string());
  out << j.dump(2) << '\n';
}

void save_cluster_model_json(const ClusterModel& model,
                             const std::filesystem::path& path) {
  ordered_json j;
  j["C"] = model.cluster_count;
  j["seed"] = model.seed;
  j["object_cluster_id"] = model.object_cluster_id;
  j["fallback_cluster_id"] = model.fallback_cluster_id;
  j["object_cluster_within_c"] = true;
  j["centroids"] = model.centroids;
  ordered_json answers = ordered_json::object();
  for (const auto& [answer, cluster] : model.answer_to_cluster) answers[answer] = cluster;
  j["answer_to_cluster"] = std::move(answers);
  ordered_json concepts = ordered_json::object();
  for (const auto& [word, cluster] : model.concept_to_cluster)
    concepts[word] = cluster;
  j["concept_to_cluster"] = std::move(concepts);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("output file not writable: " + path.string());
  out << j.dump(2) << '\n';
}

OracleRecognizer::OracleRecognizer(const Corpus& corpus, const ConceptVocabulary& vocab)
    : vocab_(&vocab) {
  for (const auto& rec : corpus.records) {
    auto& set = image_concepts_[rec.image_id];
    set.insert(rec.latent_concepts.begin(), rec.latent_concepts.end());
  }
}

ConceptScores OracleRecognizer::recognize(const std::string& image_id,
                                          const std::string&) const {
  ConceptScores scores(vocab_->size(), 0.0);
  auto it = image_concepts_.find(image_id);
  if (it == image_concepts_.end()) return scores;
  for (const auto& word : it->second)
    if (auto idx = vocab_->index_of(word)) scores[*idx] = 1.0;
  return scores;
}

NoisyRecognizer::NoisyRecognizer(const ConceptRecognizer& base, double epsilon,
                                 std::uint64_t seed)
    : base_(&base), epsilon_(epsilon), seed_(seed) {
  if (epsilon < 0.0 || epsilon > 1.0)
    throw ConfigError("noise epsilon must lie in [0, 1]");
}

ConceptScores NoisyRecognizer::recognize(const std::string& image_id,
                                         const std::string& qmain) const {
  ConceptScores scores = base_->recognize(image_id, qmain);
  std::mt19937_64 gen(rng::fnv1a(image_id) ^ seed_);
  for (double& score : scores) {
    if (rng::u01(gen) < epsilon_) score = rng::u01(gen);
  }
  return scores;
}

int OracleClusterPredictor::predict(const QaRecord& record) const {
  auto it = model_->answer_to_cluster.find(record.ground_truth);
  if (it != model_->answer_to_cluster.end()) return it->second;
  if (embeddings_)
    if (auto vec = embeddings_->phrase_vector(record.ground_truth))
      return nearest_centroid(*model_, *vec);
  return model_->fallback_cluster_id;
}

PriorClusterPredictor::PriorClusterPredictor(const Corpus& corpus,
                                             const std::vector<std::size_t>& train_idx,
                                             const ClusterModel& model) {
  std::map<std::string, std::map<int, std::size_t>> per_qtype;
  std::map<int, std::size_t> global;
  for (std::size_t i : train_idx) {
    const QaRecord& rec = corpus.records.at(i);
    auto it = model.answer_to_cluster.find(rec.ground_truth);
    if (it == model.answer_to_cluster.end()) continue;
    ++per_qtype[rec.question_type][it->second];
    ++global[it->second];
  }
  auto mode_of = [&](const std::map<int, std::size_t>& counts) {
    int best = model.fallback_cluster_id;
    std::size_t best_count = 0;
    for (const auto& [cluster, count] : counts)
      if (count > best_count) {  // smallest cluster id wins ties via map order
        best = cluster;
        best_count = count;
      }
    return best;
  };
  for (const auto& [qtype, counts] : per_qtype) per_qtype_[qtype] = mode_of(counts);
  global_ = mode_of(global);
}

int PriorClusterPredictor::predict(const QaRecord& record) const {
  auto it = per_qtype_.find(record.question_type);
  return it == per_qtype_.end() ? global_ : it->second;
}

VccLabelSet vcc_training_labels(const QaRecord& record, const ConceptVocabulary& vocab,
                                const ClusterModel& model,
                                const StopWordList& stopwords) {
  VccLabelSet labels;
  const std::string qmain = extract_qmain(record.question_text, record.question_type);
  WordSet candidates = tokenize_concepts(qmain, stopwords);
  for (const auto& w : tokenize_concepts(record.ground_truth, stopwords))
    candidates.insert(w);
  for (const auto& w : candidates)
    if (vocab.index_of(w)) labels.positives.insert(w);
  for (const auto& word : labels.positives) {
    auto it = model.concept_to_cluster.find(word);
    if (it == model.concept_to_cluster.end()) continue;
    labels.active_clusters.insert(it->second);
    for (const auto& member :
         model.cluster_concepts[static_cast<std::size_t>(it->second)])
      if (!labels.positives.count(member)) labels.negatives.insert(member);
  }
  // a concept can be positive via one cluster and a member of another
  for (const auto& word : labels.positives) labels.negatives.erase(word);
  return labels;
}

std::string predict_answer(const ConceptScores& scores, int cluster_id,
                           const ClusterModel& model, const ConceptVocabulary& vocab) {
  if (cluster_id < 0 || cluster_id >= model.cluster_count)
    throw DataError("predict_answer: cluster id " + std::to_string(cluster_id) +
                    " out of range");
  if (scores.size() != vocab.size())
    throw DataError("predict_answer: score vector does not match the vocabulary");
  const auto& members = model.cluster_concepts[static_cast<std::size_t>(cluster_id)];
  const std::string* best = nullptr;
  double best_score = 0.0;
  for (const auto& word : members) {  // lex order keeps ties deterministic
    const double score = scores[*vocab.index_of(word)];
    if (!best || score > best_score) {
      best = &word;
      best_score = score;
    }
  }
  if (!best)
    throw DataError("EMPTY_CLUSTER: cluster " + std::to_string(cluster_id) +
                    " holds no vocabulary concepts");
  return *best;
}

VerifyOutcome verify_concept(const ConceptScores& scores, const std::string& word,
                             const ConceptVocabulary& vocab, double threshold) {
  if (scores.size() != vocab.size())
    throw DataError("verify_concept: score vector does not match the vocabulary");
  VerifyOutcome outcome;
  const auto idx = vocab.index_of(word);
  if (!idx) {
    outcome.answer = "no";
    outcome.oov = true;
    return outcome;
  }
  outcome.answer = scores[*idx] >= threshold ? "yes" : "no";
  return outcome;
}

GvqaTrace gvqa_answer(const QaRecord& record, const ConceptRecognizer& recognizer,
                      const ClusterPredictor& cluster_predictor,
                      const ClusterModel& model, const ConceptVocabulary& vocab,
                      double verify_threshold, std::size_t top_k) {
  GvqaTrace trace;
  trace.record_id = record.record_id;
  trace.route = classify_question(record.question_text);
  trace.qtype = record.question_type;
  trace.qmain = extract_qmain(record.question_text, record.question_type);

  const ConceptScores scores = recognizer.recognize(record.image_id, trace.qmain);
  if (scores.size() != vocab.size())
    throw DataError("recognizer returned " + std::to_string(scores.size()) +
                    " scores for a vocabulary of " + std::to_string(vocab.size()));

  // top-k scores for the trace: score desc, concept asc
  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return vocab.entries()[a].word < vocab.entries()[b].word;
  });
  for (std::size_t i = 0; i < order.size() && i < top_k; ++i)
    trace.top_scores.emplace_back(vocab.entries()[order[i]].word, scores[order[i]]);

  if (trace.route == Route::YesNo) {
    const auto word = extract_verification_concept(record.question_text);
    if (!word) {
      trace.error = "VERIFICATION_CONCEPT_NOT_FOUND";
      return trace;
    }
    trace.extracted_concept = *word;
    const VerifyOutcome outcome = verify_concept(scores, *word, vocab, verify_threshold);
    trace.concept_oov = outcome.oov;
    trace.answer = outcome.answer;
    return trace;
  }

  trace.cluster_id = cluster_predictor.predict(record);
  try {
    trace.answer = predict_answer(scores, trace.cluster_id, model, vocab);
  } catch (const DataError& e) {
    trace.error = e.what();
  }
  return trace;
}

}  // namespace priorshift
